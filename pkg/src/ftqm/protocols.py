"""Monte Carlo state machines for the bitwise estimators and the detection sampler.

Protocol runs work at the logical level: each bit draws its M measurement
outcomes from the closed-form flip probabilities in :mod:`ftqm.analytics`.
:func:`pauli_detection_stats` checks those probabilities at the physical
level by sampling Pauli patterns and measuring syndromes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import analytics as an
from .channels import PauliChannel, flip_rates, marginal_z_rate, sample_packed, sample_pattern
from .codes import qrm, syndrome, syndrome_batch

TWO_PI = 2 * math.pi
_EXACT_WASTE_LIMIT = 10_000


@dataclass(frozen=True)
class ProtocolParams:
    gamma: float
    t: int
    epsilon: float
    M: int | None = None
    radix_plan: str = "fixed-binary"

    def __post_init__(self):
        if not 0 < self.gamma < math.pi / 2:
            raise ValueError("gamma must lie in (0, pi/2)")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be >= 1")
        if self.radix_plan not in ("fixed-binary", "mixed-radix"):
            raise ValueError(f"unknown radix plan {self.radix_plan!r}")


@dataclass(frozen=True)
class PhaseValue:
    """A phase in [0, 2pi) and its digit expansions."""

    phi: float

    def __post_init__(self):
        if not 0 <= self.phi < TWO_PI:
            raise ValueError("phi must lie in [0, 2pi)")

    def binary_bits(self, t: int) -> list[int]:
        """b_1..b_t of phi = b_0 pi + b_1 pi/2 + b_2 pi/4 + ..."""
        x = self.phi / math.pi
        return [int(math.floor(x * 2 ** j)) % 2 for j in range(1, t + 1)]

    def mixed_digits(self, t: int) -> tuple[list[int], list[int]]:
        """Noiseless Protocol II digits and radices for the exact phase."""
        digits: list[int] = []
        radices: list[int] = []
        scale = 1
        for _ in range(t):
            phi_j = (scale * self.phi) % TWO_PI
            v, r = _digit_rule(phi_j - math.pi * _half_plane(digits, radices))
            digits.append(v)
            radices.append(r)
            scale *= r
        return digits, radices


@dataclass(frozen=True)
class EstimationResult:
    protocol: str
    digits: tuple[int, ...]
    radices: tuple[int, ...]
    phi_hat: float
    aborted_at: int | None
    interrogations: int
    retransmissions: int
    interrogations_full_restart: int
    correct: bool


def reconstruct(digits, radices) -> float:
    phi, scale = 0.0, 1
    for v, r in zip(digits, radices):
        scale *= r
        phi += v * math.pi / scale
    return phi


# --------------------------------------------------------------------------
# decision rules
# --------------------------------------------------------------------------

def ideal_plus_prob(phi_j: float) -> float:
    """Probability of the +1 outcome when X is measured on (|0> + e^{i phi_j}|1>)/sqrt2."""
    return (1 + math.cos(phi_j)) / 2


def phase_from_prob(p_hat: float, upper: bool) -> float:
    a = math.acos(min(max(2 * p_hat - 1, -1.0), 1.0))
    return TWO_PI - a if upper else a


def decide_bit(p_hat: float, b_prev: int, gamma_eff: float) -> int | None:
    """0 or 1 for the next bit, or None to abort inside the exclusion band."""
    off = phase_from_prob(p_hat, bool(b_prev)) - b_prev * math.pi
    if 0 <= off < math.pi / 2 - gamma_eff:
        return 0
    if math.pi / 2 + gamma_eff <= off <= math.pi:
        return 1
    return None


def _digit_rule(off: float) -> tuple[int, int]:
    if off < 5 * math.pi / 12:
        return 0, 2
    if off < 7 * math.pi / 12:
        return 1, 3
    return 1, 2


def _half_plane(digits, radices) -> int:
    """Parity of the integer part of (prod r_l) * phi / pi given earlier digits.

    For a binary expansion this is just the previous digit.  With radix-3
    digits the carried multiples of pi can be odd, so the whole prefix counts.
    """
    h = 0
    for v, r in zip(digits, radices):
        h = (h * r + v) % 2
    return h


def decide_digit(p_hat: float, half_plane: int) -> tuple[int, int]:
    """(v_j, r_j) for Protocol II; never aborts."""
    off = phase_from_prob(p_hat, bool(half_plane)) - half_plane * math.pi
    return _digit_rule(off)


# --------------------------------------------------------------------------
# protocol runs
# --------------------------------------------------------------------------

def _noisy_prob(p_true: float, p_f: float) -> float:
    return p_true * (1 - p_f) + (1 - p_true) * p_f


def _z_rate(channel: PauliChannel, exact: bool) -> float:
    # only Z components flip an X-basis outcome
    return marginal_z_rate(channel) if exact else channel.p


def _check_phase(phi_true: float):
    if not 0 <= phi_true < math.pi:
        raise ValueError("phi_true must lie in [0, pi)")


def run_protocol_ia(phi_true: float, params: ProtocolParams, channel: PauliChannel,
                    rng: np.random.Generator, p_prime: float | None = None,
                    exact: bool = False) -> EstimationResult:
    _check_phase(phi_true)
    t, gamma = params.t, params.gamma
    rate = _z_rate(channel, exact)
    M = params.M or an.trials_required(an.delta_of_gamma(gamma), an.p_fail_ia(rate, t, p_prime),
                                       t, params.epsilon)
    out_rng, _ = rng.spawn(2)
    truth = PhaseValue(phi_true).binary_bits(t)
    bits: list[int] = []
    used = 0
    aborted = None
    for j in range(1, t + 1):
        p_j = ideal_plus_prob((2 ** (j - 1) * phi_true) % TWO_PI)
        p_obs = _noisy_prob(p_j, an.p_fail_ia(rate, j, p_prime))
        p_hat = out_rng.binomial(M, p_obs) / M
        used += M * 2 ** (j - 1)
        b = decide_bit(p_hat, bits[-1] if bits else 0, gamma)
        if b is None:
            aborted = j
            break
        bits.append(b)
    return EstimationResult("Ia", tuple(bits), (2,) * len(bits), reconstruct(bits, [2] * len(bits)),
                            aborted, used, 0, used, aborted is None and bits == truth)


def _rejection_steps(rng: np.random.Generator, failures: int, s: float, steps: int) -> int:
    """Total steps consumed by ``failures`` rejected repetitions.

    Each rejected repetition stops at the first rejecting step K in 1..steps,
    P(K = k) proportional to s^(k-1) (1 - s).
    """
    if failures == 0:
        return 0
    if s <= 0:
        return failures
    tail = 1 - s ** steps
    if failures > _EXACT_WASTE_LIMIT:
        # CLT for huge counts; keeps memory bounded
        k = np.arange(1, steps + 1)
        w = s ** (k - 1) * (1 - s) / tail
        mean = float((k * w).sum())
        var = float((k ** 2 * w).sum()) - mean ** 2
        return max(failures, int(round(rng.normal(failures * mean, math.sqrt(failures * var)))))
    u = rng.random(failures)
    k = np.ceil(np.log1p(-u * tail) / math.log(s))
    return int(np.clip(k, 1, steps).sum())


def _run_ft(label: str, phi_true: float, params: ProtocolParams, channel: PauliChannel,
            rng: np.random.Generator, p_prime: float | None, exact: bool,
            reject_nontransversal: bool) -> EstimationResult:
    _check_phase(phi_true)
    t, gamma = params.t, params.gamma
    qx0, qz0 = flip_rates(channel, exact)
    pp = p_prime or 0.0
    out_rng, aux_rng = rng.spawn(2)
    truth = PhaseValue(phi_true).binary_bits(t)
    bits: list[int] = []
    used = used_full = retrans = 0
    aborted = None
    for j in range(1, t + 1):
        m, steps, block = j + 2, 2 ** (j - 1), 2 ** (j + 2) - 1
        if label == "Ic":
            extra = an.dev_ic(pp, m)
            device_survival = an.survival(an.p_ec(pp, m), 3 * steps + j + 1)
        elif p_prime is not None:
            extra = an.dev_ib(pp, m)
            device_survival = an.survival(pp, 3 * steps + 2)
        else:
            extra, device_survival = 0.0, 1.0
        qx, qz = an._shifted(qx0, extra), an._shifted(qz0, extra)
        p_f = 1 - an.survival(an.x_err(qx, m), steps) * an.survival(an.z_err(qz, m), steps) \
            * device_survival
        gamma_eff = an.gamma_prime(gamma, j)
        if params.M:
            M = params.M
        else:
            M = an.trials_required(an.delta_of_gamma(gamma_eff), p_f, t, params.epsilon)
        accept = an.x_pass(qx, m) * an.z_pass(qz, m)
        if reject_nontransversal:
            accept *= 1 - an.rejection_bound(m)
        q_rep = accept ** steps
        failures = int(aux_rng.negative_binomial(M, q_rep)) if q_rep < 1 else 0
        wasted = _rejection_steps(aux_rng, failures, accept, steps)
        retrans += failures
        used += block * (M * steps + wasted)
        used_full += block * steps * (M + failures)

        p_j = ideal_plus_prob((2 ** (j - 1) * phi_true) % TWO_PI)
        p_hat = out_rng.binomial(M, _noisy_prob(p_j, p_f)) / M
        b = decide_bit(p_hat, bits[-1] if bits else 0, gamma_eff)
        if b is None:
            aborted = j
            break
        bits.append(b)
    return EstimationResult(label, tuple(bits), (2,) * len(bits), reconstruct(bits, [2] * len(bits)),
                            aborted, used, retrans, used_full, aborted is None and bits == truth)


def run_protocol_ib(phi_true: float, params: ProtocolParams, channel: PauliChannel,
                    rng: np.random.Generator, p_prime: float | None = None,
                    exact: bool = False, reject_nontransversal: bool = True) -> EstimationResult:
    """Protocol Ib; ``p_prime`` switches on device noise in encoding and syndromes."""
    return _run_ft("Ib", phi_true, params, channel, rng, p_prime, exact, reject_nontransversal)


def run_protocol_ic(phi_true: float, params: ProtocolParams, channel: PauliChannel,
                    rng: np.random.Generator, p_prime: float, exact: bool = False,
                    reject_nontransversal: bool = True) -> EstimationResult:
    if p_prime is None:
        raise ValueError("Protocol Ic needs a device noise level")
    return _run_ft("Ic", phi_true, params, channel, rng, p_prime, exact, reject_nontransversal)


def run_protocol_ii(phi_true: float, params: ProtocolParams, channel: PauliChannel,
                    rng: np.random.Generator, exact: bool = False,
                    literal_half_plane: bool = False) -> EstimationResult:
    """Mixed-radix estimator.

    ``literal_half_plane`` places each estimate by the previous digit alone;
    the default uses the parity of the whole prefix, which is what the
    expansion requires once radix-3 digits appear.
    """
    _check_phase(phi_true)
    t = params.t
    rate = _z_rate(channel, exact)
    if params.M:
        M = params.M
    else:
        M = an.trials_required(an.delta_ii(), 1 - an.survival(rate, 3 ** (t - 1)), t, params.epsilon)
    out_rng, _ = rng.spawn(2)
    digits: list[int] = []
    radices: list[int] = []
    scale = 1
    used = 0
    for j in range(1, t + 1):
        p_f = 1 - an.survival(rate, scale)
        p_j = ideal_plus_prob((scale * phi_true) % TWO_PI)
        p_hat = out_rng.binomial(M, _noisy_prob(p_j, p_f)) / M
        used += M * scale
        if literal_half_plane:
            half = digits[-1] if digits else 0
        else:
            half = _half_plane(digits, radices)
        v, r = decide_digit(p_hat, half)
        digits.append(v)
        radices.append(r)
        scale *= r
    phi_hat = reconstruct(digits, radices)
    # a valid expansion leaves a tail in [0, pi / prod r)
    correct = 0 <= phi_true - phi_hat < math.pi / scale + 1e-12
    return EstimationResult("II", tuple(digits), tuple(radices), phi_hat, None, used, 0, used, correct)


def run_protocol(name: str, phi_true: float, params: ProtocolParams, channel: PauliChannel,
                 rng: np.random.Generator, p_prime: float | None = None,
                 exact: bool = False) -> EstimationResult:
    if name == "Ia":
        return run_protocol_ia(phi_true, params, channel, rng, p_prime, exact)
    if name == "Ib":
        return run_protocol_ib(phi_true, params, channel, rng, p_prime, exact)
    if name == "Ic":
        return run_protocol_ic(phi_true, params, channel, rng, p_prime or 0.0, exact)
    if name == "II":
        return run_protocol_ii(phi_true, params, channel, rng, exact)
    raise ValueError(f"unknown protocol {name!r}")


# --------------------------------------------------------------------------
# physical-level detection sampler
# --------------------------------------------------------------------------

class DetectionTag(enum.Enum):
    REJECTED = "rejected"
    PASSED_CLEAN = "passed_clean"
    PASSED_X_CORRUPT = "passed_x_corrupt"
    PASSED_Z_CORRUPT = "passed_z_corrupt"


@dataclass(frozen=True)
class DetectionTrialOutcome:
    """Tag plus the flags it was derived from.

    Both corruptions at once are tagged as X corruption.
    """

    tag: DetectionTag
    x_pass: bool
    z_pass: bool
    x_corrupt: bool
    z_corrupt: bool


def _tag(x_ok: bool, z_ok: bool, x_bad: bool, z_bad: bool) -> DetectionTag:
    if not (x_ok and z_ok):
        return DetectionTag.REJECTED
    if x_bad:
        return DetectionTag.PASSED_X_CORRUPT
    if z_bad:
        return DetectionTag.PASSED_Z_CORRUPT
    return DetectionTag.PASSED_CLEAN


def pauli_detection_trial(m: int, channel: PauliChannel, rng: np.random.Generator) -> DetectionTrialOutcome:
    code = qrm(m)
    e = sample_pattern(channel, code.n, rng)
    x_ok = not syndrome(code.h_z, e.x_part).any()
    z_ok = not syndrome(code.h_x, e.z_part).any()
    x_bad = x_ok and bool(e.x_part.any())
    z_bad = z_ok and int(e.z_part.sum()) % 2 == 1
    return DetectionTrialOutcome(_tag(x_ok, z_ok, x_bad, z_bad), x_ok, z_ok, x_bad, z_bad)


@dataclass(frozen=True)
class DetectionStats:
    m: int
    trials: int
    x_pass: int
    z_pass: int
    x_corrupt: int  # among x_pass
    z_corrupt: int  # among z_pass
    tags: dict

    def rate(self, name: str) -> float:
        num = getattr(self, name)
        if name == "x_corrupt":
            return num / self.x_pass
        if name == "z_corrupt":
            return num / self.z_pass
        return num / self.trials


def pauli_detection_stats(m: int, channel: PauliChannel, trials: int,
                          rng: np.random.Generator, chunk: int = 1 << 17) -> DetectionStats:
    """Vectorised detection trials on QRM(1, m), m <= 6."""
    code = qrm(m)
    counts = dict.fromkeys(("x_pass", "z_pass", "x_corrupt", "z_corrupt"), 0)
    tags = dict.fromkeys(DetectionTag, 0)
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        x, z = sample_packed(channel, code.n, size, rng)
        x_ok = ~syndrome_batch(code.h_z, x).any(axis=1)
        z_ok = ~syndrome_batch(code.h_x, z).any(axis=1)
        x_bad = x_ok & (x != 0)
        z_bad = z_ok & ((np.bitwise_count(z) & 1) == 1)
        counts["x_pass"] += int(x_ok.sum())
        counts["z_pass"] += int(z_ok.sum())
        counts["x_corrupt"] += int(x_bad.sum())
        counts["z_corrupt"] += int(z_bad.sum())
        both = x_ok & z_ok
        tags[DetectionTag.REJECTED] += int((~both).sum())
        tags[DetectionTag.PASSED_X_CORRUPT] += int((both & x_bad).sum())
        tags[DetectionTag.PASSED_Z_CORRUPT] += int((both & ~x_bad & z_bad).sum())
        tags[DetectionTag.PASSED_CLEAN] += int((both & ~x_bad & ~z_bad).sum())
        done += size
    return DetectionStats(m, trials, tags=tags, **counts)
