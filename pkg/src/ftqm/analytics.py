"""Closed-form margins, failure probabilities, thresholds and resource counts.

Everything here is a pure function of its arguments.  Bit index ``j`` of the
fault-tolerant protocols always uses the code QRM(1, j + 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from scipy.optimize import bisect

from .codes import (
    WeightDistribution,
    macwilliams_transform,
    punctured_rm_distribution,
    shortened_rm_distribution,
    weight_enum_eval,
)

BISECT_LO = 0.0
BISECT_HI = 0.5
BISECT_ITERS = 200
BISECT_XTOL = 1e-15

PROTOCOLS = ("Ia", "Ib", "Ib-dev", "Ic")


class NonConvergentError(ValueError):
    """Failure probability at or above the decision margin."""


class NoThresholdError(ValueError):
    """The threshold equation has no root in (0, 0.5)."""


# --------------------------------------------------------------------------
# small helpers
# --------------------------------------------------------------------------

def survival(p: float, count: float) -> float:
    """(1 - p) ** count, evaluated through log1p."""
    if count == 0:
        return 1.0
    if p >= 1.0:
        return 0.0
    return math.exp(count * math.log1p(-p))


def solve_threshold(lhs: Callable[[float], float], target: float,
                    lo: float = BISECT_LO, hi: float = BISECT_HI) -> float:
    """Root of lhs(p) = target for a non-decreasing lhs, by bisection."""
    f0 = lhs(lo) - target
    if f0 >= 0:
        raise NoThresholdError(f"lhs({lo}) = {lhs(lo):.6g} already reaches {target:.6g}")
    if lhs(hi) - target <= 0:
        raise NoThresholdError(f"lhs stays below {target:.6g} on [{lo}, {hi}]")
    return bisect(lambda p: lhs(p) - target, lo, hi, xtol=BISECT_XTOL, maxiter=BISECT_ITERS)


def _log_factor(t: int, epsilon: float) -> float:
    if t < 1:
        raise ValueError("t must be >= 1")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return math.log(2 * t / epsilon)


# --------------------------------------------------------------------------
# Protocol Ia
# --------------------------------------------------------------------------

def delta_of_gamma(gamma: float) -> float:
    """Probability margin |sin(gamma)| / 2 for exclusion half-width gamma."""
    return abs(math.sin(gamma)) / 2


def p_fail_ia(p: float, t: int, p_prime: float | None = None) -> float:
    """Outcome-flip probability after 2^(t-1) noisy interrogations.

    With ``p_prime`` the probe preparation and the final measurement may
    also fail, each with probability ``p_prime``.
    """
    s = survival(p, 2 ** (t - 1))
    if p_prime:
        s *= survival(p_prime, 2)
    return 1.0 - s


def threshold_ia(gamma: float, t: int, p_prime: float | None = None) -> float:
    return solve_threshold(lambda p: p_fail_ia(p, t, p_prime), delta_of_gamma(gamma))


def trials_required(delta: float, p_f: float, t: int, epsilon: float) -> int:
    """Repetitions per bit so that all t bits are right w.p. >= 1 - epsilon."""
    margin = delta - p_f
    if margin <= 0:
        raise NonConvergentError(f"p_f={p_f:.6g} >= delta={delta:.6g}")
    return math.ceil(_log_factor(t, epsilon) / (2 * margin ** 2))


def resources_ia(gamma: float, t: int, epsilon: float, p: float) -> float:
    """Field interrogations (2^t - 1) * M for Protocol Ia, M unrounded."""
    margin = delta_of_gamma(gamma) - p_fail_ia(p, t)
    if margin <= 0:
        raise NonConvergentError(f"p={p} is at or above the Ia threshold for t={t}")
    return (2 ** t - 1) * _log_factor(t, epsilon) / (2 * margin ** 2)


def stddev_phi(t: int, epsilon: float) -> float:
    return math.sqrt((1 - epsilon) ** 2 * math.pi ** 2 / 2 ** (2 * (t + 1))
                     + epsilon ** 2 * math.pi ** 2)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    bit: int

    @property
    def length(self) -> float:
        return self.hi - self.lo


def excluded_regions(gamma: float, t: int) -> list[Interval]:
    """Phases in [0, pi) on which the noiseless estimator aborts at some bit."""
    out = []
    for j in range(1, t + 1):
        half = gamma / 2 ** (j - 1)
        for prefix in range(2 ** (j - 1)):
            centre = prefix * math.pi / 2 ** (j - 1) + math.pi / 2 ** j
            out.append(Interval(centre - half, centre + half, j))
    return sorted(out, key=lambda iv: (iv.lo, iv.bit))


def union_measure(intervals: Iterable[Interval]) -> float:
    total, cur_lo, cur_hi = 0.0, None, None
    for iv in sorted(intervals, key=lambda iv: iv.lo):
        if cur_hi is None or iv.lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = iv.lo, iv.hi
        else:
            cur_hi = max(cur_hi, iv.hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


# --------------------------------------------------------------------------
# non-transversal rotation
# --------------------------------------------------------------------------

def logical_shift(phi: float, m: int) -> float:
    """Logical Z rotation left by transversal R_z(-phi) on QRM(1, m) after postselection."""
    phi_m = 2 ** (m - 1) * phi
    return phi - 2 * math.atan(math.sin(phi_m) / ((2 ** m - 1) + math.cos(phi_m)))


def rejection_bound(m: int) -> float:
    """Upper bound on the X-syndrome rejection probability of one block."""
    return 1.0 - (1.0 - 1.0 / 2 ** (m - 1)) ** m


def retransmit_nontransversal(j: int) -> float:
    """Rejection probability over the 2^(j-1) blocks used for bit j."""
    if j < 1:
        raise ValueError("j must be >= 1")
    return 1.0 - (1.0 - 1.0 / 2 ** (j + 1)) ** ((j + 2) * 2 ** (j - 1))


def gamma_prime(gamma: float, j: int) -> float:
    return logical_shift(gamma, j + 2)


# --------------------------------------------------------------------------
# error detection with QRM(1, m)
# --------------------------------------------------------------------------

def dual_enum_eval(dist: WeightDistribution, x: float, y: float) -> float:
    """Weight enumerator of the dual code, through the MacWilliams identity."""
    return weight_enum_eval(dist, x + y, x - y) / dist.total


def x_pass(p: float, m: int) -> float:
    """Probability that no X syndrome fires: undetected patterns are RM* words."""
    return weight_enum_eval(punctured_rm_distribution(m), 1 - p, p)


def z_pass(p: float, m: int) -> float:
    """Probability that no Z syndrome fires: undetected patterns are Hamming words."""
    return dual_enum_eval(shortened_rm_distribution(m), 1 - p, p)


def x_err(p: float, m: int) -> float:
    """P(nonzero undetected X pattern | X syndromes pass)."""
    k = 2 ** m - 1
    h = 2 ** (m - 1)
    q = 1 - p
    num = math.fsum([k * q ** h * p ** (h - 1), k * q ** (h - 1) * p ** h, p ** k])
    den = q ** k + num
    return num / den


def z_err(p: float, m: int) -> float:
    """P(odd-weight undetected Z pattern | Z syndromes pass), closed form."""
    k = 2 ** m - 1
    h = 2 ** (m - 1)
    s = 2 * p - 1
    num = math.fsum([1.0, k * s ** (h - 1), k * s ** h, s ** k])
    den = 2 * (1 + k * (1 - 2 * p) ** h)
    return min(max(num / den, 0.0), 1.0)


@lru_cache(maxsize=None)
def _hamming_split(m: int) -> tuple[WeightDistribution, WeightDistribution]:
    """(all Hamming words, even Hamming words) for block length 2^m - 1."""
    hamming = macwilliams_transform(shortened_rm_distribution(m))
    even = macwilliams_transform(punctured_rm_distribution(m))
    return hamming, even


def z_err_direct(p: float, m: int) -> float:
    """Same quantity as :func:`z_err`, summed over odd Hamming words directly."""
    hamming, even = _hamming_split(m)
    # complements of even words are exactly the odd words (n is odd)
    odd = weight_enum_eval(even, p, 1 - p)
    return odd / weight_enum_eval(hamming, 1 - p, p)


def _block_failure(qx: float, qz: float, m: int, steps: int) -> float:
    return 1.0 - survival(x_err(qx, m), steps) * survival(z_err(qz, m), steps)


def p_fail_ib(p: float, j: int) -> float:
    return _block_failure(p, p, j + 2, 2 ** (j - 1))


def threshold_ib(gamma: float, j: int) -> float:
    return solve_threshold(lambda p: p_fail_ib(p, j), delta_of_gamma(gamma_prime(gamma, j)))


def _noise_acceptance(p: float, j: int) -> float:
    m = j + 2
    return (x_pass(p, m) * z_pass(p, m)) ** (2 ** (j - 1))


def retransmit_noise(p: float, j: int) -> float:
    return 1.0 - _noise_acceptance(p, j)


def overhead_C(j: int, p: float) -> float:
    # survival products taken directly; 1 - p_n underflows for large j
    accept = _noise_acceptance(p, j) * (1.0 - 1.0 / 2 ** (j + 1)) ** ((j + 2) * 2 ** (j - 1))
    if accept == 0.0:
        return math.inf
    return (2 ** (j + 2) - 1) / accept


def trials_ib(gamma: float, j: int, t: int, epsilon: float, p: float) -> float:
    """Unrounded repetitions for bit j of Protocol Ib."""
    margin = delta_of_gamma(gamma_prime(gamma, j)) - p_fail_ib(p, j)
    if margin <= 0:
        raise NonConvergentError(f"p={p} is at or above the Ib threshold for j={j}")
    return _log_factor(t, epsilon) / (2 * margin ** 2)


def resources_ib(gamma: float, t: int, epsilon: float, p: float) -> float:
    return sum(2 ** (j - 1) * overhead_C(j, p) * trials_ib(gamma, j, t, epsilon, p)
               for j in range(1, t + 1))


# --------------------------------------------------------------------------
# noisy devices
# --------------------------------------------------------------------------

def avg_c_e(m: int) -> float:
    """Average failure points per qubit inside the non-transversal encoder."""
    return (m + 1) * 2 ** (m - 1) / (2 ** m - 1) * 2 ** (m - 1)


def dev_ib(p_prime: float, m: int) -> float:
    return (avg_c_e(m) + (2 ** m - m - 2) + 1) * p_prime


def dev_ic(p_prime: float, m: int) -> float:
    return (3 * 2 * m + 1 + (2 ** m - m - 2) + 1) * p_prime


def c0_count(m: int) -> int:
    return 3 * 2 * m * 2 ** (m - 1) + 2 ** m - 1


def c_count(m: int) -> int:
    """Pairs of failure points that leave two errors after one EC round."""
    c0 = c0_count(m)
    n = 2 ** m - 1
    return (2 * c0 ** 2 + math.comb(2 * n, 2) + 2 * m * math.comb(2 ** m, 2)
            + 3 * c0 * n + n ** 2)


def p_ec(p_prime: float, m: int) -> float:
    return min(c_count(m) * p_prime ** 2, 1.0)


def _shifted(p: float, extra: float) -> float:
    # per-qubit flip rates past 1/2 carry no meaning for these bounds
    return min(p + extra, BISECT_HI)


def lhs_ib_dev(p: float, j: int, p_prime: float) -> float:
    m, steps = j + 2, 2 ** (j - 1)
    q = _shifted(p, dev_ib(p_prime, m))
    return 1.0 - (1.0 - _block_failure(q, q, m, steps)) * survival(p_prime, 3 * steps + 2)


def lhs_ic(p: float, j: int, p_prime: float) -> float:
    m, steps = j + 2, 2 ** (j - 1)
    q = _shifted(p, dev_ic(p_prime, m))
    return 1.0 - (1.0 - _block_failure(q, q, m, steps)) * survival(p_ec(p_prime, m), 3 * steps + j + 1)


def threshold_relation_ib(gamma: float, j: int, p_prime: float) -> float:
    return solve_threshold(lambda p: lhs_ib_dev(p, j, p_prime),
                           delta_of_gamma(gamma_prime(gamma, j)))


def threshold_relation_ic(gamma: float, j: int, p_prime: float) -> float:
    return solve_threshold(lambda p: lhs_ic(p, j, p_prime),
                           delta_of_gamma(gamma_prime(gamma, j)))


@dataclass(frozen=True)
class ThresholdCurve:
    protocol: str
    j: int
    gamma: float
    points: tuple[tuple[float, float | None], ...] = field(default_factory=tuple)


def threshold_point(protocol: str, gamma: float, j: int, p_prime: float = 0.0,
                    ia_device: bool = False) -> float | None:
    """p_th for one protocol at one device-noise level; None if no root."""
    try:
        if protocol == "Ia":
            return threshold_ia(gamma, j, p_prime if ia_device else None)
        if protocol == "Ib":
            return threshold_ib(gamma, j)
        if protocol == "Ib-dev":
            return threshold_relation_ib(gamma, j, p_prime)
        if protocol == "Ic":
            return threshold_relation_ic(gamma, j, p_prime)
    except NoThresholdError:
        return None
    raise ValueError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")


def threshold_curve(protocol: str, gamma: float, j: int, p_primes: Sequence[float],
                    ia_device: bool = False) -> ThresholdCurve:
    pts = tuple((float(pp), threshold_point(protocol, gamma, j, pp, ia_device))
                for pp in sorted(p_primes))
    return ThresholdCurve(protocol, j, gamma, pts)


# --------------------------------------------------------------------------
# Protocol II (mixed radix)
# --------------------------------------------------------------------------

def delta_ii() -> float:
    return abs(math.cos(5 * math.pi / 24) ** 2 - math.cos(6 * math.pi / 24) ** 2)


def threshold_ii(t: int) -> float:
    return solve_threshold(lambda p: 1.0 - survival(p, 3 ** (t - 1)), delta_ii())


def resources_ii(t: int, epsilon: float, p: float, radices: Sequence[int]) -> float:
    """Interrogations for t digits given the radix sequence r_1, r_2, ..."""
    if len(radices) < t - 1:
        raise ValueError("need at least t - 1 radices")
    if any(r not in (2, 3) for r in radices):
        raise ValueError("radices must be 2 or 3")
    counts = [math.prod(radices[:j - 1]) for j in range(1, t + 1)]
    margin = delta_ii() - (1.0 - survival(p, counts[-1]))
    if margin <= 0:
        raise NonConvergentError(f"p={p} is at or above the Protocol II threshold")
    return sum(counts) * _log_factor(t, epsilon) / (2 * margin ** 2)
