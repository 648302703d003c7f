"""Self-check suites run by ``ftqm verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import analytics as an
from . import codes as cd
from . import oracle as sv
from .channels import PauliChannel, make_rng, marginal_x_rate, marginal_z_rate
from .protocols import DetectionTag, pauli_detection_stats

SUITES = ("lemmas", "enumerators", "montecarlo", "all")


@dataclass(frozen=True)
class CheckResult:
    name: str
    observed: float
    expected: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: observed={self.observed:.12g} "
                f"expected={self.expected:.12g} tol={self.tolerance:.3g}")


def _close(name, observed, expected, tol) -> CheckResult:
    return CheckResult(name, float(observed), float(expected), tol,
                       abs(observed - expected) <= tol)


def _wrap(a: float) -> float:
    return abs((a + math.pi) % (2 * math.pi) - math.pi)


def lemma_checks(seed: int = 0, samples: int = 50) -> list[CheckResult]:
    rng = make_rng(seed, 1)
    out = []
    for m in (3, 4, 5, 6):
        phis = rng.uniform(0, 2 * math.pi, samples)
        worst = max(_wrap(sv.postselected_phase(m, f) - an.logical_shift(f, m)) for f in phis)
        out.append(_close(f"logical phase m={m} max error", worst, 0.0, 1e-10))
    for m in (3, 4, 5, 6):
        bound = an.rejection_bound(m)
        worst = max(sv.rejection_probability(m, 2 * math.pi * k / 64) for k in range(64))
        out.append(CheckResult(f"rejection m={m} max <= bound", worst, bound, 1e-12,
                               worst <= bound + 1e-12))
    for m in (3, 4):
        phis = rng.uniform(0, 2 * math.pi, 20)
        dev = 0.0
        for f in phis:
            dev = max(dev, _wrap(sv.postselected_phase(m, f) - sv.postselected_phase(m, f, dense=True)),
                      abs(sv.rejection_probability(m, f) - sv.rejection_probability(m, f, dense=True)))
        out.append(_close(f"sparse vs dense m={m}", dev, 0.0, 1e-12))
    # transversal T = R_z(pi/4) up to phase acts as logical T^dagger on QRM(1, 4)
    s = sv.apply_transversal_rz(sv.prepare_plus(4), math.pi / 4)
    phase = sv.measure_relative_phase(sv.project_code_space(s)[0])
    out.append(_close("transversal T on m=4 gives -pi/4", _wrap(phase + math.pi / 4), 0.0, 1e-12))
    proj, _ = sv.project_code_space(sv.apply_transversal_rz(sv.prepare_plus(5), 0.3))
    out.append(_close("projection idempotent", sv.project_code_space(proj)[1], 1.0, 1e-12))
    return out


def _round_trip(dist: cd.WeightDistribution) -> bool:
    return cd.macwilliams_transform(cd.macwilliams_transform(dist)) == dist


def enumerator_checks() -> list[CheckResult]:
    out = []
    for m in (2, 3, 4, 5):
        bar, star = cd.shortened_rm(m), cd.punctured_rm(m)
        for label, code in (("RM-bar", bar), ("RM*", star), ("Hamming", cd.dual(bar)),
                            ("even Hamming", cd.dual(star))):
            dist = cd.weight_distribution(code, max_dim=26)
            ok = _round_trip(dist)
            out.append(CheckResult(f"MacWilliams round trip {label} m={m}", float(ok), 1.0, 0, ok))
        for label, code, closed in (("RM-bar", bar, cd.shortened_rm_distribution(m)),
                                    ("RM*", star, cd.punctured_rm_distribution(m))):
            ok = cd.weight_distribution(code) == closed
            out.append(CheckResult(f"{label} m={m} closed form", float(ok), 1.0, 0, ok))
    for m in (3, 4, 5):
        d = cd.macwilliams_transform(cd.shortened_rm_distribution(m)).min_distance
        out.append(_close(f"Hamming m={m} min distance", d, 3, 0))
    ok = cd.weight_distribution(cd.BinaryCode.from_generator(cd.rm_generator(2, 4))) \
        == cd.rm2_weight_distribution(4)
    out.append(CheckResult("RM(2,4) closed form vs enumeration", float(ok), 1.0, 0, ok))
    return out


def montecarlo_checks(seed: int = 0, trials: int = 200_000,
                      ps=(0.0, 0.05)) -> list[CheckResult]:
    out = []
    for p in ps:
        ch = PauliChannel(p)
        qx, qz = marginal_x_rate(ch), marginal_z_rate(ch)
        for m in (3, 4, 5):
            st = pauli_detection_stats(m, ch, trials, make_rng(seed, 2, m, int(p * 1e6)))
            if p == 0:
                clean = st.tags[DetectionTag.PASSED_CLEAN]
                out.append(_close(f"p=0 m={m} all clean pass", clean / trials, 1.0, 0))
                continue
            for name, ref, n in (("x_pass", an.x_pass(qx, m), trials),
                                 ("z_pass", an.z_pass(qz, m), trials),
                                 ("x_corrupt", an.x_err(qx, m), st.x_pass),
                                 ("z_corrupt", an.z_err(qz, m), st.z_pass)):
                tol = 3 * math.sqrt(ref * (1 - ref) / n)
                out.append(_close(f"MC {name} m={m} p={p}", st.rate(name), ref, tol))
    return out


def run_suite(name: str, seed: int = 0, trials: int = 200_000) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    out: list[CheckResult] = []
    if name in ("lemmas", "all"):
        out += lemma_checks(seed)
    if name in ("enumerators", "all"):
        out += enumerator_checks()
    if name in ("montecarlo", "all"):
        out += montecarlo_checks(seed, trials)
    return out


def summary_ok(results) -> bool:
    return all(r.passed for r in results)


__all__ = ["CheckResult", "SUITES", "run_suite", "summary_ok"]
