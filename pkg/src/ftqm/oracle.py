"""Exact statevector checks of the logical action of transversal rotations.

Two representations are provided.  :class:`SparseLogicalState` maps basis
labels (Python ints, bit c = qubit c) to amplitudes; transversal Z rotations
and the code-space projector never leave the span of the RM* codewords, so
its support stays at 2^(m+1) labels for any m.  :class:`DenseState` holds
all 2^n amplitudes and exists to cross-check the sparse path for m <= 4.

Rotations follow R_z(phi) = diag(exp(-i phi/2), exp(+i phi/2)).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Union

import numpy as np

from .codes import BinaryMatrix, qrm

MAX_DENSE_M = 4
_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class SparseLogicalState:
    m: int
    amplitudes: Mapping[int, complex]

    @property
    def n(self) -> int:
        return (1 << self.m) - 1

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())


@dataclass(frozen=True)
class DenseState:
    m: int
    vector: np.ndarray

    def __post_init__(self):
        n = (1 << self.m) - 1
        if self.m > MAX_DENSE_M:
            raise ValueError(f"dense states limited to m <= {MAX_DENSE_M}")
        v = np.array(self.vector, dtype=np.complex128)
        if v.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def n(self) -> int:
        return (1 << self.m) - 1

    def norm_sq(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)


State = Union[SparseLogicalState, DenseState]


def _row_ints(mat: BinaryMatrix) -> tuple[int, ...]:
    return tuple(sum(int(b) << c for c, b in enumerate(row)) for row in mat.to_dense())


@lru_cache(maxsize=None)
def _checks(m: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(Z-type checks, X-type checks) of QRM(1, m) as bit masks."""
    code = qrm(m)
    return _row_ints(code.h_z), _row_ints(code.h_x)


@lru_cache(maxsize=None)
def _coset(m: int, x: int) -> tuple[int, ...]:
    gens = _checks(m)[1]  # X checks are the RM-bar generators
    shift = ((1 << ((1 << m) - 1)) - 1) if x else 0
    words = [0]
    for g in gens:
        words += [w ^ g for w in words]
    return tuple(w ^ shift for w in words)


def prepare_logical(m: int, x: int, dense: bool = False) -> State:
    """|x>_L: uniform superposition over RM-bar shifted by x times all-ones."""
    if m < 3:
        raise ValueError("m must be >= 3")
    if x not in (0, 1):
        raise ValueError("x must be 0 or 1")
    amp = 1 / math.sqrt(1 << m)
    return _from_map(m, {w: complex(amp) for w in _coset(m, x)}, dense)


def prepare_plus(m: int, dense: bool = False) -> State:
    amp = 1 / math.sqrt(1 << (m + 1))
    labels = _coset(m, 0) + _coset(m, 1)
    return _from_map(m, {w: complex(amp) for w in labels}, dense)


def _from_map(m: int, amps: dict[int, complex], dense: bool) -> State:
    if not dense:
        return SparseLogicalState(m, amps)
    if m > MAX_DENSE_M:
        raise ValueError(f"dense states limited to m <= {MAX_DENSE_M}")
    vec = np.zeros(1 << ((1 << m) - 1), dtype=np.complex128)
    for w, a in amps.items():
        vec[w] = a
    return DenseState(m, vec)


def apply_pauli_x(state: State, support: int) -> State:
    """X on every qubit set in ``support``."""
    if isinstance(state, DenseState):
        idx = np.arange(state.vector.size)
        return DenseState(state.m, state.vector[idx ^ support])
    return SparseLogicalState(state.m, {w ^ support: a for w, a in state.amplitudes.items()})


def apply_transversal_rz(state: State, phi: float) -> State:
    """R_z(phi) on every qubit: label y picks up exp(-i phi n/2 + i phi wt(y))."""
    n = state.n
    glob = -phi * n / 2
    if isinstance(state, DenseState):
        wt = np.bitwise_count(np.arange(state.vector.size, dtype=np.uint64)).astype(float)
        return DenseState(state.m, state.vector * np.exp(1j * (glob + phi * wt)))
    return SparseLogicalState(state.m, {
        w: a * cmath.exp(1j * (glob + phi * w.bit_count())) for w, a in state.amplitudes.items()})


def _project_z(state: State, check: int) -> State:
    if isinstance(state, DenseState):
        idx = np.arange(state.vector.size, dtype=np.uint64)
        keep = (np.bitwise_count(idx & np.uint64(check)) & 1) == 0
        return DenseState(state.m, np.where(keep, state.vector, 0))
    return SparseLogicalState(state.m, {
        w: a for w, a in state.amplitudes.items() if (w & check).bit_count() % 2 == 0})


def _project_x(state: State, gen: int) -> State:
    if isinstance(state, DenseState):
        idx = np.arange(state.vector.size)
        return DenseState(state.m, (state.vector + state.vector[idx ^ gen]) / 2)
    amps = state.amplitudes
    out: dict[int, complex] = {}
    for w in set(amps) | {w ^ gen for w in amps}:
        a = (amps.get(w, 0) + amps.get(w ^ gen, 0)) / 2
        if a != 0:
            out[w] = a
    return SparseLogicalState(state.m, out)


def _scaled(state: State, factor: float) -> State:
    if isinstance(state, DenseState):
        return DenseState(state.m, state.vector * factor)
    return SparseLogicalState(state.m, {w: a * factor for w, a in state.amplitudes.items()})


def project_code_space(state: State, return_steps: bool = False):
    """Apply (I+S)/2 for each Z then each X stabilizer generator.

    Returns ``(state, acceptance)``, the state renormalised.  With
    ``return_steps`` a third item lists the conditional acceptance of each
    sequential X-generator measurement.  A rejected state comes back as zero.
    """
    z_checks, x_checks = _checks(state.m)
    total = state.norm_sq()
    cur = state
    for row in z_checks:
        cur = _project_z(cur, row)
    steps = []
    prev = cur.norm_sq()
    for row in x_checks:
        cur = _project_x(cur, row)
        now = cur.norm_sq()
        steps.append(now / prev if prev > 0 else 0.0)
        prev = now
    acceptance = prev / total if total > 0 else 0.0
    out = _scaled(cur, 1 / math.sqrt(prev)) if prev > 0 else cur
    return (out, acceptance, steps) if return_steps else (out, acceptance)


def logical_amplitudes(state: State) -> tuple[complex, complex]:
    """(<0_L|state>, <1_L|state>)."""
    amp = 1 / math.sqrt(1 << state.m)
    out = []
    for x in (0, 1):
        labels = _coset(state.m, x)
        if isinstance(state, DenseState):
            out.append(complex(state.vector[list(labels)].sum()) * amp)
        else:
            out.append(sum(state.amplitudes.get(w, 0) for w in labels) * amp)
    return out[0], out[1]


def measure_relative_phase(state: State) -> float:
    """arg <1_L|state> - arg <0_L|state>, in [0, 2pi)."""
    c0, c1 = logical_amplitudes(state)
    if abs(c0) < _ZERO_TOL or abs(c1) < _ZERO_TOL:
        raise ValueError("state has no overlap with one of the logical basis states")
    return (cmath.phase(c1) - cmath.phase(c0)) % (2 * math.pi)


def postselected_phase(m: int, phi: float, dense: bool = False) -> float:
    """Logical phase left on |+>_L by transversal R_z(-phi) and postselection."""
    state = apply_transversal_rz(prepare_plus(m, dense), -phi)
    projected, _ = project_code_space(state)
    return measure_relative_phase(projected)


def rejection_probability(m: int, phi: float, dense: bool = False) -> float:
    """1 - acceptance of the code-space projector after transversal R_z(-phi) on |+>_L."""
    if m < 3:
        raise ValueError("m must be >= 3")
    state = apply_transversal_rz(prepare_plus(m, dense), -phi)
    return 1 - project_code_space(state)[1]
