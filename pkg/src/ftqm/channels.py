"""I.i.d. single-qubit Pauli channel and error-pattern sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import WORD


def make_rng(seed: int | None, *keys: int) -> np.random.Generator:
    """Counter-based stream for (seed, *keys).

    Each key tuple gets an independent substream, so trial ``i`` draws the
    same numbers whichever worker runs it.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PauliChannel:
    """rho -> (1-p) rho + p (px X.X + py XZ.ZX + pz Z.Z)."""

    p: float
    px: float = 1 / 3
    py: float = 1 / 3
    pz: float = 1 / 3

    def __post_init__(self):
        for name in ("p", "px", "py", "pz"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValueError(f"{name}={v} outside [0, 1]")
        if abs(self.px + self.py + self.pz - 1.0) > 1e-12:
            raise ValueError("px + py + pz must equal 1")

    @classmethod
    def parse(cls, text: str) -> "PauliChannel":
        """Parse ``p`` or ``p,px,py,pz``."""
        parts = [float(x) for x in str(text).split(",") if x.strip()]
        if len(parts) == 1:
            return cls(parts[0])
        if len(parts) == 4:
            return cls(*parts)
        raise ValueError(f"noise string {text!r}: expected p or p,px,py,pz")

    def to_text(self) -> str:
        return f"{self.p!r},{self.px!r},{self.py!r},{self.pz!r}"


def marginal_x_rate(channel: PauliChannel) -> float:
    """Per-qubit probability of an X component (X or Y)."""
    return channel.p * (channel.px + channel.py)


def marginal_z_rate(channel: PauliChannel) -> float:
    return channel.p * (channel.pz + channel.py)


def flip_rates(channel: PauliChannel, exact: bool = False) -> tuple[float, float]:
    """(x rate, z rate) fed to the closed forms.

    The default substitutes the full ``p`` for both, an upper bound valid for
    every split since the failure probabilities increase with the rate.
    """
    if exact:
        return marginal_x_rate(channel), marginal_z_rate(channel)
    return channel.p, channel.p


@dataclass(frozen=True)
class PauliErrorPattern:
    """X and Z components of an n-qubit Pauli error; Y sets both bits."""

    n: int
    x_part: np.ndarray
    z_part: np.ndarray

    def __post_init__(self):
        for name in ("x_part", "z_part"):
            v = np.asarray(getattr(self, name), dtype=np.uint8)
            if v.shape != (self.n,):
                raise ValueError(f"{name} must have length {self.n}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x_part | self.z_part))


def _sample_dense(channel: PauliChannel, n: int, size: int, rng: np.random.Generator):
    u = rng.random((size, n))
    cx = channel.p * channel.px
    cy = cx + channel.p * channel.py
    x = u < cy
    z = (u >= cx) & (u < channel.p)
    return x, z


def sample_pattern(channel: PauliChannel, n: int, rng: np.random.Generator) -> PauliErrorPattern:
    if n < 1:
        raise ValueError("n must be positive")
    x, z = _sample_dense(channel, n, 1, rng)
    return PauliErrorPattern(n, x[0], z[0])


def sample_packed(channel: PauliChannel, n: int, size: int,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``size`` patterns on n <= 64 qubits as packed (x, z) uint64 vectors."""
    if not 1 <= n <= WORD:
        raise ValueError("packed sampling supports 1 <= n <= 64")
    x, z = _sample_dense(channel, n, size, rng)
    weights = np.uint64(1) << np.arange(n, dtype=np.uint64)
    return (x.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64), \
        (z.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
