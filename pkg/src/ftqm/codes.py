"""GF(2) linear codes built from first- and second-order Reed-Muller codes.

Rows are stored bit-packed in little-endian ``uint64`` words: column ``c``
lives in word ``c // 64`` at bit ``c % 64``.  Codes are immutable after
construction and safe to share between threads.

Conventions
-----------
* ``rm_generator(r, m)`` lists monomials from highest degree down to the
  constant, variables in descending significance.  Variable ``x_i`` is bit
  ``i - 1`` of the column index, so ``rm_generator(1, 3)`` reproduces the
  familiar matrix whose first row is ``00001111``.
* Shortening/puncturing deletes the FIRST coordinate.
* Parity-check matrices are the null space in reduced row-echelon form, so
  dumps are byte-stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

WORD = 64
MAX_ENUM_DIM = 24
_ENUM_BLOCK_DIM = 16


# --------------------------------------------------------------------------
# packing helpers
# --------------------------------------------------------------------------

def _nwords(ncols: int) -> int:
    return max(1, -(-ncols // WORD))


def pack_bits(dense) -> np.ndarray:
    """Pack a (rows, n) 0/1 array into (rows, ceil(n/64)) uint64 words."""
    dense = np.asarray(dense, dtype=np.uint8)
    if dense.ndim == 1:
        dense = dense[None, :]
    rows, n = dense.shape
    nw = _nwords(n)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :n] = dense & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").astype(np.uint64).reshape(rows, nw)


def unpack_bits(words: np.ndarray, ncols: int) -> np.ndarray:
    words = np.ascontiguousarray(np.atleast_2d(words), dtype="<u8")
    as_bytes = words.view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :ncols]


def popcount(words: np.ndarray) -> np.ndarray:
    """Hamming weight of each packed row (sums over the last axis)."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


# --------------------------------------------------------------------------
# matrices
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """A GF(2) matrix with bit-packed rows."""

    words: np.ndarray
    ncols: int

    def __post_init__(self):
        w = np.array(self.words, dtype=np.uint64, copy=True)
        if w.ndim != 2:
            w = w.reshape(-1, _nwords(self.ncols))
        if w.shape[1] != _nwords(self.ncols):
            raise ValueError(
                f"expected {_nwords(self.ncols)} words per row, got {w.shape[1]}")
        # bits beyond ncols must be clear
        tail = self.ncols % WORD
        if tail and w.size and np.any(w[:, -1] >> np.uint64(tail)):
            raise ValueError("bits set beyond the last column")
        w.setflags(write=False)
        object.__setattr__(self, "words", w)

    @classmethod
    def from_dense(cls, dense) -> "BinaryMatrix":
        dense = np.asarray(dense, dtype=np.uint8)
        if dense.ndim == 1:
            dense = dense[None, :]
        return cls(pack_bits(dense), dense.shape[1])

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "BinaryMatrix":
        rows = [r.strip() for r in rows if r.strip()]
        return cls.from_dense([[int(ch) for ch in r] for r in rows])

    @classmethod
    def empty(cls, ncols: int) -> "BinaryMatrix":
        return cls(np.zeros((0, _nwords(ncols)), dtype=np.uint64), ncols)

    @property
    def nrows(self) -> int:
        return self.words.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def to_dense(self) -> np.ndarray:
        if self.nrows == 0:
            return np.zeros((0, self.ncols), dtype=np.uint8)
        return unpack_bits(self.words, self.ncols)

    def to_text(self) -> str:
        """One row per line, '0'/'1' characters."""
        return "\n".join("".join(map(str, row)) for row in self.to_dense())

    def rref(self) -> tuple["BinaryMatrix", list[int]]:
        reduced, pivots = _rref(self.words, self.ncols)
        return BinaryMatrix(reduced, self.ncols), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def null_space(self) -> "BinaryMatrix":
        """Basis of {v : self @ v = 0}, in reduced row-echelon form."""
        reduced, pivots = _rref(self.words, self.ncols)
        n = self.ncols
        free = [c for c in range(n) if c not in set(pivots)]
        if not free:
            return BinaryMatrix.empty(n)
        dense_r = unpack_bits(reduced, n) if len(pivots) else np.zeros((0, n), np.uint8)
        basis = np.zeros((len(free), n), dtype=np.uint8)
        basis[np.arange(len(free)), free] = 1
        for i, p in enumerate(pivots):
            basis[:, p] = dense_r[i, free]
        out, _ = _rref(pack_bits(basis), n)
        return BinaryMatrix(out, n)

    def mul_transpose(self, other: "BinaryMatrix") -> np.ndarray:
        """self @ other.T over GF(2), as a dense uint8 array."""
        if self.ncols != other.ncols:
            raise ValueError("column count mismatch")
        prod = self.words[:, None, :] & other.words[None, :, :]
        return (popcount(prod) & 1).astype(np.uint8)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.ncols == other.ncols and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.ncols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.nrows}x{self.ncols})"


def _rref(words: np.ndarray, ncols: int) -> tuple[np.ndarray, list[int]]:
    a = np.array(words, dtype=np.uint64, copy=True)
    nrows = a.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        w, b = divmod(c, WORD)
        mask = np.uint64(1 << b)
        hits = (a[r:, w] & mask) != 0
        if not hits.any():
            continue
        i = r + int(np.argmax(hits))
        if i != r:
            a[[r, i]] = a[[i, r]]
        others = (a[:, w] & mask) != 0
        others[r] = False
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


# --------------------------------------------------------------------------
# codes and weight distributions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryCode:
    """Linear code held as generator and parity-check matrices."""

    generator: BinaryMatrix
    parity_check: BinaryMatrix

    def __post_init__(self):
        g, h = self.generator, self.parity_check
        if g.ncols != h.ncols:
            raise ValueError("generator and parity check disagree on length")
        if g.rank() != g.nrows or h.rank() != h.nrows:
            raise ValueError("generator and parity check must have full row rank")
        if g.nrows + h.nrows != g.ncols:
            raise ValueError("dimensions do not add up to the block length")
        if g.nrows and h.nrows and g.mul_transpose(h).any():
            raise ValueError("generator is not orthogonal to parity check")

    @classmethod
    def from_generator(cls, generator: BinaryMatrix) -> "BinaryCode":
        if generator.rank() != generator.nrows:
            generator = generator.rref()[0]
        return cls(generator, generator.null_space())

    @property
    def n(self) -> int:
        return self.generator.ncols

    @property
    def k(self) -> int:
        return self.generator.nrows

    @property
    def size(self) -> int:
        return 1 << self.k

    def __repr__(self) -> str:
        return f"BinaryCode(n={self.n}, k={self.k})"


@dataclass(frozen=True)
class WeightDistribution:
    """Number of codewords at each Hamming weight."""

    n: int
    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        counts = {int(w): int(c) for w, c in dict(self.counts).items() if c}
        if any(w < 0 or w > self.n for w in counts):
            raise ValueError("weight outside [0, n]")
        if any(c < 0 for c in counts.values()):
            raise ValueError("negative count")
        if counts.get(0, 0) < 1:
            raise ValueError("a linear code contains the zero word")
        object.__setattr__(self, "counts", dict(sorted(counts.items())))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def min_distance(self) -> int | None:
        nonzero = [w for w in self.counts if w > 0]
        return min(nonzero) if nonzero else None

    def __getitem__(self, w: int) -> int:
        return self.counts.get(w, 0)

    def as_list(self) -> list[int]:
        return [self[w] for w in range(self.n + 1)]


def _combos(rows: np.ndarray) -> np.ndarray:
    """All XOR combinations of ``rows``; bit i of the index selects row i."""
    out = np.zeros((1, rows.shape[1]), dtype=np.uint64)
    for g in rows:
        out = np.concatenate([out, out ^ g])
    return out


def codewords(code: BinaryCode, max_dim: int = 20) -> np.ndarray:
    """Every codeword, packed; index bit i selects generator row i."""
    if code.k > max_dim:
        raise ValueError(f"refusing to list 2^{code.k} codewords")
    return _combos(code.generator.words)


def weight_distribution(code: BinaryCode, max_dim: int = MAX_ENUM_DIM) -> WeightDistribution:
    """Exact weight distribution by walking the whole row space."""
    k = code.k
    if k > max_dim:
        raise ValueError(f"code dimension {k} exceeds enumeration guard {max_dim}")
    rows = code.generator.words
    low = _combos(rows[:_ENUM_BLOCK_DIM])
    high = rows[_ENUM_BLOCK_DIM:]
    counts = np.zeros(code.n + 1, dtype=np.int64)
    shift = np.zeros(rows.shape[1], dtype=np.uint64)
    # Gray-code walk over the remaining rows
    for step in range(1 << len(high)):
        if step:
            shift = shift ^ high[(step & -step).bit_length() - 1]
        counts += np.bincount(popcount(low ^ shift), minlength=code.n + 1)
    return WeightDistribution(code.n, {w: int(c) for w, c in enumerate(counts)})


def weight_enum_eval(dist: WeightDistribution, x: float, y: float) -> float:
    """W(x, y) = sum over codewords of x^(n - wt) * y^wt."""
    return math.fsum(c * x ** (dist.n - w) * y ** w for w, c in dist.counts.items())


def krawtchouk(k: int, x: int, n: int) -> int:
    return sum((-1) ** j * math.comb(x, j) * math.comb(n - x, k - j) for j in range(k + 1))


def macwilliams_transform(dist: WeightDistribution, dual_size: int | None = None) -> WeightDistribution:
    """Weight distribution of the dual code, exactly in integers."""
    n, size = dist.n, dist.total
    expected = Fraction(2 ** n, size)
    if expected.denominator != 1:
        raise ValueError("code size does not divide 2^n")
    if dual_size is not None and dual_size != expected:
        raise ValueError(f"dual size {dual_size} inconsistent with 2^n/|C| = {expected}")
    out = {}
    for w in range(n + 1):
        acc = sum(c * krawtchouk(w, i, n) for i, c in dist.counts.items())
        if acc % size:
            raise ValueError("input is not the distribution of a linear code")
        out[w] = acc // size
    return WeightDistribution(n, out)


# --------------------------------------------------------------------------
# Reed-Muller family
# --------------------------------------------------------------------------

def rm_generator(r: int, m: int) -> BinaryMatrix:
    """Evaluation vectors of all monomials of degree <= r in m variables."""
    if not 0 <= m <= 16:
        raise ValueError("m must lie in [0, 16]")
    if not 0 <= r <= m:
        raise ValueError(f"order r={r} must satisfy 0 <= r <= m={m}")
    cols = np.arange(1 << m, dtype=np.int64)
    var = [((cols >> i) & 1).astype(np.uint8) for i in range(m)]
    rows = []
    for deg in range(r, -1, -1):
        for mono in combinations(range(m - 1, -1, -1), deg):
            row = np.ones(1 << m, dtype=np.uint8)
            for i in mono:
                row &= var[i]
            rows.append(row)
    return BinaryMatrix.from_dense(np.array(rows))


def shortened_rm(m: int) -> BinaryCode:
    """RM-bar(1, m): codewords of RM(1, m) starting with 0, first bit dropped."""
    if m < 2:
        raise ValueError("shortened RM(1, m) needs m >= 2")
    linear = rm_generator(1, m).to_dense()[:-1]  # drop the constant row
    return BinaryCode.from_generator(BinaryMatrix.from_dense(linear[:, 1:]))


def punctured_rm(m: int) -> BinaryCode:
    """RM*(1, m): the shortened generator plus the all-ones row."""
    if m < 2:
        raise ValueError("punctured RM(1, m) needs m >= 2")
    bar = shortened_rm(m).generator.to_dense()
    ones = np.ones((1, bar.shape[1]), dtype=np.uint8)
    return BinaryCode.from_generator(BinaryMatrix.from_dense(np.vstack([bar, ones])))


def dual(code: BinaryCode) -> BinaryCode:
    return BinaryCode(code.parity_check, code.generator)


def shortened_rm_distribution(m: int) -> WeightDistribution:
    n = (1 << m) - 1
    return WeightDistribution(n, {0: 1, 1 << (m - 1): n})


def punctured_rm_distribution(m: int) -> WeightDistribution:
    n = (1 << m) - 1
    h = 1 << (m - 1)
    return WeightDistribution(n, {0: 1, h - 1: n, h: n, n: 1})


def rm2_weight_distribution(m: int) -> WeightDistribution:
    """Closed-form weight distribution of RM(2, m)."""
    if not 4 <= m <= 16:
        raise ValueError("closed form implemented for 4 <= m <= 16")
    n = 1 << m
    half = n >> 1
    counts: dict[int, int] = {0: 1, n: 1}
    for h in range(1, -(-m // 2) + 1):
        num = 1
        for e in range(m, m - 2 * h, -1):
            num *= (1 << e) - 1
        den = 1
        for e in range(2 * h, 0, -2):
            den *= (1 << e) - 1
        a = (1 << (h * (h + 1))) * num
        if a % den:
            raise ArithmeticError("non-integral codeword count")
        a //= den
        d = 1 << (m - 1 - h)
        if a:
            counts[half - d] = a
            counts[half + d] = a
    total = 1 << (1 + m + math.comb(m, 2))
    counts[half] = total - sum(counts.values())
    return WeightDistribution(n, counts)


def syndrome(h: BinaryMatrix, error) -> np.ndarray:
    """h @ error over GF(2); all zeros iff the error goes undetected."""
    error = np.asarray(error)
    if error.ndim != 1 or error.size != h.ncols:
        raise ValueError(f"error length {error.size} does not match {h.ncols} columns")
    if h.nrows == 0:
        return np.zeros(0, dtype=np.uint8)
    return (popcount(h.words & pack_bits(error)[0]) & 1).astype(np.uint8)


def syndrome_batch(h: BinaryMatrix, patterns: np.ndarray) -> np.ndarray:
    """Syndromes of many packed single-word patterns, shape (N, rows)."""
    if h.words.shape[1] != 1:
        raise ValueError("batch syndromes support n <= 64")
    rows = h.words[:, 0]
    return (np.bitwise_count(patterns[:, None] & rows[None, :]) & 1).astype(np.uint8)


@dataclass(frozen=True)
class QrmCode:
    """CSS code QRM(1, m) on 2^m - 1 qubits.

    ``h_z`` (parity checks of RM*) catches X errors; ``h_x`` (parity checks of
    the Hamming code, i.e. the RM-bar generators) catches Z errors.
    """

    m: int
    rm_bar: BinaryCode
    rm_star: BinaryCode
    h_z: BinaryMatrix
    h_x: BinaryMatrix

    @property
    def n(self) -> int:
        return (1 << self.m) - 1

    @property
    def hamming(self) -> BinaryCode:
        return dual(self.rm_bar)


def qrm(m: int) -> QrmCode:
    if not 3 <= m <= 16:
        raise ValueError("QRM(1, m) needs 3 <= m <= 16")
    bar = shortened_rm(m)
    star = punctured_rm(m)
    return QrmCode(m, bar, star, star.parity_check, dual(bar).parity_check)
