"""Linear algebra over F2 with the symplectic form, on int bitsets.

A vector of length L is a Python int in [0, 2**L). A Pauli string on n qubits
is a vector of length 2n packed as the X block (bits 0..n-1, bit j = qubit j)
followed by the Z block (bits n..2n-1). Echelon forms use the lowest set bit
of each row as its pivot and keep rows sorted by pivot, fully reduced, so two
spanning sets give identical bases exactly when they span the same space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class AnticommutingError(ValueError):
    """Raised when a set of Pauli strings expected to commute does not."""

    def __init__(self, x: int, y: int, n: int):
        self.pair = (x, y)
        self.n = n
        super().__init__(f"strings {x:#x} and {y:#x} anticommute (n={n})")


@dataclass(frozen=True)
class BitVec:
    """Fixed-length F2 vector; `value` holds the packed bits."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 0 or not 0 <= self.value < (1 << self.length):
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    def __xor__(self, other: BitVec) -> BitVec:
        if other.length != self.length:
            raise ValueError("length mismatch")
        return BitVec(self.value ^ other.value, self.length)

    __add__ = __xor__

    def __getitem__(self, i: int) -> int:
        return (self.value >> i) & 1

    def __int__(self) -> int:
        return self.value

    def bits(self) -> np.ndarray:
        return np.array([(self.value >> i) & 1 for i in range(self.length)], dtype=np.uint8)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitVec:
        bits = list(bits)
        return cls(sum(int(b & 1) << i for i, b in enumerate(bits)), len(bits))

    def to_hex(self) -> str:
        return format(self.value, "x")

    @classmethod
    def from_hex(cls, text: str, length: int) -> BitVec:
        return cls(int(text, 16), length)

    def to_json(self) -> dict:
        return {"len": self.length, "hex": self.to_hex()}

    @classmethod
    def from_json(cls, obj: dict) -> BitVec:
        return cls.from_hex(obj["hex"], obj["len"])


def _val(x) -> int:
    return x.value if isinstance(x, BitVec) else int(x)


def parity(v: int) -> int:
    return v.bit_count() & 1


def lowbit(v: int) -> int:
    """Index of the lowest set bit (v must be nonzero)."""
    return (v & -v).bit_length() - 1


def swap_halves(x: int, n: int) -> int:
    """Exchange the X and Z blocks of a packed Pauli string."""
    mask = (1 << n) - 1
    return (x >> n) | ((x & mask) << n)


def symplectic_product(x, y, n: int | None = None) -> int:
    """<x, y> = a.d + b.c mod 2 for x = (a, b), y = (c, d)."""
    if isinstance(x, BitVec) or isinstance(y, BitVec):
        lx = x.length if isinstance(x, BitVec) else None
        ly = y.length if isinstance(y, BitVec) else None
        lengths = {v for v in (lx, ly) if v is not None}
        if len(lengths) != 1:
            raise ValueError("length mismatch")
        (length,) = lengths
        if length % 2:
            raise ValueError("symplectic vectors need even length")
        if n is not None and 2 * n != length:
            raise ValueError("n disagrees with vector length")
        n = length // 2
    if n is None:
        raise ValueError("n is required for int inputs")
    return parity(_val(x) & swap_halves(_val(y), n))


def symplectic_product_array(xs: np.ndarray, y: int, n: int) -> np.ndarray:
    """Vectorized <x_i, y> over an integer array of packed strings."""
    sy = np.uint64(swap_halves(int(y), n))
    return (np.bitwise_count(xs.astype(np.uint64) & sy) & 1).astype(np.int64)


def reduce_vector(v: int, rows: Sequence[int]) -> int:
    """Reduce v against a fully reduced echelon basis (pivot = lowest bit)."""
    for r in rows:
        if (v >> lowbit(r)) & 1:
            v ^= r
    return v


def _insert(rows: list[int], v: int) -> bool:
    v = reduce_vector(v, rows)
    if not v:
        return False
    p = lowbit(v)
    for i, r in enumerate(rows):
        if (r >> p) & 1:
            rows[i] = r ^ v
    rows.append(v)
    rows.sort(key=lowbit)
    return True


@dataclass(frozen=True)
class Subspace:
    """Subspace of F2^ambient held as its canonical reduced echelon basis."""

    rows: tuple[int, ...]
    ambient: int

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(lowbit(r) for r in self.rows)

    def __contains__(self, x) -> bool:
        return reduce_vector(_val(x), self.rows) == 0

    def basis(self) -> list[BitVec]:
        return [BitVec(r, self.ambient) for r in self.rows]

    def elements(self) -> np.ndarray:
        """All 2**dim elements, ordered by the binary index of the combination."""
        out = np.zeros(1, dtype=np.uint64)
        for r in self.rows:
            out = np.concatenate([out, out ^ np.uint64(r)])
        return out

    def to_json(self) -> dict:
        return {"ambient": self.ambient, "rows": [format(r, "x") for r in self.rows]}

    @classmethod
    def from_json(cls, obj: dict) -> Subspace:
        return row_reduce([int(h, 16) for h in obj["rows"]], obj["ambient"])


@dataclass(frozen=True)
class AffineSpace:
    """offset + directions, with the offset reduced to the coset's least element."""

    offset: int
    directions: Subspace

    def __contains__(self, x) -> bool:
        return (_val(x) ^ self.offset) in self.directions

    @property
    def dim(self) -> int:
        return self.directions.dim


def row_reduce(vectors: Iterable, ambient: int | None = None) -> Subspace:
    """Canonical echelon basis of span(vectors)."""
    vectors = list(vectors)
    if ambient is None:
        lengths = {v.length for v in vectors if isinstance(v, BitVec)}
        if len(lengths) > 1:
            raise ValueError("vectors of different lengths")
        if not lengths:
            raise ValueError("ambient dimension required for int vectors")
        ambient = lengths.pop()
    rows: list[int] = []
    for v in vectors:
        if isinstance(v, BitVec) and v.length != ambient:
            raise ValueError("vector length differs from ambient dimension")
        v = _val(v)
        if v >> ambient:
            raise ValueError("vector exceeds ambient dimension")
        _insert(rows, v)
    return Subspace(tuple(rows), ambient)


def in_span(x, s: Subspace) -> bool:
    return x in s


def is_isotropic(s: Subspace) -> bool:
    if s.ambient % 2:
        raise ValueError("symplectic form needs even ambient dimension")
    return find_anticommuting_pair(s.rows, s.ambient // 2) is None


def find_anticommuting_pair(vectors: Sequence[int], n: int) -> tuple[int, int] | None:
    for i, x in enumerate(vectors):
        sx = swap_halves(x, n)
        for y in vectors[i + 1:]:
            if parity(sx & y):
                return x, y
    return None


def affine_span(points: Iterable, length: int | None = None) -> AffineSpace:
    points = list(points)
    if not points:
        raise ValueError("affine span of an empty set")
    if length is None:
        if not isinstance(points[0], BitVec):
            raise ValueError("length required for int points")
        length = points[0].length
    p0 = _val(points[0])
    directions = row_reduce([_val(p) ^ p0 for p in points[1:]], length)
    return AffineSpace(reduce_vector(p0, directions.rows), directions)


def orthogonal_complement(s: Subspace, form: str = "standard") -> Subspace:
    """Vectors with zero product against all of s (standard dot or symplectic)."""
    if form == "symplectic":
        if s.ambient % 2:
            raise ValueError("symplectic form needs even ambient dimension")
        n = s.ambient // 2
        return orthogonal_complement(
            row_reduce([swap_halves(r, n) for r in s.rows], s.ambient), "standard")
    if form != "standard":
        raise ValueError(f"unknown form {form!r}")
    pivots = s.pivots
    pivset = set(pivots)
    out = []
    for f in range(s.ambient):
        if f in pivset:
            continue
        y = 1 << f
        for r, p in zip(s.rows, pivots):
            if (r >> f) & 1:
                y |= 1 << p
        out.append(y)
    return row_reduce(out, s.ambient)


def extend_to_lagrangian(s: Subspace) -> Subspace:
    """Smallest-effort isotropic extension of s to dimension n.

    Scans single-qubit Z strings, then X strings, in qubit order and keeps each
    one that commutes with everything so far and is independent. If that does
    not reach dimension n, vectors from the symplectic complement are added.
    """
    if s.ambient % 2:
        raise ValueError("symplectic form needs even ambient dimension")
    n = s.ambient // 2
    pair = find_anticommuting_pair(s.rows, n)
    if pair is not None:
        raise AnticommutingError(*pair, n)
    rows = list(s.rows)
    candidates = [1 << (n + q) for q in range(n)] + [1 << q for q in range(n)]
    for c in candidates:
        if len(rows) == n:
            break
        sc = swap_halves(c, n)
        if any(parity(sc & r) for r in rows):
            continue
        _insert(rows, c)
    while len(rows) < n:
        perp = orthogonal_complement(Subspace(tuple(rows), s.ambient), "symplectic")
        for c in perp.rows:
            if _insert(rows, c):
                break
    return Subspace(tuple(rows), s.ambient)
