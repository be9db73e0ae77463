"""Weyl operators, signed Pauli strings and Pauli projectors.

W_x = i^{a.b} X^a Z^b for x = (a, b); the phase makes every W_x Hermitian,
so (1, 1) on one qubit is exactly Y. Dense arrays use little-endian basis
indices: qubit j is bit j of the row/column index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .f2 import BitVec, parity, swap_halves

DENSE_LIMIT = 10


class CapacityError(ValueError):
    """The requested dense object exceeds the configured qubit limit."""


def check_dense(n: int, limit: int | None = None) -> None:
    limit = DENSE_LIMIT if limit is None else limit
    if n > limit:
        raise CapacityError(f"n={n} exceeds dense backend limit {limit}")


def weyl_phase(x: int, y: int, n: int) -> int:
    """Exponent e (mod 4) with W_x W_y = i^e W_{x^y}."""
    mask = (1 << n) - 1
    a, b = x & mask, x >> n
    c, d = y & mask, y >> n
    e = (a & b).bit_count() + (c & d).bit_count() + 2 * (b & c).bit_count()
    e -= ((a ^ c) & (b ^ d)).bit_count()
    return e % 4


def weyl_phase_array(xs: np.ndarray, ys: np.ndarray, n: int) -> np.ndarray:
    mask = np.uint64((1 << n) - 1)
    xs = xs.astype(np.uint64)
    ys = ys.astype(np.uint64)
    sh = np.uint64(n)
    a, b = xs & mask, xs >> sh
    c, d = ys & mask, ys >> sh
    bc = np.bitwise_count
    e = (bc(a & b).astype(np.int64) + bc(c & d) + 2 * bc(b & c).astype(np.int64)
         - bc((a ^ c) & (b ^ d)))
    return e % 4


def pauli_label(x: int, n: int) -> str:
    """Letters for qubits 0..n-1, left to right."""
    out = []
    for j in range(n):
        out.append("IXZY"[((x >> j) & 1) | (((x >> (n + j)) & 1) << 1)])
    return "".join(out)


def parse_pauli(label: str) -> tuple[int, int, int]:
    """'-XIZ' -> (sign, x, n)."""
    sign = 1
    if label and label[0] in "+-":
        sign = -1 if label[0] == "-" else 1
        label = label[1:]
    n = len(label)
    x = 0
    for j, ch in enumerate(label.upper()):
        a, b = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}[ch]
        x |= (a << j) | (b << (n + j))
    return sign, x, n


@dataclass(frozen=True)
class SignedPauli:
    sign: int
    x: int
    n: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not 0 <= self.x < (1 << (2 * self.n)):
            raise ValueError("string does not fit in 2n bits")

    @classmethod
    def from_label(cls, label: str) -> SignedPauli:
        return cls(*parse_pauli(label))

    @property
    def label(self) -> str:
        return ("+" if self.sign == 1 else "-") + pauli_label(self.x, self.n)

    def __repr__(self) -> str:
        return f"SignedPauli({self.label})"

    @property
    def bitvec(self) -> BitVec:
        return BitVec(self.x, 2 * self.n)

    def __neg__(self) -> SignedPauli:
        return SignedPauli(-self.sign, self.x, self.n)

    def commutes(self, other: SignedPauli) -> bool:
        return not parity(self.x & swap_halves(other.x, self.n))

    def __mul__(self, other: SignedPauli) -> SignedPauli:
        """Product of two commuting signed strings."""
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        e = weyl_phase(self.x, other.x, self.n)
        if e % 2:
            raise ValueError("product of anticommuting strings is not Hermitian")
        sign = self.sign * other.sign * (-1 if e == 2 else 1)
        return SignedPauli(sign, self.x ^ other.x, self.n)

    def matrix(self) -> np.ndarray:
        return self.sign * weyl_matrix(self.x, self.n)

    def to_json(self) -> dict:
        return {"sign": self.sign, "x": format(self.x, "x")}

    @classmethod
    def from_json(cls, obj: dict, n: int) -> SignedPauli:
        return cls(int(obj["sign"]), int(obj["x"], 16), n)


def _basis_parity(b: int, idx: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(idx & np.uint64(b)) & 1).astype(np.int64)


def weyl_matrix(x, n: int | None = None) -> np.ndarray:
    if isinstance(x, BitVec):
        n = x.length // 2
        x = x.value
    check_dense(n)
    dim = 1 << n
    a, b = x & (dim - 1), x >> n
    k = np.arange(dim, dtype=np.uint64)
    out = np.zeros((dim, dim), dtype=complex)
    phase = 1j ** ((a & b).bit_count() % 4)
    out[(k ^ np.uint64(a)).astype(np.int64), k.astype(np.int64)] = phase * (1 - 2 * _basis_parity(b, k))
    return out


def apply_weyl(x: int, n: int, vecs: np.ndarray) -> np.ndarray:
    """W_x @ vecs, with vecs indexed by basis state along axis 0."""
    dim = 1 << n
    a, b = x & (dim - 1), x >> n
    j = np.arange(dim, dtype=np.uint64)
    src = (j ^ np.uint64(a)).astype(np.int64)
    signs = (1 - 2 * _basis_parity(b, j ^ np.uint64(a))) * (1j ** ((a & b).bit_count() % 4))
    if vecs.ndim == 1:
        return signs * vecs[src]
    return signs[:, None] * vecs[src]


@dataclass(frozen=True)
class PauliProjector:
    """(I + sign W_x) / 2."""

    p: SignedPauli

    @property
    def n(self) -> int:
        return self.p.n

    def matrix(self) -> np.ndarray:
        dim = 1 << self.p.n
        return (np.eye(dim) + self.p.matrix()) / 2

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        return (vecs + self.p.sign * apply_weyl(self.p.x, self.p.n, vecs)) / 2


def single_qubit_pauli(kind: str, j: int, n: int) -> int:
    """Packed string of X/Y/Z on qubit j."""
    a, b = {"X": (1, 0), "Z": (0, 1), "Y": (1, 1)}[kind]
    return (a << j) | (b << (n + j))
