"""Stabilizer states as signed commuting generator lists."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .clifford import CliffordCircuit, Tableau
from .f2 import AnticommutingError, Subspace, find_anticommuting_pair, lowbit, row_reduce
from .pauli import PauliProjector, SignedPauli, check_dense, weyl_phase


def signed_row_reduce(gens: Sequence[SignedPauli]) -> list[SignedPauli]:
    """Echelon form (pivot = lowest bit, fully reduced) that carries signs.

    The generators must pairwise commute, so every product stays Hermitian.
    Dependent generators are dropped after checking their sign is consistent.
    """
    rows: list[SignedPauli] = []
    for g in gens:
        v = g
        for r in rows:
            if (v.x >> lowbit(r.x)) & 1:
                v = v * r
        if v.x == 0:
            if v.sign != 1:
                raise ValueError("generators contain -I: no common +1 eigenstate")
            continue
        p = lowbit(v.x)
        rows = [r * v if (r.x >> p) & 1 else r for r in rows]
        rows.append(v)
        rows.sort(key=lambda r: lowbit(r.x))
    return rows


@dataclass(frozen=True)
class StabilizerState:
    n: int
    gens: tuple[SignedPauli, ...]

    def __post_init__(self):
        gens = tuple(self.gens)
        object.__setattr__(self, "gens", gens)
        if len(gens) != self.n or any(g.n != self.n for g in gens):
            raise ValueError("need exactly n generators on n qubits")
        pair = find_anticommuting_pair([g.x for g in gens], self.n)
        if pair is not None:
            raise AnticommutingError(*pair, self.n)
        if row_reduce([g.x for g in gens], 2 * self.n).dim != self.n:
            raise ValueError("generators are not independent")

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> StabilizerState:
        gens = tuple(SignedPauli.from_label(s) for s in labels)
        return cls(gens[0].n, gens)

    @classmethod
    def zero(cls, n: int) -> StabilizerState:
        return cls(n, tuple(SignedPauli(1, 1 << (n + q), n) for q in range(n)))

    @classmethod
    def basis_state(cls, bits: int, n: int) -> StabilizerState:
        return cls(n, tuple(SignedPauli(-1 if (bits >> q) & 1 else 1, 1 << (n + q), n)
                            for q in range(n)))

    @classmethod
    def from_circuit(cls, c: CliffordCircuit | Tableau, bits: int = 0) -> StabilizerState:
        """The state U^dagger |bits>, where U is the unitary of c."""
        inv = c.inverse().tableau() if isinstance(c, CliffordCircuit) else None
        if inv is None:
            raise TypeError("pass a CliffordCircuit")
        z = cls.basis_state(bits, c.n)
        return cls(c.n, tuple(inv.act(g) for g in z.gens))

    def canonical(self) -> tuple[SignedPauli, ...]:
        return tuple(signed_row_reduce(self.gens))

    @cached_property
    def canonical_key(self) -> bytes:
        rows = self.canonical()
        width = (2 * self.n + 7) // 8
        out = bytearray([self.n])
        for r in rows:
            out += r.x.to_bytes(width, "little")
        sign_bits = sum(1 << i for i, r in enumerate(rows) if r.sign == -1)
        out += sign_bits.to_bytes((self.n + 7) // 8 or 1, "little")
        return bytes(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, StabilizerState) and self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    @property
    def unsigned(self) -> Subspace:
        return row_reduce([g.x for g in self.gens], 2 * self.n)

    def labels(self) -> list[str]:
        return [g.label for g in self.canonical()]

    def __repr__(self) -> str:
        return f"StabilizerState({', '.join(self.labels())})"

    def group(self) -> tuple[np.ndarray, np.ndarray]:
        """All 2^n group elements as (strings, signs)."""
        return group_elements(self.gens)

    def expectation_table(self) -> np.ndarray:
        """tr(W_x |psi><psi|) for every string x, as a length-4^n array."""
        xs, signs = self.group()
        out = np.zeros(1 << (2 * self.n))
        out[xs.astype(np.int64)] = signs
        return out

    def vector(self) -> np.ndarray:
        return stabilizer_state_vector(self)

    def to_json(self) -> dict:
        return {"n": self.n, "gens": [g.to_json() for g in self.canonical()]}

    @classmethod
    def from_json(cls, obj: dict) -> StabilizerState:
        n = int(obj["n"])
        return cls(n, tuple(SignedPauli.from_json(g, n) for g in obj["gens"]))


def canonicalize(s: StabilizerState) -> bytes:
    return s.canonical_key


def group_elements(gens: Sequence[SignedPauli]) -> tuple[np.ndarray, np.ndarray]:
    """Strings and signs of every product of a commuting generator set.

    Element j is the product over set bits i of j of gens[i], in increasing i.
    """
    n = gens[0].n if gens else 0
    xs = [0]
    signs = [1]
    for g in gens:
        new_x, new_s = [], []
        for x, s in zip(xs, signs):
            e = weyl_phase(x, g.x, n)
            new_x.append(x ^ g.x)
            new_s.append(s * g.sign * (-1 if e == 2 else 1))
        xs += new_x
        signs += new_s
    return np.array(xs, dtype=np.uint64), np.array(signs, dtype=np.int64)


def _seed_vector(dim: int) -> np.ndarray:
    k = np.arange(dim)
    return np.cos(0.7 + 1.3 * k) + 1j * np.sin(0.3 + 2.1 * k) + 1.5


def stabilizer_state_vector(s: StabilizerState) -> np.ndarray:
    """Unit vector fixed by every generator, phase fixed so the first nonzero entry is real positive."""
    check_dense(s.n)
    v = _seed_vector(1 << s.n)
    for g in s.gens:
        v = PauliProjector(g).apply(v)
    norm = np.linalg.norm(v)
    if norm < 1e-9:
        # the fixed seed happened to be orthogonal; fall back to projecting basis vectors
        for k in range(1 << s.n):
            v = np.zeros(1 << s.n, dtype=complex)
            v[k] = 1
            for g in s.gens:
                v = PauliProjector(g).apply(v)
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                break
    v = v / norm
    i = int(np.argmax(np.abs(v) > 1e-9))
    return v * (abs(v[i]) / v[i])


def stabilizer_overlap(s: StabilizerState, t: StabilizerState) -> float:
    """|<s|t>|^2 from the groups alone: 0 or 2^{-(n - dim of the common subgroup)}."""
    if s.n != t.n:
        raise ValueError("qubit count mismatch")
    a = s.expectation_table()
    b = t.expectation_table()
    return float(np.dot(a, b)) / (1 << s.n)
