"""Clifford circuits, their tableaus, synthesis and uniform sampling.

Gates are tuples: ("H", q), ("S", q), ("X", q), ("Z", q), ("CNOT", c, t).
A circuit applies its gates left to right, so as a unitary it is
G_last ... G_first. Conjugation rules follow the Hermitian Weyl convention,
where the string (1, 1) on a qubit is Y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .f2 import AnticommutingError, BitVec, find_anticommuting_pair, lowbit, parity, row_reduce, swap_halves
from .pauli import SignedPauli, check_dense, weyl_phase

GATE_NAMES = ("H", "S", "X", "Z", "CNOT")


def _check_gate(g: tuple, n: int) -> tuple:
    name = g[0]
    if name not in GATE_NAMES:
        raise ValueError(f"unknown gate {name!r}")
    qs = g[1:]
    if len(qs) != (2 if name == "CNOT" else 1):
        raise ValueError(f"bad arity for {g}")
    if any(not 0 <= q < n for q in qs) or (name == "CNOT" and qs[0] == qs[1]):
        raise ValueError(f"bad qubit index in {g} for n={n}")
    return (name, *map(int, qs))


@dataclass(frozen=True)
class CliffordCircuit:
    n: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(_check_gate(tuple(g), self.n) for g in self.gates))

    @classmethod
    def identity(cls, n: int) -> CliffordCircuit:
        return cls(n, ())

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, other: CliffordCircuit) -> CliffordCircuit:
        """Run self, then other."""
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return CliffordCircuit(self.n, self.gates + other.gates)

    def shifted(self, k: int, n_total: int) -> CliffordCircuit:
        """Embed as I^k (x) self (x) I on n_total qubits (qubit i -> i + k)."""
        if k + self.n > n_total:
            raise ValueError("does not fit")
        return CliffordCircuit(n_total, tuple((g[0], *(q + k for q in g[1:])) for g in self.gates))

    def inverse(self) -> CliffordCircuit:
        out = []
        for g in reversed(self.gates):
            out.extend([g, g, g] if g[0] == "S" else [g])
        return CliffordCircuit(self.n, tuple(out))

    def tableau(self) -> Tableau:
        t = Tableau.identity(self.n)
        for g in self.gates:
            t = t.apply_gate(g)
        return t

    def to_json(self) -> list[dict]:
        out = []
        for g in self.gates:
            if g[0] == "CNOT":
                out.append({"g": "CNOT", "c": g[1], "t": g[2]})
            else:
                out.append({"g": g[0], "q": g[1]})
        return out

    @classmethod
    def from_json(cls, n: int, obj: Sequence[dict]) -> CliffordCircuit:
        gates = []
        for d in obj:
            gates.append(("CNOT", d["c"], d["t"]) if d["g"] == "CNOT" else (d["g"], d["q"]))
        return cls(n, tuple(gates))


def conjugate_by_gate(g: tuple, x: int, r: int, n: int) -> tuple[int, int]:
    """G (-1)^r W_x G^dagger = (-1)^r' W_x'."""
    name = g[0]
    if name == "CNOT":
        c, t = g[1], g[2]
        xc, xt = (x >> c) & 1, (x >> t) & 1
        zc, zt = (x >> (n + c)) & 1, (x >> (n + t)) & 1
        r ^= xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        x ^= zt << (n + c)
        return x, r
    q = g[1]
    xq, zq = (x >> q) & 1, (x >> (n + q)) & 1
    if name == "H":
        r ^= xq & zq
        x &= ~((1 << q) | (1 << (n + q)))
        x |= (zq << q) | (xq << (n + q))
    elif name == "S":
        r ^= xq & zq
        x ^= xq << (n + q)
    elif name == "X":
        r ^= zq
    elif name == "Z":
        r ^= xq
    return x, r


@dataclass(frozen=True)
class Tableau:
    """Images of the generators X_0..X_{n-1}, Z_0..Z_{n-1} under conjugation.

    cols[k] is the string of U W_{e_k} U^dagger and r[k] its sign bit, where
    e_k is the k-th unit vector of the packed layout.
    """

    n: int
    cols: tuple[int, ...]
    r: tuple[int, ...]

    @classmethod
    def identity(cls, n: int) -> Tableau:
        return cls(n, tuple(1 << k for k in range(2 * n)), (0,) * (2 * n))

    @property
    def M(self) -> np.ndarray:
        """2n x 2n binary matrix whose column k is the image of e_k."""
        m = np.zeros((2 * self.n, 2 * self.n), dtype=np.uint8)
        for k, c in enumerate(self.cols):
            for i in range(2 * self.n):
                m[i, k] = (c >> i) & 1
        return m

    def is_symplectic(self) -> bool:
        n = self.n
        for i in range(2 * n):
            for j in range(2 * n):
                want = 1 if abs(i - j) == n else 0
                if parity(self.cols[i] & swap_halves(self.cols[j], n)) != want:
                    return False
        return True

    def apply_gate(self, g: tuple) -> Tableau:
        g = _check_gate(g, self.n)
        cols, rs = [], []
        for c, r in zip(self.cols, self.r):
            c, r = conjugate_by_gate(g, c, r, self.n)
            cols.append(c)
            rs.append(r)
        return Tableau(self.n, tuple(cols), tuple(rs))

    def act(self, p: SignedPauli) -> SignedPauli:
        n = self.n
        if p.n != n:
            raise ValueError("qubit count mismatch")
        a = p.x & ((1 << n) - 1)
        e = (a & (p.x >> n)).bit_count()
        cur = 0
        x = p.x
        while x:
            k = lowbit(x)
            x &= x - 1
            e += 2 * self.r[k] + weyl_phase(cur, self.cols[k], n)
            cur ^= self.cols[k]
        e %= 4
        if e % 2:
            raise AssertionError("non-Hermitian image; tableau is not symplectic")
        return SignedPauli(p.sign * (-1 if e == 2 else 1), cur, n)

    def then(self, other: Tableau) -> Tableau:
        """Tableau of running self then other (unitary other @ self)."""
        cols, rs = [], []
        for c, r in zip(self.cols, self.r):
            img = other.act(SignedPauli(-1 if r else 1, c, self.n))
            cols.append(img.x)
            rs.append(0 if img.sign == 1 else 1)
        return Tableau(self.n, tuple(cols), tuple(rs))

    def key(self) -> tuple:
        return self.cols + self.r


def clifford_act(c, p: SignedPauli) -> SignedPauli:
    """U W U^dagger for a circuit or tableau."""
    if isinstance(c, CliffordCircuit):
        c = c.tableau()
    return c.act(p)


# dense simulation ---------------------------------------------------------

def apply_gate_dense(g: tuple, vecs: np.ndarray, n: int) -> np.ndarray:
    """Apply one gate to state vectors stored along axis 0."""
    dim = 1 << n
    idx = np.arange(dim)
    name = g[0]
    if name == "CNOT":
        c, t = g[1], g[2]
        return vecs[idx ^ (((idx >> c) & 1) << t)]
    q = g[1]
    bit = (idx >> q) & 1
    if name == "X":
        return vecs[idx ^ (1 << q)]
    if name == "Z":
        f = 1 - 2 * bit
    elif name == "S":
        f = np.where(bit == 1, 1j, 1)
    else:
        shape = vecs.shape
        v = vecs.reshape((dim >> (q + 1), 2, 1 << q) + shape[1:])
        out = np.empty_like(v, dtype=complex)
        out[:, 0] = (v[:, 0] + v[:, 1]) / np.sqrt(2)
        out[:, 1] = (v[:, 0] - v[:, 1]) / np.sqrt(2)
        return out.reshape(shape)
    return f.reshape((dim,) + (1,) * (vecs.ndim - 1)) * vecs


def apply_circuit(c: CliffordCircuit, vecs: np.ndarray) -> np.ndarray:
    check_dense(c.n)
    out = np.asarray(vecs, dtype=complex)
    for g in c.gates:
        out = apply_gate_dense(g, out, c.n)
    return out


def circuit_unitary(c: CliffordCircuit) -> np.ndarray:
    return apply_circuit(c, np.eye(1 << c.n, dtype=complex))


def conjugate_density(c: CliffordCircuit, rho: np.ndarray) -> np.ndarray:
    """U rho U^dagger."""
    half = apply_circuit(c, rho)
    return apply_circuit(c, half.conj().T).conj().T


# synthesis ----------------------------------------------------------------

def _resolve_targets(target, d: int, n: int) -> list[int]:
    if target == "last":
        return list(range(n - d, n))
    if target == "first":
        return list(range(d))
    qs = [int(q) for q in target]
    if len(qs) != d or len(set(qs)) != d or any(not 0 <= q < n for q in qs):
        raise ValueError("target qubits must be d distinct indices")
    return qs


def synthesize_clifford(vectors: Iterable, n: int | None = None, target="last") -> CliffordCircuit:
    """Circuit C whose conjugation maps span(vectors) onto Z strings on target qubits.

    `target` is "last" (qubits n-d..n-1, the trailing block of the packed
    layout), "first" (qubits 0..d-1) or an explicit list of d qubits. Raises
    AnticommutingError if the span is not isotropic.
    """
    vectors = list(vectors)
    if n is None:
        if not vectors or not isinstance(vectors[0], BitVec):
            raise ValueError("n required")
        n = vectors[0].length // 2
    raw = [v.value if isinstance(v, BitVec) else int(v) for v in vectors]
    pair = find_anticommuting_pair(raw, n)
    if pair is not None:
        raise AnticommutingError(*pair, n)
    cur = list(row_reduce(raw, 2 * n).rows)
    targets = _resolve_targets(target, len(cur), n)
    gates: list[tuple] = []

    def push(g):
        gates.append(g)
        for i in range(len(cur)):
            cur[i] = conjugate_by_gate(g, cur[i], 0, n)[0]

    done: list[int] = []
    for k, q in enumerate(targets):
        v = cur[k]
        for p in done:
            if (v >> (n + p)) & 1:
                v ^= 1 << (n + p)
        cur[k] = v
        free = [j for j in range(n) if j not in done]
        for j in free:
            a, b = (v >> j) & 1, (v >> (n + j)) & 1
            if b:
                push(("S", j) if a else ("H", j))
        v = cur[k] & ~sum(1 << (n + p) for p in done)
        support = [j for j in free if (v >> j) & 1]
        if q not in support:
            push(("CNOT", support[0], q))
        for j in support:
            if j != q:
                push(("CNOT", q, j))
        push(("H", q))
        done.append(q)
    return CliffordCircuit(n, tuple(gates))


def clifford_to_z0(p: SignedPauli) -> CliffordCircuit:
    """Circuit V with V p V^dagger = +Z on qubit 0."""
    if p.x == 0:
        raise ValueError("identity cannot be rotated to Z")
    c = synthesize_clifford([p.x], p.n, target=[0])
    img = c.tableau().act(p)
    if img.sign == -1:
        c = c.then(CliffordCircuit(p.n, (("X", 0),)))
    return c


# uniform sampling -----------------------------------------------------------

def _sweep_pair(P: int, Q: int, i: int, n: int) -> list[tuple]:
    """Gates on qubits i..n-1 taking (P, Q) to (X_i, Z_i) up to signs."""
    gates: list[tuple] = []

    def push(g):
        nonlocal P, Q
        gates.append(g)
        P = conjugate_by_gate(g, P, 0, n)[0]
        Q = conjugate_by_gate(g, Q, 0, n)[0]

    for j in range(i, n):
        if (P >> (n + j)) & 1:
            push(("S", j) if (P >> j) & 1 else ("H", j))
    support = [j for j in range(i, n) if (P >> j) & 1]
    while len(support) > 1:
        nxt = []
        for a, b in zip(support[::2], support[1::2]):
            push(("CNOT", a, b))
            nxt.append(a)
        if len(support) % 2:
            nxt.append(support[-1])
        support = nxt
    p = support[0]
    if p != i:
        push(("CNOT", p, i))
        push(("CNOT", i, p))
        push(("CNOT", p, i))
    if Q != (1 << (n + i)):
        push(("H", i))
        for j in range(i + 1, n):
            if (Q >> (n + j)) & 1:
                push(("S", j) if (Q >> j) & 1 else ("H", j))
        if (Q >> (n + i)) & 1:
            push(("S", i))
        for j in range(i + 1, n):
            if (Q >> j) & 1:
                push(("CNOT", i, j))
        push(("H", i))
    return gates


def random_clifford(n: int, rng: np.random.Generator) -> CliffordCircuit:
    """Uniformly random n-qubit Clifford (modulo global phase).

    Qubit by qubit, a uniformly random anticommuting pair on the remaining
    qubits is swept onto (X_i, Z_i); a uniformly random Pauli layer fixes the
    signs. The inverse of the sweep circuit is returned.
    """
    gates: list[tuple] = []
    for i in range(n):
        m = n - i
        while True:
            pa = int(rng.integers(0, 1 << m))
            pb = int(rng.integers(0, 1 << m))
            if pa or pb:
                break
        P = (pa << i) | (pb << (n + i))
        while True:
            qa = int(rng.integers(0, 1 << m))
            qb = int(rng.integers(0, 1 << m))
            Q = (qa << i) | (qb << (n + i))
            if parity(P & swap_halves(Q, n)):
                break
        gates.extend(_sweep_pair(P, Q, i, n))
    sweep = CliffordCircuit(n, tuple(gates)).inverse()
    layer = []
    for q in range(n):
        if rng.integers(2):
            layer.append(("X", q))
        if rng.integers(2):
            layer.append(("Z", q))
    return sweep.then(CliffordCircuit(n, tuple(layer)))
