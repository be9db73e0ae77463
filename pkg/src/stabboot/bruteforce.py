"""Exhaustive ground truth: stabilizer enumeration and best-in-class fidelities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dense
from .dense import fwht
from .pauli import SignedPauli, weyl_matrix, weyl_phase_array
from .stabilizer import StabilizerState

ENUM_LIMIT = 4


def _popcount_parity(a: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(a) & 1).astype(np.int64)


def rref_subspaces(d: int, length: int) -> np.ndarray:
    """Every d-dim subspace of F2^length as its canonical echelon rows (shape k x d).

    Pivot of a row is its lowest set bit; rows are sorted by pivot and every
    pivot column is zero in the other rows.
    """
    out = []
    for pivots in itertools.combinations(range(length), d):
        pivset = set(pivots)
        free = []  # (row, bit) positions that may be set
        for i, p in enumerate(pivots):
            free += [(i, b) for b in range(p + 1, length) if b not in pivset]
        count = 1 << len(free)
        rows = np.zeros((count, d), dtype=np.uint64)
        for i, p in enumerate(pivots):
            rows[:, i] = np.uint64(1 << p)
        combo = np.arange(count, dtype=np.uint64)
        for k, (i, b) in enumerate(free):
            bit = (combo >> np.uint64(k)) & np.uint64(1)
            rows[:, i] |= bit << np.uint64(b)
        out.append(rows)
    if not out:
        return np.zeros((1, 0), dtype=np.uint64)
    return np.concatenate(out)


def isotropic_subspaces(d: int, n: int) -> np.ndarray:
    """Echelon bases of every isotropic d-dim subspace of F2^{2n}."""
    rows = rref_subspaces(d, 2 * n)
    mask = np.uint64((1 << n) - 1)
    sh = np.uint64(n)
    swapped = (rows >> sh) | ((rows & mask) << sh)
    ok = np.ones(len(rows), dtype=bool)
    for i in range(d):
        for j in range(i + 1, d):
            ok &= _popcount_parity(rows[:, i] & swapped[:, j]) == 0
    return rows[ok]


def _group_tables(gens: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Group strings and signs (all generators +) for a batch of generator rows.

    gens has shape (k, d); the result has shape (k, 2^d) in combination order.
    """
    k, d = gens.shape
    xs = np.zeros((k, 1), dtype=np.uint64)
    sg = np.ones((k, 1), dtype=np.int64)
    for i in range(d):
        g = gens[:, i:i + 1]
        e = weyl_phase_array(xs, np.broadcast_to(g, xs.shape), n)
        xs = np.concatenate([xs, xs ^ g], axis=1)
        sg = np.concatenate([sg, sg * (1 - e)], axis=1)  # e in {0, 2}
    return xs, sg


def key_order(rows: np.ndarray, n: int) -> np.ndarray:
    """Permutation sorting echelon row tuples by canonical-key bytes."""
    width = (2 * n + 7) // 8
    keys = [b"".join(int(v).to_bytes(width, "little") for v in r) for r in rows]
    return np.array(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.int64)


@dataclass
class StabilizerEnumeration:
    n: int
    rows: np.ndarray  # (L, n) echelon generators of each Lagrangian
    strings: np.ndarray  # (L, 2^n) group elements
    signs: np.ndarray  # (L, 2^n) signs with all generators +
    vectors: np.ndarray  # (L * 2^n, 2^n) state vectors; index = lag * 2^n + s

    def __len__(self) -> int:
        return len(self.vectors)

    def state(self, i: int) -> StabilizerState:
        lag, s = divmod(int(i), 1 << self.n)
        gens = tuple(SignedPauli(-1 if (s >> k) & 1 else 1, int(x), self.n)
                     for k, x in enumerate(self.rows[lag]))
        return StabilizerState(self.n, gens)

    def states(self) -> list[StabilizerState]:
        return [self.state(i) for i in range(len(self))]

    def fidelities(self, rho) -> np.ndarray:
        d = dense._as_array(rho)
        v = self.vectors
        if d.ndim == 1:
            return np.abs(v.conj() @ d) ** 2
        return np.einsum("ki,ij,kj->k", v.conj(), d, v).real

    def index_of(self, s: StabilizerState) -> int:
        rows = [g.x for g in s.canonical()]
        signs = sum(1 << k for k, g in enumerate(s.canonical()) if g.sign == -1)
        hit = np.nonzero((self.rows == np.array(rows, dtype=np.uint64)).all(axis=1))[0]
        return int(hit[0]) * (1 << self.n) + signs


@lru_cache(maxsize=None)
def enumerate_stabilizer_states(n: int) -> StabilizerEnumeration:
    """All stabilizer states on n <= 4 qubits, ordered by canonical key."""
    if not 1 <= n <= ENUM_LIMIT:
        raise ValueError(f"enumeration supports 1 <= n <= {ENUM_LIMIT}")
    rows = isotropic_subspaces(n, n)
    rows = rows[key_order(rows, n)]
    strings, signs = _group_tables(rows, n)
    dim = 1 << n
    mats = np.stack([weyl_matrix(x, n) for x in range(dim * dim)])
    vecs = np.empty((len(rows) * dim, dim), dtype=complex)
    for lag in range(len(rows)):
        terms = signs[lag][:, None, None] * mats[strings[lag].astype(np.int64)]
        projs = fwht(terms) / dim  # projs[s] is the projector with sign pattern s
        for s in range(dim):
            col = projs[s][:, int(np.argmax(np.linalg.norm(projs[s], axis=0)))]
            col = col / np.linalg.norm(col)
            i = int(np.argmax(np.abs(col) > 1e-9))
            vecs[lag * dim + s] = col * (abs(col[i]) / col[i])
    vecs.setflags(write=False)
    return StabilizerEnumeration(n, rows, strings, signs, vecs)


def stabilizer_count(n: int) -> int:
    out = 1 << n
    for k in range(1, n + 1):
        out *= (1 << k) + 1
    return out


# single-qubit stabilizer states |0>, |1>, |+>, |->, |+i>, |-i>
SINGLE_QUBIT_STABILIZERS = np.array([
    [1, 0], [0, 1],
    [1, 1], [1, -1],
    [1, 1j], [1, -1j],
], dtype=complex) / np.array([[1], [1], [np.sqrt(2)], [np.sqrt(2)], [np.sqrt(2)], [np.sqrt(2)]])


def product_vector(vecs) -> np.ndarray:
    """Tensor product with vecs[j] on qubit j (little-endian index)."""
    out = np.ones(1, dtype=complex)
    for v in vecs:
        out = np.kron(np.asarray(v, dtype=complex), out)
    return out


def best_stabilizer(rho) -> tuple[float, StabilizerState]:
    d = dense._as_array(rho)
    n = d.shape[0].bit_length() - 1
    e = enumerate_stabilizer_states(n)
    f = e.fidelities(d)
    i = int(np.argmax(f))
    return float(f[i]), e.state(i)


def best_product(rho, k_states=SINGLE_QUBIT_STABILIZERS, limit: int = 10 ** 7) -> tuple[float, tuple[int, ...]]:
    """Exhaustive max of <phi|rho|phi> over products of the given single-qubit states."""
    d = dense._as_array(rho)
    n = d.shape[0].bit_length() - 1
    k = len(k_states)
    if k ** n * (1 << n) > limit:
        raise ValueError("product class too large for exhaustive search")
    vecs = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        # the new qubit is the most significant bit; combination index = old * k + new
        vecs = np.einsum("qa,pb->pqab", np.asarray(k_states), vecs).reshape(-1, 2 * vecs.shape[1])
    if d.ndim == 1:
        f = np.abs(vecs.conj() @ d) ** 2
    else:
        f = np.einsum("ki,ij,kj->k", vecs.conj(), d, vecs).real
    i = int(np.argmax(f))
    return float(f[i]), _digits(i, k, n)


def _digits(i: int, k: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        i, r = divmod(i, k)
        out.append(r)
    return tuple(reversed(out))


def best_high_dimension(rho, t: int) -> tuple[float, tuple]:
    """Max fidelity with states of stabilizer dimension >= n - t.

    For a signed isotropic group G of dimension n - t the best state stabilized
    by it has fidelity tr(P_G rho) (take the normalized projected block), so the
    maximum runs over groups and signs only.
    """
    d = dense._as_array(rho)
    if d.ndim == 1:
        d = np.outer(d, d.conj())
    n = d.shape[0].bit_length() - 1
    k = n - t
    if k <= 0:
        return 1.0, ((), 0)
    c = dense.pauli_expectations(d)
    rows = isotropic_subspaces(k, n)
    strings, signs = _group_tables(rows, n)
    vals = fwht((signs * c[strings.astype(np.int64)]).T).T / (1 << k)
    best = np.unravel_index(int(np.argmax(vals)), vals.shape)
    lag, s = int(best[0]), int(best[1])
    return float(vals[lag, s]), (tuple(int(x) for x in rows[lag]), s)


def class_fidelity(rho, cls: str, **kw) -> tuple[float, object]:
    if cls == "S":
        return best_stabilizer(rho)
    if cls == "SP":
        return best_product(rho)
    if cls == "K":
        return best_product(rho, kw["states"])
    if cls == "Snt":
        return best_high_dimension(rho, kw["t"])
    raise ValueError(f"unknown class {cls!r}")


def nearest_neighbors(s: StabilizerState) -> list[StabilizerState]:
    """Stabilizer states with overlap exactly 1/2 with s (n <= 4)."""
    e = enumerate_stabilizer_states(s.n)
    f = e.fidelities(s.vector())
    return [e.state(i) for i in np.nonzero(np.isclose(f, 0.5))[0]]


def neighbor_form(s: StabilizerState, x: int, ell: int) -> np.ndarray:
    """(I + i^ell W_x)|s> / sqrt(2)."""
    v = s.vector()
    w = weyl_matrix(x, s.n) @ v
    return (v + (1j ** ell) * w) / np.sqrt(2)


def is_local_maximizer(rho, s: StabilizerState, gamma: float) -> bool:
    """Fidelity of s is at least gamma times that of every nearest neighbor."""
    d = dense._as_array(rho)
    f0 = dense.exact_fidelity(d, s.vector())
    e = enumerate_stabilizer_states(s.n)
    nb = np.isclose(e.fidelities(s.vector()), 0.5)
    return bool(np.all(f0 >= gamma * e.fidelities(d)[nb] - 1e-12))

