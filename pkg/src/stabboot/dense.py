"""Dense density matrices and the exact quantities computed from them.

Pauli-indexed tables have length 4^n with string x = a + (b << n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import CapacityError, check_dense

BELL_TABLE_LIMIT = 6


def _as_array(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _as_density(rho) -> np.ndarray:
    """Matrix form; a state vector becomes its projector."""
    d = _as_array(rho)
    return np.outer(d, d.conj()) if d.ndim == 1 else d


def _nqubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n: int
    data: np.ndarray

    def __post_init__(self):
        check_dense(self.n)
        d = np.array(self.data, dtype=complex)
        if d.shape != (1 << self.n, 1 << self.n):
            raise ValueError(f"expected a {1 << self.n}x{1 << self.n} array")
        if not np.allclose(d, d.conj().T, atol=1e-10):
            raise ValueError("not Hermitian")
        d = (d + d.conj().T) / 2
        tr = np.trace(d).real
        if abs(tr - 1) > 1e-10:
            raise ValueError(f"trace {tr} != 1")
        w, v = np.linalg.eigh(d)
        if w.min() < -1e-9:
            raise ValueError(f"not PSD (min eigenvalue {w.min():.3g})")
        if w.min() < 0:
            w = np.clip(w, 0, None)
            w /= w.sum()
            d = (v * w) @ v.conj().T
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def from_vector(cls, psi) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(_nqubits(len(psi)), np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> DensityMatrix:
        return cls(n, np.eye(1 << n) / (1 << n))

    @classmethod
    def mix(cls, parts) -> DensityMatrix:
        """Convex combination of (weight, state-or-vector) pairs."""
        total = None
        for w, s in parts:
            m = cls.from_vector(s).data if np.ndim(s) == 1 else _as_array(s)
            total = w * m if total is None else total + w * m
        return cls(_nqubits(len(total)), total)

    def to_json(self) -> dict:
        return {"n": self.n, "re": self.data.real.tolist(), "im": self.data.imag.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> DensityMatrix:
        return cls(int(obj["n"]), np.array(obj["re"]) + 1j * np.array(obj["im"]))


# transforms ----------------------------------------------------------------

def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along axis 0 (length a power of two)."""
    a = np.array(a, dtype=np.result_type(a, np.float64))
    n = a.shape[0]
    rest = a.shape[1:]
    h = 1
    while h < n:
        v = a.reshape((n // (2 * h), 2, h) + rest)
        x, y = v[:, 0].copy(), v[:, 1]
        v[:, 0] += y
        v[:, 1] = x - y
        h *= 2
    return a


def symplectic_fourier(f: np.ndarray, n: int) -> np.ndarray:
    """g(x) = sum_a (-1)^{<x,a>} f(a) over F2^{2n}."""
    w = fwht(f)
    idx = np.arange(1 << (2 * n), dtype=np.int64)
    mask = (1 << n) - 1
    swapped = (idx >> n) | ((idx & mask) << n)
    return w[swapped]


# exact quantities ------------------------------------------------------------

def pauli_expectations(rho) -> np.ndarray:
    """tr(W_x rho) for all 4^n strings (real)."""
    d = _as_density(rho)
    dim = d.shape[0]
    n = _nqubits(dim)
    k = np.arange(dim)
    # g[a, k] = rho[k, k ^ a]; transform over k gives the sum with (-1)^{b.k}
    g = d[k[None, :], k[None, :] ^ k[:, None]]
    w = fwht(g.T).T  # w[a, b]
    ab = np.bitwise_count((k[:, None] & k[None, :]).astype(np.uint64)).astype(np.int64) % 4
    vals = (1j ** ab) * w
    # flatten so that index = a + (b << n)
    return np.ascontiguousarray(vals.real.T).reshape(-1)


def exact_weyl_expectation(rho, x) -> float:
    from .pauli import apply_weyl
    d = _as_density(rho)
    n = _nqubits(d.shape[0])
    x = x.value if hasattr(x, "value") else int(x)
    return float(np.trace(apply_weyl(x, n, d)).real)


def exact_fidelity(rho, sigma) -> float:
    """<psi|rho|psi> when either side is a vector, Uhlmann fidelity otherwise."""
    a = _as_array(rho)
    b = _as_array(sigma)
    if a.ndim == 1 and b.ndim == 1:
        return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))
    if b.ndim == 1:
        a, b = b, a
    if a.ndim == 1:
        a = a / np.linalg.norm(a)
        return float(np.clip(np.vdot(a, b @ a).real, 0, 1))
    w, v = np.linalg.eigh(a)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = sq @ b @ sq
    ev = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0, None)
    return float(min(1.0, np.sqrt(ev).sum() ** 2))


def trace_distance(rho, sigma) -> float:
    diff = _as_array(rho) - _as_array(sigma)
    return float(0.5 * np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def exact_bell_distribution(rho, limit: int = BELL_TABLE_LIMIT) -> np.ndarray:
    """Bell-difference distribution B(x) = 4^-n sum_a (-1)^{<x,a>} tr(W_a rho)^4."""
    d = _as_density(rho)
    n = _nqubits(d.shape[0])
    if n > limit:
        raise CapacityError(f"n={n} exceeds Bell table limit {limit}")
    c = pauli_expectations(d)
    b = symplectic_fourier(c ** 4, n) / (1 << (2 * n))
    b = np.clip(b, 0, None)
    return b / b.sum()


def bell_measurement_distribution(rho) -> np.ndarray:
    """Outcome law of a Bell-basis measurement on two copies of rho.

    P(x) = 4^-n sum_y (-1)^{<x,y> + a_y.b_y} tr(W_y rho)^2.
    """
    d = _as_density(rho)
    n = _nqubits(d.shape[0])
    c = pauli_expectations(d)
    y = np.arange(1 << (2 * n), dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    sgn = 1 - 2 * (np.bitwise_count((y & mask) & (y >> np.uint64(n))) & 1).astype(np.int64)
    p = symplectic_fourier(sgn * c ** 2, n) / (1 << (2 * n))
    p = np.clip(p, 0, None)
    return p / p.sum()


def reduced_state(rho, keep) -> np.ndarray:
    """Partial trace onto the listed qubits (a single int keeps one qubit)."""
    d = _as_density(rho)
    n = _nqubits(d.shape[0])
    keep = [keep] if np.isscalar(keep) else list(keep)
    # tensor axes: qubit j sits at axis n-1-j in C order
    t = d.reshape([2] * (2 * n))
    traced = [q for q in range(n) if q not in keep]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[i] for i in range(n)]
    col = [letters[n + i] for i in range(n)]
    for q in traced:
        col[n - 1 - q] = row[n - 1 - q]
    out_q = sorted(keep, reverse=True)
    out = "".join(row[n - 1 - q] for q in out_q) + "".join(col[n - 1 - q] for q in out_q)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    k = len(keep)
    return r.reshape(1 << k, 1 << k)


def postselect_prefix(rho, k: int, bits: int = 0) -> np.ndarray:
    """<bits| rho |bits> on qubits 0..k-1, remaining qubits shifted down (unnormalized)."""
    d = _as_density(rho)
    dim = d.shape[0]
    idx = (np.arange(dim >> k) << k) | bits
    return d[np.ix_(idx, idx)]


def block_weight(rho, k: int) -> float:
    """tr <0^k| rho |0^k> over qubits 0..k-1."""
    d = _as_density(rho)
    return float(np.trace(postselect_prefix(d, k)).real)


def embed_block(sigma0, n: int) -> np.ndarray:
    """|0^{n-t}><0^{n-t}| on qubits 0..n-t-1 tensored with sigma0 on the rest."""
    s = _as_array(sigma0)
    t = _nqubits(s.shape[0])
    k = n - t
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    idx = np.arange(1 << t) << k
    out[np.ix_(idx, idx)] = s
    return out


def apply_single_qubit(u: np.ndarray, q: int, vecs: np.ndarray, n: int) -> np.ndarray:
    """Apply a 2x2 matrix to qubit q of vectors stored along axis 0."""
    dim = 1 << n
    shape = vecs.shape
    v = vecs.reshape((dim >> (q + 1), 2, 1 << q) + shape[1:])
    out = np.einsum("ij,ajb...->aib...", u, v)
    return out.reshape(shape)


def product_basis_probabilities(rho, bases) -> np.ndarray:
    """Outcome law when qubit j is measured in the orthonormal basis whose rows are bases[j]."""
    d = np.array(_as_array(rho), dtype=complex)
    n = _nqubits(d.shape[0])
    for q, u in enumerate(bases):
        if u is None:
            continue
        u = np.asarray(u, dtype=complex)
        d = apply_single_qubit(u, q, d, n)
        d = apply_single_qubit(u.conj(), q, d.T, n).T
    return np.clip(np.diag(d).real, 0, None)


def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-induced random state of the given rank (full rank by default)."""
    dim = 1 << n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(n, m / np.trace(m).real)


def from_expectations(c: np.ndarray, n: int) -> np.ndarray:
    """rho = 2^-n sum_x c_x W_x (inverse of pauli_expectations)."""
    dim = 1 << n
    vals = c.reshape(dim, dim).T  # vals[a, b]
    k = np.arange(dim)
    ab = np.bitwise_count((k[:, None] & k[None, :]).astype(np.uint64)).astype(np.int64) % 4
    # w[a, k] = sum_b (-1)^{b.k} i^{a.b} c[a,b]; rho[j, j^a] uses k = j^a
    w = fwht(((1j ** ab) * vals).T).T
    rho = np.zeros((dim, dim), dtype=complex)
    j = np.arange(dim)
    for a in range(dim):
        rho[j, j ^ a] = w[a, j ^ a] / dim
    return rho


def psd_project(m: np.ndarray) -> np.ndarray:
    """Closest density matrix in Frobenius norm (eigenvalue simplex projection)."""
    h = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(h)
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, len(u) + 1)
    cond = u - (css - 1) / ks > 0
    r = ks[cond][-1]
    theta = (css[r - 1] - 1) / r
    w = np.clip(w - theta, 0, None)
    return (v * w) @ v.conj().T
