"""Statistical subroutines shared by the learners.

Every estimator touches the state only through a CopyOracle and returns
values clamped into their valid ranges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import dense
from .bruteforce import ENUM_LIMIT, enumerate_stabilizer_states
from .clifford import CliffordCircuit, random_clifford
from .dense import DensityMatrix, fwht, symplectic_fourier
from .f2 import BitVec
from .oracle import CopyOracle
from .pauli import weyl_phase_array
from .stabilizer import StabilizerState


class PreparationFailed(RuntimeError):
    """Not enough conditioned copies could be prepared within budget."""


@dataclass(frozen=True)
class CorrelationEstimate:
    x: int
    value: float


def _as_int(x) -> int:
    return x.value if isinstance(x, BitVec) else int(x)


def bell_count(m_targets: int, eps: float, delta: float) -> int:
    return math.ceil(2 * math.log(2 * m_targets / delta) / eps ** 2)


def _sign_ab(xs: np.ndarray, n: int) -> np.ndarray:
    xs = xs.astype(np.uint64)
    mask = np.uint64((1 << n) - 1)
    return 1 - 2 * (np.bitwise_count((xs & mask) & (xs >> np.uint64(n))) & 1).astype(np.int64)


def correlations_from_bell_histogram(hist: np.ndarray, n: int) -> np.ndarray:
    """Mean of (-1)^{<x_i,y> + a.b} over Bell outcomes, for every string y."""
    m = hist.sum()
    y = np.arange(1 << (2 * n), dtype=np.uint64)
    return symplectic_fourier(hist.astype(np.float64), n) * _sign_ab(y, n) / m


def estimate_correlations(o: CopyOracle, strings: Sequence, eps: float, delta: float) -> list[CorrelationEstimate]:
    """Estimate tr(W_y rho)^2 for each y from Bell-basis measurements on copy pairs."""
    ys = [_as_int(y) for y in strings]
    if not ys:
        raise ValueError("need at least one string")
    distinct = sorted(set(ys))
    m = bell_count(len(distinct), eps, delta)
    hist = o.bell_measurement_histogram(m)
    n = o.n
    if len(distinct) > (1 << (2 * n)) // 64:
        table = correlations_from_bell_histogram(hist, n)
        vals = table[np.array(ys, dtype=np.int64)]
    else:
        xs = np.nonzero(hist)[0].astype(np.uint64)
        w = hist[xs.astype(np.int64)].astype(np.float64)
        arr = np.array(ys, dtype=np.uint64)
        mask = np.uint64((1 << n) - 1)
        sh = np.uint64(n)
        sy = (arr >> sh) | ((arr & mask) << sh)
        par = np.bitwise_count(xs[None, :] & sy[:, None]) & 1
        vals = ((1 - 2 * par.astype(np.float64)) @ w) * _sign_ab(arr, n) / m
    vals = np.clip(vals, 0.0, 1.0)
    return [CorrelationEstimate(y, float(v)) for y, v in zip(ys, vals)]


def estimate_all_correlations(o: CopyOracle, eps: float, delta: float) -> np.ndarray:
    """Estimates for all 4^n strings at once (union bound over all of them)."""
    n = o.n
    m = bell_count(1 << (2 * n), eps, delta)
    hist = o.bell_measurement_histogram(m)
    return np.clip(correlations_from_bell_histogram(hist, n), 0.0, 1.0)


# classical shadows --------------------------------------------------------------

def shadow_group_sizes(m_targets: int, eps: float, delta: float) -> tuple[int, int]:
    """(groups, snapshots per group) for median of means.

    A single snapshot of a stabilizer-target fidelity has variance at most 3,
    so a group of ceil(12/eps^2) misses by more than eps with probability at
    most 1/4; ceil(8 ln(M/delta)) groups push the median's failure below delta/M.
    """
    k = max(1, math.ceil(8 * math.log(m_targets / delta)))
    return k, math.ceil(12 / eps ** 2)


def _median_of_means(group_means: np.ndarray) -> np.ndarray:
    return np.median(group_means, axis=0)


def random_lagrangians(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random Lagrangian subspaces as (count, n) generator rows.

    Generator i is drawn uniformly among the nonzero strings commuting with
    generators 0..i-1, and rows whose generators turn out dependent are
    redrawn. Given independence so far, the number of choices at every step
    does not depend on the history, so every ordered basis, and hence every
    Lagrangian, is equally likely among accepted rows.
    """
    gens = np.zeros((count, n), dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    sh = np.uint64(n)
    todo_rows = np.arange(count)
    while len(todo_rows):
        g = np.zeros((len(todo_rows), n), dtype=np.uint64)
        for i in range(n):
            # a uniform string commutes with i independent ones w.p. about 2^-i
            width = 2 << i
            todo = np.arange(len(todo_rows))
            while len(todo):
                cand = rng.integers(1, 1 << (2 * n), size=(len(todo), width), dtype=np.uint64)
                swapped = (cand >> sh) | ((cand & mask) << sh)
                ok = np.ones(cand.shape, dtype=bool)
                for j in range(i):
                    ok &= (np.bitwise_count(g[todo, j][:, None] & swapped) & 1) == 0
                hit = ok.any(axis=1)
                first = np.argmax(ok, axis=1)
                g[todo[hit], i] = cand[hit, first[hit]]
                todo = todo[~hit]
        xs = np.zeros((len(g), 1), dtype=np.uint64)
        for i in range(n):
            xs = np.concatenate([xs, xs ^ g[:, i:i + 1]], axis=1)
        good = ~(xs[:, 1:] == 0).any(axis=1)
        gens[todo_rows[good]] = g[good]
        todo_rows = todo_rows[~good]
    return gens


def _group_batch(gens: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    k, d = gens.shape
    xs = np.zeros((k, 1), dtype=np.uint64)
    sg = np.ones((k, 1), dtype=np.int64)
    for i in range(d):
        g = gens[:, i:i + 1]
        e = weyl_phase_array(xs, np.broadcast_to(g, xs.shape), n)
        xs = np.concatenate([xs, xs ^ g], axis=1)
        sg = np.concatenate([sg, sg * (1 - e)], axis=1)
    return xs, sg


def _snapshot_values_lagrangian(o: CopyOracle, tables: np.ndarray, count: int,
                                batch: int = 2048) -> np.ndarray:
    """(count, M) snapshot values (2^n + 1) |<phi_m|psi>|^2 - 1 via random Lagrangians."""
    n = o.n
    dim = 1 << n
    out = np.empty((count, len(tables)))
    done = 0
    while done < count:
        b = min(batch, count - done)
        gens = random_lagrangians(b, n, o.rng)
        xs, sg = _group_batch(gens, n)
        s = o.stabilizer_basis_outcomes(xs, sg)
        j = np.arange(dim, dtype=np.uint64)
        chars = 1 - 2 * (np.bitwise_count(j[None, :] & s.astype(np.uint64)[:, None]) & 1).astype(np.int64)
        coef = chars * sg  # (b, dim)
        # tr(|phi><phi| P_s) = 2^-n sum_j (-1)^{s.j} eps_j tr(W_{x_j} |phi><phi|)
        t = tables[:, xs.astype(np.int64)]  # (M, b, dim)
        ov = np.einsum("mbj,bj->bm", t, coef) / dim
        out[done:done + b] = (dim + 1) * ov - 1
        done += b
    return out


def _snapshot_values_circuit(o: CopyOracle, vectors: np.ndarray, count: int) -> np.ndarray:
    """Reference path: explicit random Clifford circuit, then a computational measurement."""
    from .clifford import circuit_unitary
    n = o.n
    dim = 1 << n
    out = np.empty((count, len(vectors)))
    for r in range(count):
        c = random_clifford(n, o.rng)
        s = o.clifford_snapshot(c)
        psi = circuit_unitary(c).conj().T[:, s]
        out[r] = (dim + 1) * np.abs(vectors.conj() @ psi) ** 2 - 1
    return out


def shadow_fidelities(o: CopyOracle, targets: Sequence[StabilizerState], eps: float, delta: float,
                      method: str = "auto") -> np.ndarray:
    """Estimate <phi|rho|phi> for stabilizer targets from random-Clifford snapshots.

    method "enumerated" samples the snapshot law over all stabilizer states
    (n <= 4), "lagrangian" draws random Lagrangian eigenbasis measurements and
    "circuit" builds explicit random Clifford circuits. The three have the same
    outcome law.
    """
    targets = list(targets)
    if not targets:
        return np.zeros(0)
    n = o.n
    k, per = shadow_group_sizes(len(targets), eps, delta)
    if method == "auto":
        method = "enumerated" if n <= ENUM_LIMIT else "lagrangian"
    dim = 1 << n
    if method == "enumerated":
        e = enumerate_stabilizer_states(n)
        tv = np.array([t.vector() for t in targets])
        gram = np.abs(e.vectors.conj() @ tv.T) ** 2  # (states, M)
        hist = o.shadow_histograms(e.vectors, k, per)  # (k, states)
        means = ((dim + 1) * (hist @ gram) / per) - 1
    elif method == "lagrangian":
        tables = np.array([t.expectation_table() for t in targets])
        vals = _snapshot_values_lagrangian(o, tables, k * per)
        means = vals.reshape(k, per, -1).mean(axis=1)
    elif method == "circuit":
        tv = np.array([t.vector() for t in targets])
        vals = _snapshot_values_circuit(o, tv, k * per)
        means = vals.reshape(k, per, -1).mean(axis=1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.clip(_median_of_means(means), 0.0, 1.0)


def block_targets(c: CliffordCircuit, t: int) -> list[StabilizerState]:
    """States C^dagger |0^{n-t} s>, s over all t-bit strings."""
    n = c.n
    return [StabilizerState.from_circuit(c, s << (n - t)) for s in range(1 << t)]


def shadow_block_fidelities(o: CopyOracle, cliffords: Sequence[CliffordCircuit], t: int,
                            eps: float, delta: float, method: str = "auto") -> np.ndarray:
    """Estimate tr <0^{n-t}| C rho C^dagger |0^{n-t}> for each C as a sum of 2^t fidelities."""
    if t >= o.n and cliffords:
        return np.ones(len(cliffords))
    targets = [s for c in cliffords for s in block_targets(c, t)]
    f = shadow_fidelities(o, targets, eps / (1 << t), delta, method)
    return np.clip(f.reshape(len(cliffords), 1 << t).sum(axis=1), 0.0, 1.0)


# local tomography ---------------------------------------------------------------

_PAULI_2 = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def bloch_vector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.array([np.vdot(v, _PAULI_2[p] @ v).real for p in "XYZ"])


def local_bloch_estimates(o: CopyOracle, eps: float, delta: float) -> np.ndarray:
    """(n, 3) estimates of the single-qubit Bloch vectors.

    Each of the three all-X / all-Y / all-Z settings is measured
    ceil(9/(2 eps^2) ln(6n/delta)) times, enough for every coordinate to be
    within 2 eps / 3 with probability 1 - delta.
    """
    n = o.n
    reps = math.ceil(9 / (2 * eps ** 2) * math.log(6 * n / delta))
    out = np.empty((n, 3))
    bits = np.arange(1 << n)
    for col, p in enumerate("XYZ"):
        hist = o.measure_pauli_setting(p * n, reps, histogram=True)
        for j in range(n):
            minus = hist[((bits >> j) & 1) == 1].sum()
            out[j, col] = 1 - 2 * minus / reps
    return out


def local_fidelities(o: CopyOracle, states: Sequence, eps: float, delta: float) -> np.ndarray:
    """(|K|, n) table of estimated <phi_i| tr_{-j} rho |phi_i>."""
    r = local_bloch_estimates(o, eps, delta)
    u = np.array([bloch_vector(v) for v in states])
    return np.clip((1 + u @ r.T) / 2, 0.0, 1.0)


def product_fidelities(o: CopyOracle, candidates: Sequence[Sequence], eps: float, delta: float) -> np.ndarray:
    """Estimate <phi|rho|phi> for product candidates by measuring in their product bases.

    Each candidate gets ceil(2 ln(4M/delta)/eps^2) shots; the estimate is the
    frequency of the all-accept outcome.
    """
    m = math.ceil(2 * math.log(4 * len(candidates) / delta) / eps ** 2)
    out = np.empty(len(candidates))
    for i, vecs in enumerate(candidates):
        hist = o.measure_local_states(vecs, m, histogram=True)
        out[i] = hist[0] / m
    return out


# full tomography ------------------------------------------------------------------

def _setting_of(x: int, m: int) -> str:
    """Pauli-basis setting that measures W_x: its letters, with I replaced by Z."""
    out = []
    for j in range(m):
        a, b = (x >> j) & 1, (x >> (m + j)) & 1
        out.append("XZY"[a + 2 * b - 1] if (a or b) else "Z")
    return "".join(out)


def tomography_shots(m: int, eps: float, delta: float) -> int:
    eta = eps / 2 ** (m - 1)
    return math.ceil(2 * math.log(2 * 4 ** m / delta) / eta ** 2)


def full_tomography(o: CopyOracle, eps: float, delta: float) -> DensityMatrix:
    """Pauli-expectation tomography with trace-distance error eps w.p. 1 - delta.

    Each tr(W_x rho) is read off the setting that measures all of x's letters,
    to accuracy eps / 2^{m-1}; the estimate is projected onto density matrices.
    """
    m = o.n
    if m == 0:
        return DensityMatrix(0, np.ones((1, 1)))
    shots = tomography_shots(m, eps, delta)
    c = np.zeros(1 << (2 * m))
    c[0] = 1.0
    mask = (1 << m) - 1
    settings: dict[str, list[int]] = {}
    for x in range(1, 1 << (2 * m)):
        settings.setdefault(_setting_of(x, m), []).append(x)
    for setting, xs in sorted(settings.items()):
        hist = o.measure_pauli_setting(setting, shots, histogram=True)
        w = fwht(hist.astype(np.float64)) / shots
        for x in xs:
            c[x] = w[(x | (x >> m)) & mask]
    rho = dense.from_expectations(c, m)
    return DensityMatrix(m, dense.psd_project(rho))


def block_tomography_given_clifford(o: CopyOracle, c: CliffordCircuit, t: int, tau: float,
                                    eps: float, delta: float) -> DensityMatrix:
    """State of the last t qubits of C rho C^dagger after reading 0 on the others."""
    n = o.n
    view = o.condition_prefix(c, n - t)
    need = (3 ** t) * tomography_shots(t, eps / 2, delta / 2) if t else 0
    if not view.prepare(need, tau, delta / 2):
        raise PreparationFailed("conditioning on the zero prefix accepted too rarely")
    return full_tomography(view, eps / 2, delta / 2)
