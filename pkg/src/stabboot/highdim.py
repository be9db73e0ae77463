"""Learning states of high stabilizer dimension.

The output is a Clifford C and a t-qubit state sigma0; the represented state is
C^dagger (|0^{n-t}><0^{n-t}| (x) sigma0) C, with the zero prefix on qubits
0..n-t-1 and sigma0 on the last t qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dense
from .clifford import CliffordCircuit, clifford_to_z0, conjugate_density, synthesize_clifford
from .dense import DensityMatrix
from .estimators import (PreparationFailed, bell_count, block_tomography_given_clifford,
                         estimate_all_correlations, shadow_block_fidelities)
from .f2 import Subspace, affine_span, extend_to_lagrangian, find_anticommuting_pair, orthogonal_complement, row_reduce
from .oracle import CopyOracle
from .pauli import SignedPauli
from .stab_learner import (AMPLIFICATION, _copies_for_selection, loop_length, random_sign,
                           repetitions, select_high_correlation)


@dataclass(frozen=True)
class HighDimConfig:
    t: int
    tau: float
    eps: float
    delta: float = 0.1
    p_floor: float = 1e-6
    # optional caps on the repetition counts of the three nested repeat-and-select loops
    outer_reps: int | None = None
    step2_reps: int | None = None
    exp_reps: int | None = None

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be non-negative")
        if not 0 < self.eps <= self.tau <= 1:
            raise ValueError("need 0 < eps <= tau <= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    def t_prime(self, n: int) -> int:
        return widened_nullity(self.t, self.tau, n)


def widened_nullity(t: int, tau: float, n: int) -> int:
    """ceil(2t + 2 + 4 log2(1/tau)) clipped into [t, n]."""
    tp = math.ceil(2 * t + 2 + 4 * math.log2(1 / tau) - 1e-12)
    return max(t, min(tp, n))


@dataclass
class HighDimOutput:
    clifford: CliffordCircuit
    sigma0: DensityMatrix

    @property
    def t(self) -> int:
        return self.sigma0.n

    def density(self) -> np.ndarray:
        n = self.clifford.n
        return conjugate_density(self.clifford.inverse(), dense.embed_block(self.sigma0.data, n))

    def to_json(self) -> dict:
        return {"n": self.clifford.n, "t": self.t, "clifford": self.clifford.to_json(),
                "sigma0": self.sigma0.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> HighDimOutput:
        return cls(CliffordCircuit.from_json(obj["n"], obj["clifford"]), DensityMatrix.from_json(obj["sigma0"]))


def exact_block_weight(rho, c: CliffordCircuit, t: int) -> float:
    """tr <0^{n-t}| C rho C^dagger |0^{n-t}> (dense)."""
    d = dense._as_array(rho)
    if d.ndim == 1:
        d = np.outer(d, d.conj())
    return dense.block_weight(conjugate_density(c, d), c.n - t)


def _x_layer(bits: int, k: int, n: int) -> CliffordCircuit:
    return CliffordCircuit(n, tuple(("X", q) for q in range(k) if (bits >> q) & 1))


def find_heavy_subspace(o: CopyOracle, h: Subspace, t: int, t_prime: int) -> CliffordCircuit:
    """Clifford concentrating rho on a zero prefix of length n - t', guided by the Lagrangian h.

    Uses t' + 2 copies: t' + 1 computational-basis shots in the eigenbasis of h,
    then one shot to fix the prefix signs.
    """
    n = o.n
    if not t <= t_prime <= n:
        raise ValueError("need t <= t' <= n")
    c1 = synthesize_clifford(h.rows, n, target="first")
    zs = o.measure_computational(t_prime + 1, circuit=c1)
    k = n - t_prime
    if k == 0:
        return c1
    span = affine_span([int(z) for z in zs], n)
    rows = orthogonal_complement(span.directions).rows[:k]
    c2 = synthesize_clifford([r << n for r in rows], n, target="first")
    c = c1.then(c2)
    s = int(o.measure_computational(1, k=k, circuit=c)[0])
    return c.then(_x_layer(s, k, n))


def _select_best(o: CopyOracle, cands: list[CliffordCircuit], t: int, eps: float, delta: float,
                 shadow_method: str = "auto") -> CliffordCircuit:
    uniq: dict = {}
    for c in cands:
        uniq.setdefault(c.tableau().key(), c)
    cands = list(uniq.values())
    if len(cands) == 1:
        return cands[0]
    est = shadow_block_fidelities(o, cands, t, eps, delta, shadow_method)
    return cands[int(np.argmax(est))]


# weaker, exponential-in-n learner ------------------------------------------------

SELECT_ALL_ERROR = 0.05
SELECT_ALL_KEEP = 0.6


def select_all_high_correlation(o: CopyOracle, delta: float = 1 / 3) -> Subspace | None:
    """Lagrangian containing every string with estimated correlation >= 0.6, or None if they clash."""
    n = o.n
    est = estimate_all_correlations(o, SELECT_ALL_ERROR, delta)
    keep = [int(x) for x in np.nonzero(est >= SELECT_ALL_KEEP)[0] if x]
    span = row_reduce(keep, 2 * n)
    if find_anticommuting_pair(span.rows, n) is not None:
        return None
    return extend_to_lagrangian(span)


def exponential_once(o: CopyOracle, t: int, tau: float, eps: float) -> CliffordCircuit:
    """One run of the uniform-Pauli bootstrapping loop; a Clifford on o's qubits."""
    n = o.n
    k_max = loop_length(tau) + 1
    rng = o.rng
    ck = CliffordCircuit.identity(n)
    found: list[CliffordCircuit] = []
    for k in range(k_max + 1):
        nk = n - k
        if nk < t or nk == 0:
            break
        view = o.condition_prefix(ck, k)
        need = 2 * bell_count(1 << (2 * nk), SELECT_ALL_ERROR, 1 / 3) + t + 2
        if not view.prepare(need, tau, 2 / 3, source=o):
            break
        h = select_all_high_correlation(view)
        if h is None:
            break
        u = find_heavy_subspace(view, h, t, t)
        found.append(ck.then(u.shifted(k, n)))
        q = int(rng.integers(1, 1 << (2 * nk)))  # the identity carries no information
        v = clifford_to_z0(SignedPauli(random_sign(rng), q, nk))
        ck = ck.then(v.shifted(k, n))
    if not found:
        return CliffordCircuit.identity(n)
    return found[int(rng.integers(len(found)))]


def exponential_bound(n: int, t: int, tau: float, eps: float) -> float:
    k_max = loop_length(tau) + 1
    return (6 * 4 ** n) ** (-k_max) * eps ** (t + 1) * (tau - eps) / (k_max + 1)


def highdim_exponential(o: CopyOracle, t: int, tau: float, eps: float, delta: float, *,
                        p_floor: float = 1e-6, reps: int | None = None,
                        shadow_method: str = "auto") -> CliffordCircuit:
    """Clifford with block weight >= F(rho, S^{n-t}) - eps w.p. 1 - delta; cost exponential in n."""
    n = o.n
    if t >= n:
        return CliffordCircuit.identity(n)
    if reps is None:
        reps = repetitions(exponential_bound(n, t, tau, eps / 3), delta, p_floor, scale=2)
    cands = [exponential_once(o, t, tau, eps / 3) for _ in range(reps)]
    return _select_best(o, cands, t, eps / 6, delta / 2, shadow_method)


# step 2: heavy subspace plus the small learner on the residual ----------------------

def step2_bound(t_prime: int, tau: float, eps: float) -> float:
    return (eps / 4) ** (t_prime + 1) * tau / 8


def step2_once(o: CopyOracle, h: Subspace, t: int, t_prime: int, tau: float, eps: float, *,
               p_floor: float = 1e-6, exp_reps: int | None = None,
               shadow_method: str = "auto") -> CliffordCircuit | None:
    n = o.n
    c1 = find_heavy_subspace(o, h, t, t_prime)
    if t_prime == t:
        return c1
    k = n - t_prime
    residual = o.condition_prefix(c1, k)
    if residual.accept_prob <= 0:
        return c1
    try:
        c2 = highdim_exponential(residual, t, tau / 2, eps / 4, 0.5, p_floor=p_floor,
                                 reps=exp_reps, shadow_method=shadow_method)
    except PreparationFailed:
        return c1
    return c1.then(c2.shifted(k, n))


def highdim_step2(o: CopyOracle, h: Subspace, t: int, t_prime: int, tau: float, eps: float,
                  delta: float, *, p_floor: float = 1e-6, reps: int | None = None,
                  exp_reps: int | None = None, shadow_method: str = "auto") -> CliffordCircuit:
    """Clifford with block weight >= F(rho, H^{n-t'}_{n-t}) - eps w.p. 1 - delta."""
    if not 0 < eps <= tau:
        raise ValueError("need 0 < eps <= tau")
    if reps is None:
        reps = repetitions(step2_bound(t_prime, tau, eps), delta, p_floor, scale=2)
    cands = [step2_once(o, h, t, t_prime, tau, eps, p_floor=p_floor, exp_reps=exp_reps,
                        shadow_method=shadow_method) for _ in range(reps)]
    return _select_best(o, cands, t, eps / 4, delta / 2, shadow_method)


# main bootstrapping loop -------------------------------------------------------------

def highdim_bootstrap(o: CopyOracle, cfg: HighDimConfig, trace: list | None = None,
                      shadow_method: str = "auto") -> CliffordCircuit:
    """One run of the Bell-difference bootstrapping loop for stabilizer dimension >= n - t."""
    n, t, tau = o.n, cfg.t, cfg.tau
    k_max = loop_length(tau) + 1
    tp = cfg.t_prime(n)
    sel_eps = tau ** 4 / 2 ** (2 * t + 2)
    rng = o.rng
    ck = CliffordCircuit.identity(n)
    found: list[CliffordCircuit] = []
    for k in range(k_max + 1):
        nk = n - k
        if nk < t or nk == 0:
            break
        tau_k = min(1.0, AMPLIFICATION ** k * tau)
        eps_k = min(tau_k, AMPLIFICATION ** k * cfg.eps)
        view = o.condition_prefix(ck, k)
        tpk = min(tp, nk)
        # conditioned copies for selection, the heavy-subspace shots and one Bell-difference
        # sample; the small learner inside step 2 draws further copies on demand
        need = _copies_for_selection(nk, sel_eps, 1 / 3) + tpk + 2 + 4
        if not view.prepare(need, tau, 2 / 3, source=o):
            break
        h = select_high_correlation(view, sel_eps, 1 / 3)
        if h is None:
            break
        u = highdim_step2(view, h, t, tpk, tau_k, eps_k, 1 / 3, p_floor=cfg.p_floor,
                          reps=cfg.step2_reps, exp_reps=cfg.exp_reps, shadow_method=shadow_method)
        found.append(ck.then(u.shifted(k, n)))
        q = int(view.bell_difference_samples(1)[0])
        if q == 0:
            break
        p = SignedPauli(random_sign(rng), q, nk)
        if trace is not None:
            trace.append({"k": k, "view": view, "sample": p, "prefix": ck})
        ck = ck.then(clifford_to_z0(p).shifted(k, n))
    if not found:
        return CliffordCircuit.identity(n)
    return found[int(rng.integers(len(found)))]


def bootstrap_bound(t: int, tau: float) -> float:
    k_max = loop_length(tau) + 1
    return 2 * (tau ** 4 / 2 ** (2 * t + 4)) ** k_max / (3 * (k_max + 1))


def agnostic_highdim(o: CopyOracle, cfg: HighDimConfig, shadow_method: str = "auto") -> HighDimOutput:
    """C and sigma0 with F(rho, C^dagger(|0><0| (x) sigma0)C) >= F(rho, S^{n-t}) - eps w.p. 1 - delta."""
    n, t = o.n, cfg.t
    if t > n:
        raise ValueError("t exceeds the qubit count")
    inner = HighDimConfig(t, cfg.tau, cfg.eps / 3, cfg.delta, cfg.p_floor,
                          cfg.outer_reps, cfg.step2_reps, cfg.exp_reps)
    reps = cfg.outer_reps
    if reps is None:
        reps = repetitions(bootstrap_bound(t, cfg.tau), cfg.delta / 2, cfg.p_floor, scale=2)
    cands = [highdim_bootstrap(o, inner, shadow_method=shadow_method) for _ in range(reps)]
    c = _select_best(o, cands, t, cfg.eps / 6, cfg.delta / 4, shadow_method)
    sigma0 = block_tomography_given_clifford(o, c, t, cfg.tau / 3, cfg.eps / 3, cfg.delta / 2)
    return HighDimOutput(c, sigma0)
