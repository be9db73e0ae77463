"""Stabilizer bootstrapping: learning the best stabilizer approximation of a state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import estimate_correlations, bell_count, shadow_fidelities
from .f2 import Subspace, extend_to_lagrangian, find_anticommuting_pair, row_reduce
from .oracle import CopyOracle
from .pauli import SignedPauli
from .stabilizer import StabilizerState

AMPLIFICATION = 1.08
SELECT_THRESHOLD = 0.6
SELECT_ERROR = 0.1


class NoCandidate(RuntimeError):
    """The learner produced no candidate state."""


@dataclass(frozen=True)
class BootstrapConfig:
    tau: float
    gamma: float = 1.0
    delta: float = 0.1
    eps: float | None = None
    p_floor: float = 1e-6
    max_reps: int | None = None

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if not 0.5 < self.gamma <= 1:
            raise ValueError("gamma must lie in (1/2, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.eps is not None and not 0 < self.eps <= self.tau:
            raise ValueError("eps must lie in (0, tau]")

    @property
    def t_max(self) -> int:
        return loop_length(self.tau)


def loop_length(tau: float, factor: float = AMPLIFICATION) -> int:
    """floor(log_factor(1/tau)), guarded against float error at exact powers."""
    return int(math.floor(math.log(1 / tau) / math.log(factor) + 1e-12))


def selection_samples(n: int, eps: float, delta: float) -> int:
    return math.ceil(8 * (math.log(3 / delta) + 4 * n) / eps)


@dataclass
class IterationRecord:
    t: int
    basis: Subspace | None
    candidate: StabilizerState | None
    sample: SignedPauli | None
    view: CopyOracle
    ledger: dict


@dataclass
class BootstrapTrace:
    records: list = field(default_factory=list)
    stop: str = "completed"


def _bell_difference_counts(o: CopyOracle, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct Bell-difference outcomes and their multiplicities."""
    if o.n <= 6:
        hist = o.bell_difference_histogram(m)
        xs = np.nonzero(hist)[0]
        return xs, hist[xs]
    xs, counts = np.unique(o.bell_difference_samples(m), return_counts=True)
    return xs, counts


def select_high_correlation(o: CopyOracle, eps: float, delta: float) -> Subspace | None:
    """Lagrangian basis spanned by well-correlated Bell-difference samples, or None on abort."""
    n = o.n
    m = selection_samples(n, eps, delta)
    xs, _ = _bell_difference_counts(o, m)
    est = estimate_correlations(o, xs, SELECT_ERROR, delta / 3)
    keep = [e.x for e in est if e.value > SELECT_THRESHOLD and e.x != 0]
    span = row_reduce(keep, 2 * n)
    if find_anticommuting_pair(span.rows, n) is not None:
        return None
    return extend_to_lagrangian(span)


def _copies_for_selection(n: int, eps: float, delta: float) -> int:
    m = selection_samples(n, eps, delta)
    return 4 * m + 2 * bell_count(min(m, 1 << (2 * n)), SELECT_ERROR, delta / 3)


def random_sign(rng: np.random.Generator) -> int:
    return 1 if rng.integers(2) == 0 else -1


def bootstrap_once(o: CopyOracle, cfg: BootstrapConfig,
                   trace: BootstrapTrace | None = None) -> StabilizerState | None:
    """One run of stabilizer bootstrapping; returns a random collected candidate or None."""
    root = o.root
    n = root.n
    view = root
    found: list[StabilizerState] = []
    tau_t = cfg.tau
    g2 = (cfg.gamma - 0.5) ** 2
    stop = "completed"
    for t in range(cfg.t_max + 1):
        eps_t = 0.25 * g2 * min(tau_t, 1.0) ** 4
        need = _copies_for_selection(n, eps_t, 1 / 5) + 4
        if not view.prepare(need, cfg.tau, 1 / 6):
            stop = "shortfall"
            break
        h = select_high_correlation(view, eps_t, 1 / 5)
        if h is None:
            stop = "abort"
            break
        phi = root.measure_stabilizer_basis(h)[0]
        found.append(phi)
        y = int(view.bell_difference_samples(1)[0])
        p = SignedPauli(random_sign(root.rng), y, n)
        if trace is not None:
            trace.records.append(IterationRecord(t, h, phi, p, view, root.ledger.snapshot()))
        view = view.condition_pauli(p)
        tau_t *= AMPLIFICATION
    if trace is not None:
        trace.stop = stop
    if not found:
        return None
    return found[int(root.rng.integers(len(found)))]


def success_bound(tau: float, gamma: float) -> float:
    """Per-run probability of producing a fixed local maximizer, with explicit constants."""
    t_max = loop_length(tau)
    return (0.25 * (gamma - 0.5) ** 2 * tau ** 4) ** (t_max + 1) / (t_max + 1)


def repetitions(p: float, delta: float, p_floor: float = 0.0, max_reps: int | None = None,
                scale: float = 1.0) -> int:
    r = math.ceil(math.log(scale / delta) / max(p, p_floor))
    return min(r, max_reps) if max_reps else r


def list_decode(o: CopyOracle, cfg: BootstrapConfig, delta: float | None = None,
                reps: int | None = None) -> list[StabilizerState]:
    """Distinct outputs of repeated bootstrap runs, ordered by canonical key."""
    delta = cfg.delta if delta is None else delta
    if reps is None:
        reps = repetitions(success_bound(cfg.tau, cfg.gamma), delta, cfg.p_floor, cfg.max_reps)
    seen: dict[bytes, StabilizerState] = {}
    for _ in range(reps):
        s = bootstrap_once(o.root, cfg)
        if s is not None:
            seen.setdefault(s.canonical_key, s)
    return [seen[k] for k in sorted(seen)]


def _pick_best(cands: list[StabilizerState], est: np.ndarray) -> int:
    best = float(np.max(est))
    ties = [i for i, v in enumerate(est) if v >= best - 1e-15]
    return min(ties, key=lambda i: cands[i].canonical_key)


def agnostic_stabilizer(o: CopyOracle, tau: float, eps: float, delta: float, *,
                        p_floor: float = 1e-6, max_reps: int | None = None,
                        shadow_method: str = "auto") -> StabilizerState:
    """Stabilizer state whose fidelity is within eps of the best, with probability 1 - delta."""
    cfg = BootstrapConfig(tau=tau, gamma=1.0, delta=delta, eps=eps, p_floor=p_floor, max_reps=max_reps)
    cands = list_decode(o, cfg, delta / 2)
    if not cands:
        raise NoCandidate("list decoding returned no states")
    if len(cands) == 1:
        return cands[0]
    est = shadow_fidelities(o.root, cands, eps / 2, delta / 2, shadow_method)
    return cands[_pick_best(cands, est)]


def estimate_stabilizer_fidelity(o: CopyOracle, eps: float, delta: float, *,
                                 p_floor: float = 1e-6, max_reps: int | None = None,
                                 shadow_method: str = "auto") -> float:
    """Estimate of the largest fidelity with any stabilizer state, within eps w.p. 1 - delta."""
    cfg = BootstrapConfig(tau=eps, gamma=1.0, delta=delta, eps=eps, p_floor=p_floor, max_reps=max_reps)
    cands = list_decode(o, cfg, delta / 2)
    if not cands:
        return 0.0
    est = shadow_fidelities(o.root, cands, eps, delta / 2, shadow_method)
    return float(np.max(est))
