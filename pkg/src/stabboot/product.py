"""Learning product states: discrete packing classes and stabilizer products."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bruteforce import product_vector
from .estimators import bell_count, estimate_correlations, local_fidelities, product_fidelities, shadow_fidelities
from .oracle import CopyOracle
from .pauli import SignedPauli, single_qubit_pauli
from .stab_learner import AMPLIFICATION, NoCandidate, loop_length, random_sign, repetitions
from .stabilizer import StabilizerState

LETTERS = "XYZ"
_BLOCH = {"X": np.array([1.0, 0, 0]), "Y": np.array([0, 1.0, 0]), "Z": np.array([0, 0, 1.0])}


def theta(mu: float) -> float:
    """Correlation ceiling that controls the amplification of the packing learner."""
    return (1 + math.sqrt(1 - mu)) / 2 + mu / 8


def bloch_to_vector(u) -> np.ndarray:
    x, y, z = np.asarray(u, dtype=float) / np.linalg.norm(u)
    th = math.acos(max(-1.0, min(1.0, z)))
    ph = math.atan2(y, x)
    return np.array([math.cos(th / 2), np.exp(1j * ph) * math.sin(th / 2)])


@dataclass(frozen=True, eq=False)
class PackingSet:
    """Single-qubit pure states (as Bloch vectors) with pairwise fidelity at most 1 - mu."""

    bloch: np.ndarray
    mu: float

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.bloch, dtype=float))
        if b.shape[1] != 3:
            raise ValueError("Bloch vectors need three components")
        if not np.allclose(np.linalg.norm(b, axis=1), 1, atol=1e-9):
            raise ValueError("Bloch vectors must be unit length (pure states)")
        if not 0 < self.mu <= 1:
            raise ValueError("mu must lie in (0, 1]")
        f = (1 + b @ b.T) / 2
        off = f[~np.eye(len(b), dtype=bool)]
        if off.size and off.max() > 1 - self.mu + 1e-10:
            raise ValueError(f"pairwise fidelity {off.max():.6f} exceeds 1 - mu")
        if len(b) > 2 / (1 - math.sqrt(1 - self.mu)) + 1e-9:
            raise ValueError("more states than a mu-packing set can hold")
        b.setflags(write=False)
        object.__setattr__(self, "bloch", b)

    def __len__(self) -> int:
        return len(self.bloch)

    @property
    def vectors(self) -> np.ndarray:
        return np.array([bloch_to_vector(u) for u in self.bloch])

    def to_json(self) -> dict:
        return {"mu": self.mu, "states": self.bloch.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> PackingSet:
        return cls(np.array(obj["states"], dtype=float), float(obj["mu"]))


def stabilizer_packing() -> PackingSet:
    """|0>, |1>, |+>, |->, |+i>, |-i> (same order as bruteforce.SINGLE_QUBIT_STABILIZERS)."""
    return PackingSet(np.array([[0, 0, 1], [0, 0, -1], [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]]), 0.5)


@dataclass(frozen=True)
class ProductState:
    """Per-qubit labels, qubit 0 first.

    With a packing set the labels are indices into it; otherwise each label is
    a signed single-qubit Pauli such as "+X" or "-Z" stabilizing that factor.
    """

    labels: tuple
    packing: PackingSet | None = None

    @property
    def n(self) -> int:
        return len(self.labels)

    def factor_vectors(self) -> list[np.ndarray]:
        if self.packing is not None:
            vecs = self.packing.vectors
            return [vecs[i] for i in self.labels]
        return [bloch_to_vector((1 if lab[0] == "+" else -1) * _BLOCH[lab[1]]) for lab in self.labels]

    def vector(self) -> np.ndarray:
        return product_vector(self.factor_vectors())

    def stabilizer(self) -> StabilizerState:
        if self.packing is not None:
            raise ValueError("only stabilizer products convert to stabilizer states")
        n = self.n
        return StabilizerState(n, tuple(SignedPauli(1 if lab[0] == "+" else -1,
                                                    single_qubit_pauli(lab[1], j, n), n)
                                        for j, lab in enumerate(self.labels)))

    def to_json(self) -> dict:
        return {"labels": list(self.labels)}


# discrete packing classes ---------------------------------------------------------

def local_fidelity_copies(n: int, eps: float, delta: float) -> int:
    return 3 * math.ceil(9 / (2 * eps ** 2) * math.log(6 * n / delta))


def agnostic_product_once(o: CopyOracle, packing: PackingSet, tau: float,
                          trace: list | None = None) -> ProductState | None:
    root = o.root
    n = root.n
    mu = packing.mu
    th = theta(mu)
    t_max = loop_length(tau, 1 / th)
    vecs = packing.vectors
    k = len(packing)
    rng = root.rng
    view = root
    found: list[ProductState] = []
    for t in range(t_max + 1):
        if not view.prepare(local_fidelity_copies(n, mu / 16, 1 / 5), tau, 1 / 6):
            break
        f = local_fidelities(view, vecs, mu / 16, 1 / 5)
        best = tuple(int(i) for i in np.argmax(f, axis=0))
        found.append(ProductState(best, packing))
        if k < 2:
            break
        j = int(rng.integers(n))
        alt = int(rng.integers(k - 1))
        alt += alt >= best[j]
        if trace is not None:
            trace.append({"t": t, "view": view, "qubit": j, "state": alt, "candidate": best})
        view = view.condition_single_qubit(j, vecs[alt])
    if not found:
        return None
    return found[int(rng.integers(len(found)))]


def product_bound(n: int, k: int, tau: float, mu: float) -> float:
    t_max = loop_length(tau, 1 / theta(mu))
    step = 2 / (3 * n * max(k - 1, 1))
    return min(1.0, step) ** (t_max + 1) / (t_max + 1)


def _dedupe(cands: list) -> list:
    seen = {}
    for c in cands:
        if c is not None:
            seen.setdefault(c.labels, c)
    return [seen[k] for k in sorted(seen)]


def agnostic_product(o: CopyOracle, packing: PackingSet, tau: float, eps: float, delta: float, *,
                     p_floor: float = 1e-6, max_reps: int | None = None) -> ProductState:
    """Product from the packing class within eps of the best class fidelity, w.p. 1 - delta."""
    if not 0 < eps <= tau <= 1:
        raise ValueError("need 0 < eps <= tau <= 1")
    n = o.n
    reps = repetitions(product_bound(n, len(packing), tau, packing.mu), delta / 2, p_floor, max_reps)
    cands = _dedupe([agnostic_product_once(o.root, packing, tau) for _ in range(reps)])
    if not cands:
        raise NoCandidate("no product candidate produced")
    if len(cands) == 1:
        return cands[0]
    est = product_fidelities(o.root, [c.factor_vectors() for c in cands], eps, delta)
    return cands[int(np.argmax(est))]


# stabilizer products ----------------------------------------------------------------

def single_qubit_strings(n: int) -> list[int]:
    """X, Y, Z on each qubit, ordered qubit-major."""
    return [single_qubit_pauli(p, j, n) for j in range(n) for p in LETTERS]


def _letter_at(x: int, j: int, n: int) -> str:
    a, b = (x >> j) & 1, (x >> (n + j)) & 1
    return "IXZY"[a | (b << 1)]


def stab_product_copies(n: int) -> int:
    return 2 * bell_count(3 * n, 0.1, 1 / 5) + 4


def agnostic_stab_product_once(o: CopyOracle, tau: float,
                               trace: list | None = None) -> ProductState | None:
    root = o.root
    n = root.n
    rng = root.rng
    strings = single_qubit_strings(n)
    view = root
    found: list[ProductState] = []
    for t in range(loop_length(tau) + 1):
        if not view.prepare(stab_product_copies(n), tau, 1 / 6):
            break
        est = np.array([e.value for e in estimate_correlations(view, strings, 0.1, 1 / 5)]).reshape(n, 3)
        letters = "".join(LETTERS[int(i)] for i in np.argmax(est, axis=1))
        bits = int(root.measure_pauli_setting(letters, 1)[0])
        found.append(ProductState(tuple(("-" if (bits >> j) & 1 else "+") + letters[j] for j in range(n))))
        y = int(view.bell_difference_samples(1)[0])
        pick = [j for j in range(n) if _letter_at(y, j, n) not in ("I", letters[j])]
        if not pick:
            break
        j = pick[0]
        p = SignedPauli(random_sign(rng), single_qubit_pauli(_letter_at(y, j, n), j, n), n)
        if trace is not None:
            trace.append({"t": t, "view": view, "sample": p, "candidate": found[-1]})
        view = view.condition_pauli(p)
    if not found:
        return None
    return found[int(rng.integers(len(found)))]


def stab_product_bound(tau: float) -> float:
    t_max = loop_length(tau)
    p = 1.0
    for t in range(t_max + 1):
        p *= min(1.0, tau * min(1.0, AMPLIFICATION ** t * tau) ** 3 / 6)
    return p / (t_max + 1)


def agnostic_stab_product(o: CopyOracle, tau: float, eps: float, delta: float, *,
                          p_floor: float = 1e-6, max_reps: int | None = None,
                          estimator: str = "shadow", shadow_method: str = "auto") -> ProductState:
    """Stabilizer product state within eps of the best, w.p. 1 - delta.

    `estimator` picks how candidates are compared: "shadow" (random-Clifford
    shadows) or "pvm" (measuring each candidate's own product basis).
    """
    if not 0 < eps <= tau <= 1:
        raise ValueError("need 0 < eps <= tau <= 1")
    reps = repetitions(stab_product_bound(tau), delta / 2, p_floor, max_reps)
    cands = _dedupe([agnostic_stab_product_once(o.root, tau) for _ in range(reps)])
    if not cands:
        raise NoCandidate("no product candidate produced")
    if len(cands) == 1:
        return cands[0]
    if estimator == "shadow":
        est = shadow_fidelities(o.root, [c.stabilizer() for c in cands], eps / 2, delta / 2, shadow_method)
    elif estimator == "pvm":
        est = product_fidelities(o.root, [c.factor_vectors() for c in cands], eps, delta)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return cands[int(np.argmax(est))]
