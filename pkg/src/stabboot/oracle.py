"""Metered access to copies of an unknown state.

Learners only ever see measurement outcomes. A CopyOracle view may carry a
list of conditioning steps (projective measurements whose accepting outcome
is postselected); views share one ledger and one random stream with the root.
The exact conditioned state is kept internally to simulate outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dense
from .clifford import CliffordCircuit, conjugate_density, synthesize_clifford
from .dense import DensityMatrix
from .f2 import Subspace
from .pauli import PauliProjector, SignedPauli
from .stabilizer import StabilizerState

# copies of the (conditioned) state used by one call of each primitive
COPIES_PER_USE = {
    "bell_difference": 4,
    "bell_measurement": 2,
    "computational": 1,
    "pauli_basis": 1,
    "product_basis": 1,
    "stabilizer_basis": 1,
    "shadow": 1,
}

DEFAULT_BUDGET_CAP = 10 ** 8
# acceptance probabilities below this are treated as zero (float round-off of exact zeros)
MIN_ACCEPT = 1e-12


class BudgetExceeded(RuntimeError):
    """The per-run cap on consumed copies was hit."""


class DegenerateConditioning(RuntimeError):
    """A conditioning step accepts with probability zero."""


@dataclass
class SampleLedger:
    base_copies: int = 0
    accepted: int = 0
    rejected: int = 0
    uses: dict = field(default_factory=dict)
    copies: dict = field(default_factory=dict)
    cap: int = DEFAULT_BUDGET_CAP

    def charge_base(self, total: int, accepted: int) -> None:
        self.base_copies += total
        self.accepted += accepted
        self.rejected += total - accepted
        if self.base_copies > self.cap:
            raise BudgetExceeded(f"{self.base_copies} copies exceed cap {self.cap}")

    def record(self, kind: str, count: int) -> None:
        self.uses[kind] = self.uses.get(kind, 0) + count
        self.copies[kind] = self.copies.get(kind, 0) + count * COPIES_PER_USE[kind]

    def consistent(self) -> bool:
        ok = self.base_copies == self.accepted + self.rejected
        ok &= all(self.copies[k] == self.uses[k] * COPIES_PER_USE[k] for k in self.uses)
        return ok and sum(self.copies.values()) <= self.accepted

    def snapshot(self) -> dict:
        return {"base_copies": self.base_copies, "accepted": self.accepted,
                "rejected": self.rejected, "uses": dict(sorted(self.uses.items())),
                "copies": dict(sorted(self.copies.items()))}


def _pure_basis(vec) -> np.ndarray:
    """2x2 unitary whose first row is <vec|."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    w = np.array([-v[1].conj(), v[0].conj()])
    return np.array([v.conj(), w.conj()])


_PAULI_BASES = {
    "Z": np.eye(2),
    "X": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    "Y": np.array([[1, -1j], [1, 1j]]) / np.sqrt(2),
}


class CopyOracle:
    """Sample-metered source of copies of rho, possibly conditioned."""

    def __init__(self, rho: DensityMatrix, rng: np.random.Generator | None = None,
                 budget_cap: int = DEFAULT_BUDGET_CAP, *, _parent: CopyOracle | None = None,
                 _state: np.ndarray | None = None, _accept: float = 1.0, _steps: tuple = ()):
        if _parent is None:
            self.base = rho
            self.rng = rng if rng is not None else np.random.default_rng()
            self.ledger = SampleLedger(cap=budget_cap)
            self._root = self
            self._state = np.asarray(rho.data)
        else:
            self.base = _parent.base
            self.rng = _parent.rng
            self.ledger = _parent.ledger
            self._root = _parent._root
            self._state = _state
        self.accept_prob = float(_accept)
        self.steps = _steps
        self._pool = 0
        self._cache: dict = {}

    # views -------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self._state.shape[0].bit_length() - 1

    @property
    def root(self) -> CopyOracle:
        return self._root

    def _child(self, unnorm: np.ndarray, step) -> CopyOracle:
        p = float(np.trace(unnorm).real)
        accept = self.accept_prob * max(p, 0.0)
        state = unnorm / p if p > 1e-15 else unnorm
        return CopyOracle(self.base, _parent=self, _state=state, _accept=accept,
                          _steps=self.steps + (step,))

    def condition_pauli(self, p: SignedPauli) -> CopyOracle:
        half = PauliProjector(p).apply(self._state)
        unnorm = PauliProjector(p).apply(half.conj().T).conj().T
        return self._child(unnorm, ("pauli", p))

    def condition_prefix(self, circuit: CliffordCircuit | None, k: int) -> CopyOracle:
        """Apply the circuit, keep copies whose qubits 0..k-1 read 0, drop those qubits."""
        s = self._state if circuit is None else conjugate_density(circuit, self._state)
        return self._child(dense.postselect_prefix(s, k), ("prefix", circuit, k))

    def condition_single_qubit(self, j: int, vec) -> CopyOracle:
        u = _pure_basis(vec)
        proj = np.outer(u[0].conj(), u[0])
        s = dense.apply_single_qubit(proj, j, self._state, self.n)
        s = dense.apply_single_qubit(proj, j, s.conj().T, self.n).conj().T
        return self._child(s, ("qubit", j, tuple(np.asarray(vec, dtype=complex))))

    def peek_state(self) -> np.ndarray:
        """Exact normalized conditioned state. For tests and instrumentation only."""
        return self._state

    # copy accounting ----------------------------------------------------------

    def prepare(self, count: int, tau: float, delta: float, source: CopyOracle | None = None) -> bool:
        """Try to obtain `count` conditioned copies within ceil((2/tau)(count + ln(1/delta))) draws.

        Draws are copies of `source` (the root by default), which must be an
        ancestor view; the conditioning steps between the two are applied to
        each drawn copy.
        """
        count = int(count)
        budget = math.ceil((2 / tau) * (count + math.log(1 / delta)))
        src = self._root if source is None else source
        p = self.accept_prob / src.accept_prob if src.accept_prob > 0 else 0.0
        if p <= MIN_ACCEPT:
            src._draw(budget, 0)
            return False
        if p >= 1:
            total = count
        else:
            total = count + int(self.rng.negative_binomial(count, p)) if count else 0
        if total > budget:
            # the run of draws is stopped at the budget; the partial yield is discarded
            src._draw(budget, min(int(self.rng.binomial(budget, p)), count - 1))
            return False
        src._draw(total, count)
        self._pool += count
        return True

    def _draw(self, total: int, accepted: int) -> None:
        """Consume `total` copies of this view, of which `accepted` pass a downstream filter."""
        if self is self._root:
            self.ledger.charge_base(total, accepted)
        else:
            self._take(total)

    def _take(self, copies: int) -> None:
        short = copies - self._pool
        if short > 0:
            if self.accept_prob <= MIN_ACCEPT:
                raise DegenerateConditioning("conditioning accepts with probability zero")
            extra = 0
            if self.accept_prob < 1:
                extra = int(self.rng.negative_binomial(short, self.accept_prob))
            self.ledger.charge_base(short + extra, short)
            self._pool += short
        self._pool -= copies

    def _use(self, kind: str, count: int) -> None:
        self._take(count * COPIES_PER_USE[kind])
        self.ledger.record(kind, count)

    # cached laws ---------------------------------------------------------------

    def _expectations(self) -> np.ndarray:
        if "c" not in self._cache:
            self._cache["c"] = dense.pauli_expectations(self._state)
        return self._cache["c"]

    def _bell_difference_law(self) -> np.ndarray:
        if "B" not in self._cache:
            c = self._expectations()
            b = dense.symplectic_fourier(c ** 4, self.n) / (1 << (2 * self.n))
            b = np.clip(b, 0, None)
            self._cache["B"] = b / b.sum()
        return self._cache["B"]

    def _bell_measurement_law(self) -> np.ndarray:
        if "P" not in self._cache:
            self._cache["P"] = dense.bell_measurement_distribution(self._state)
        return self._cache["P"]

    # measurement primitives ------------------------------------------------------

    def bell_difference_samples(self, m: int, method: str = "auto") -> np.ndarray:
        """m Bell-difference outcomes (packed strings), 4 copies each.

        "table" samples the closed-form law, "pairs" XORs two simulated
        Bell-basis measurements; "auto" uses the table up to 6 qubits.
        """
        self._use("bell_difference", m)
        if method == "auto":
            method = "table" if self.n <= dense.BELL_TABLE_LIMIT else "pairs"
        size = 1 << (2 * self.n)
        if method == "table":
            return self.rng.choice(size, size=m, p=self._bell_difference_law()).astype(np.int64)
        p = self._bell_measurement_law()
        first = self.rng.choice(size, size=m, p=p)
        second = self.rng.choice(size, size=m, p=p)
        return (first ^ second).astype(np.int64)

    def bell_difference_histogram(self, m: int) -> np.ndarray:
        self._use("bell_difference", m)
        return self.rng.multinomial(m, self._bell_difference_law())

    def bell_measurements(self, m: int) -> np.ndarray:
        self._use("bell_measurement", m)
        p = self._bell_measurement_law()
        return self.rng.choice(len(p), size=m, p=p).astype(np.int64)

    def bell_measurement_histogram(self, m: int) -> np.ndarray:
        self._use("bell_measurement", m)
        return self.rng.multinomial(m, self._bell_measurement_law())

    def computational_probabilities(self, circuit: CliffordCircuit | None = None) -> np.ndarray:
        key = ("comp", circuit)
        if key not in self._cache:
            s = self._state if circuit is None else conjugate_density(circuit, self._state)
            p = np.clip(np.diag(s).real, 0, None)
            self._cache[key] = p / p.sum()
        return self._cache[key]

    def _sample_computational(self, count: int, k: int, circuit) -> np.ndarray:
        if not 0 <= k <= self.n:
            raise ValueError("prefix length out of range")
        p = self.computational_probabilities(circuit)
        p = p.reshape(-1, 1 << k).sum(axis=0)
        return self.rng.choice(1 << k, size=count, p=p / p.sum()).astype(np.int64)

    def measure_computational(self, count: int, k: int | None = None,
                              circuit: CliffordCircuit | None = None) -> np.ndarray:
        """Outcomes on qubits 0..k-1 (as ints) after applying the circuit."""
        k = self.n if k is None else k
        self._use("computational", count)
        return self._sample_computational(count, k, circuit)

    def measure_product_basis(self, bases, count: int, kind: str = "product_basis",
                              histogram: bool = False) -> np.ndarray:
        """Qubit j measured in the basis whose rows are bases[j]; outcome bit j = row index.

        With histogram=True the outcome counts are returned instead of the sequence.
        """
        key = ("prod", tuple(np.asarray(b, dtype=complex).tobytes() for b in bases))
        if key not in self._cache:
            p = dense.product_basis_probabilities(self._state, bases)
            self._cache[key] = p / p.sum()
        self._use(kind, count)
        p = self._cache[key]
        if histogram:
            return self.rng.multinomial(count, p)
        return self.rng.choice(len(p), size=count, p=p).astype(np.int64)

    def measure_pauli_setting(self, setting: str, count: int, histogram: bool = False) -> np.ndarray:
        """Each qubit measured in its X/Y/Z eigenbasis; bit j = 1 means eigenvalue -1."""
        if len(setting) != self.n:
            raise ValueError("setting length must equal qubit count")
        return self.measure_product_basis([_PAULI_BASES[ch] for ch in setting], count,
                                          kind="pauli_basis", histogram=histogram)

    def measure_local_states(self, vecs, count: int, histogram: bool = False) -> np.ndarray:
        """Qubit j measured in {|vecs[j]>, its orthogonal}; bit j = 0 means |vecs[j]>."""
        return self.measure_product_basis([_pure_basis(v) for v in vecs], count, histogram=histogram)

    def measure_stabilizer_basis(self, h: Subspace, count: int = 1) -> list[StabilizerState]:
        """Measure in the joint eigenbasis of a Lagrangian subspace."""
        n = self.n
        if h.ambient != 2 * n or h.dim != n:
            raise ValueError("need a Lagrangian subspace on this oracle's qubits")
        c = synthesize_clifford(h.rows, n)
        self._use("stabilizer_basis", count)
        outcomes = self._sample_computational(count, n, c)
        return [StabilizerState.from_circuit(c, int(s)) for s in outcomes]

    def clifford_snapshot(self, circuit: CliffordCircuit) -> int:
        """Apply the circuit to one copy and measure every qubit."""
        self._use("shadow", 1)
        return int(self._sample_computational(1, self.n, circuit)[0])

    def stabilizer_basis_outcomes(self, strings: np.ndarray, signs: np.ndarray) -> np.ndarray:
        """One eigenbasis measurement per row of a batch of Lagrangian groups.

        Row r lists all 2^n group elements in combination order (see
        stabilizer.group_elements) with their signs. The returned pattern s has
        bit i = 1 when generator i reads -1.
        """
        strings = np.atleast_2d(strings)
        signs = np.atleast_2d(signs)
        c = self._expectations()
        f = signs * c[strings.astype(np.int64)]
        p = np.clip(dense.fwht(f.T).T / (1 << self.n), 0, None)
        p /= p.sum(axis=1, keepdims=True)
        self._use("shadow", len(p))
        u = self.rng.random(len(p))
        out = (np.cumsum(p, axis=1) < u[:, None]).sum(axis=1)
        return np.minimum(out, p.shape[1] - 1).astype(np.int64)

    def stabilizer_state_probabilities(self, vectors: np.ndarray) -> np.ndarray:
        """<psi|rho|psi> for rows psi of `vectors` (exact, for the enumerated shadow law)."""
        key = ("stabprobs", id(vectors))
        if key not in self._cache:
            v = vectors
            self._cache[key] = np.einsum("ki,ij,kj->k", v.conj(), self._state, v).real
        return self._cache[key]

    def shadow_histograms(self, vectors: np.ndarray, groups: int, per_group: int) -> np.ndarray:
        """Counts of measured stabilizer states for groups of random-Clifford snapshots.

        Drawing a uniform Clifford and measuring yields stabilizer state psi with
        probability <psi|rho|psi> / (number of Lagrangians); with every state
        listed in `vectors` this law is sampled directly. Row g holds the counts
        of group g, so the snapshots within a group stay i.i.d.
        """
        p = np.clip(self.stabilizer_state_probabilities(vectors), 0, None)
        self._use("shadow", groups * per_group)
        return self.rng.multinomial(per_group, p / p.sum(), size=groups)
