"""Planted test instances with known optima."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dense
from .bruteforce import ENUM_LIMIT, best_stabilizer
from .clifford import apply_circuit, random_clifford
from .dense import DensityMatrix
from .product import PackingSet, ProductState, stabilizer_packing
from .stabilizer import StabilizerState

KINDS = ("noisy_stabilizer", "doped", "noisy_product", "subset_phase", "lower_bound_family", "zeta", "random")

T_GATE = np.diag([1, np.exp(1j * np.pi / 4)])


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    n: int
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise ValueError("n must be positive")

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n, "seed": self.seed, **self.params}

    @classmethod
    def from_json(cls, obj: dict) -> InstanceSpec:
        obj = dict(obj)
        kind = obj.pop("kind")
        n = int(obj.pop("n"))
        seed = int(obj.pop("seed", 0))
        return cls(kind, n, obj, seed)


@dataclass
class Instance:
    spec: InstanceSpec
    rho: DensityMatrix
    planted: dict
    optimum: float | None = None  # exact best class fidelity, when known

    @property
    def n(self) -> int:
        return self.rho.n


def _mix_with_noise(vec: np.ndarray, p: float) -> DensityMatrix:
    dim = len(vec)
    return DensityMatrix.mix([(1 - p, vec), (p, np.eye(dim) / dim)])


def random_stabilizer_state(n: int, rng: np.random.Generator) -> StabilizerState:
    return StabilizerState.from_circuit(random_clifford(n, rng), 0)


def doped_vector(n: int, t_count: int, rng: np.random.Generator, qubit: int = 0) -> np.ndarray:
    """Random Clifford layers interleaved with t_count T gates on one qubit, applied to |0^n>."""
    v = np.zeros((1 << n, 1), dtype=complex)
    v[0] = 1
    v = apply_circuit(random_clifford(n, rng), v)
    for _ in range(t_count):
        v = dense.apply_single_qubit(T_GATE, qubit, v, n)
        v = apply_circuit(random_clifford(n, rng), v)
    return v[:, 0]


def stabilizer_dimension(rho, tol: float = 1e-9) -> int:
    """log2 of the number of strings with |tr(W_x rho)| = 1."""
    d = dense._as_array(rho)
    if d.ndim == 1:
        d = np.outer(d, d.conj())
    c = dense.pauli_expectations(d)
    return int(np.log2(np.count_nonzero(np.abs(c) >= 1 - tol)))


def zeta_vector(n: int) -> np.ndarray:
    """Tensor power of (|00> + |01> + |10>)/sqrt(3); n must be even."""
    if n % 2:
        raise ValueError("zeta instances need an even qubit count")
    z = np.array([1, 1, 1, 0], dtype=complex) / np.sqrt(3)
    out = np.ones(1, dtype=complex)
    for _ in range(n // 2):
        out = np.kron(z, out)
    return out


def lower_bound_weight(n: int, tau: float) -> float:
    """Mixing weight giving fidelity exactly tau with the planted state."""
    return (2 ** n * tau - 1) / (2 ** n - 1)


def generate_instance(spec: InstanceSpec, rng: np.random.Generator | None = None) -> Instance:
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    n, prm = spec.n, spec.params
    dim = 1 << n
    if spec.kind == "noisy_stabilizer":
        p = float(prm.get("p", 0.0))
        s = random_stabilizer_state(n, rng)
        return Instance(spec, _mix_with_noise(s.vector(), p), {"state": s.to_json()}, (1 - p) + p / dim)
    if spec.kind == "lower_bound_family":
        tau = float(prm["tau"])
        if not 1 / dim <= tau <= 1:
            raise ValueError("tau must lie in [2^-n, 1]")
        a = lower_bound_weight(n, tau)
        s = random_stabilizer_state(n, rng)
        return Instance(spec, _mix_with_noise(s.vector(), 1 - a), {"state": s.to_json(), "weight": a}, tau)
    if spec.kind == "noisy_product":
        p = float(prm.get("p", 0.0))
        packing = PackingSet.from_json(prm["packing"]) if "packing" in prm else stabilizer_packing()
        idx = tuple(int(i) for i in rng.integers(len(packing), size=n))
        ps = ProductState(idx, packing)
        planted = {"labels": list(idx), "packing": packing.to_json()}
        return Instance(spec, _mix_with_noise(ps.vector(), p), planted, (1 - p) + p / dim)
    if spec.kind == "doped":
        t_count = int(prm.get("t_count", 1))
        p = float(prm.get("p", 0.0))
        v = doped_vector(n, t_count, rng)
        planted = {"re": v.real.tolist(), "im": v.imag.tolist(), "t_count": t_count,
                   "stabilizer_dimension": stabilizer_dimension(v)}
        return Instance(spec, _mix_with_noise(v, p), planted, (1 - p) + p / dim if p else 1.0)
    if spec.kind == "subset_phase":
        size = int(prm.get("size", max(1, 3 * dim // 8)))
        if not 1 <= size <= dim:
            raise ValueError("subset size out of range")
        support = np.sort(rng.choice(dim, size=size, replace=False))
        signs = 1 - 2 * rng.integers(2, size=size)
        v = np.zeros(dim, dtype=complex)
        v[support] = signs / np.sqrt(size)
        rho = DensityMatrix.from_vector(v)
        opt = best_stabilizer(v)[0] if n <= ENUM_LIMIT else None
        return Instance(spec, rho, {"support": support.tolist(), "signs": signs.tolist()}, opt)
    if spec.kind == "zeta":
        v = zeta_vector(n)
        opt = best_stabilizer(v)[0] if n <= ENUM_LIMIT else None
        return Instance(spec, DensityMatrix.from_vector(v), {}, opt)
    if spec.kind == "random":
        rank = prm.get("rank")
        rho = dense.random_density_matrix(n, rng, None if rank is None else int(rank))
        opt = best_stabilizer(rho)[0] if n <= ENUM_LIMIT else None
        return Instance(spec, rho, {}, opt)
    raise AssertionError(spec.kind)
