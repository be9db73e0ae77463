"""Quick invariant battery used by the `verify` subcommand."""

from __future__ import annotations

import math

import numpy as np

from . import dense
from .bruteforce import best_stabilizer, enumerate_stabilizer_states, stabilizer_count
from .clifford import circuit_unitary, random_clifford, synthesize_clifford
from .f2 import extend_to_lagrangian, row_reduce
from .instances import InstanceSpec, generate_instance, zeta_vector
from .oracle import CopyOracle
from .pauli import SignedPauli, weyl_matrix
from .product import theta


def _check_bell_bound(rng) -> tuple[bool, str]:
    worst = -1.0
    for n in (1, 2, 3):
        for _ in range(5):
            b = dense.exact_bell_distribution(dense.random_density_matrix(n, rng))
            worst = max(worst, b.max() - 2.0 ** -n)
    return worst <= 1e-10, f"max excess {worst:.3g}"


def _check_tableau(rng) -> tuple[bool, str]:
    bad = 0
    for _ in range(20):
        n = int(rng.integers(1, 4))
        c = random_clifford(n, rng)
        u = circuit_unitary(c)
        t = c.tableau()
        for x in range(1, 4 ** n):
            img = t.act(SignedPauli(1, x, n))
            bad += not np.allclose(u @ weyl_matrix(x, n) @ u.conj().T, img.matrix())
    return bad == 0, f"{bad} mismatches"


def _check_synthesis(rng) -> tuple[bool, str]:
    bad = 0
    for _ in range(20):
        n = int(rng.integers(1, 5))
        lag = extend_to_lagrangian(row_reduce([], 2 * n))
        g = random_clifford(n, rng).tableau()
        rows = [g.act(SignedPauli(1, r, n)).x for r in lag.rows][: int(rng.integers(1, n + 1))]
        t = synthesize_clifford(rows, n, target="first").tableau()
        imgs = row_reduce([t.act(SignedPauli(1, r, n)).x for r in rows], 2 * n)
        want = row_reduce([1 << (n + q) for q in range(len(rows))], 2 * n)
        bad += imgs != want
    return bad == 0, f"{bad} failures"


def _check_counts(rng) -> tuple[bool, str]:
    got = [len(enumerate_stabilizer_states(n)) for n in (1, 2, 3)]
    return got == [stabilizer_count(n) for n in (1, 2, 3)] == [6, 60, 1080], str(got)


def _check_known_optima(rng) -> tuple[bool, str]:
    v = np.zeros(4)
    v[0] = 1
    noisy = dense.DensityMatrix.mix([(0.75, v), (0.25, np.eye(4) / 4)])
    a = best_stabilizer(noisy)[0]
    b = best_stabilizer(zeta_vector(2))[0]
    inst = generate_instance(InstanceSpec("noisy_stabilizer", 3, {"p": 0.25}, 1))
    c = best_stabilizer(inst.rho)[0]
    ok = abs(a - 0.8125) < 1e-9 and abs(b - 0.75) < 1e-9 and abs(c - inst.optimum) < 1e-9
    return ok, f"{a:.6f} {b:.6f} {c:.6f}"


def _check_ledger(rng) -> tuple[bool, str]:
    o = CopyOracle(dense.random_density_matrix(2, rng), rng)
    v = o.condition_pauli(SignedPauli(1, 1 << 2, 2))
    v.prepare(100, 0.25, 0.1)
    v.bell_difference_samples(10)
    o.bell_measurements(5)
    return o.ledger.consistent(), str(o.ledger.snapshot())


def _check_theta(rng) -> tuple[bool, str]:
    val = theta(0.5)
    return round(val, 3) == 0.916 and math.isclose(val, (1 + math.sqrt(0.5)) / 2 + 1 / 16), f"{val:.6f}"


CHECKS = {
    "bell_distribution_bound": _check_bell_bound,
    "tableau_matches_dense": _check_tableau,
    "clifford_synthesis": _check_synthesis,
    "stabilizer_counts": _check_counts,
    "bruteforce_known_optima": _check_known_optima,
    "ledger_consistency": _check_ledger,
    "theta_value": _check_theta,
}


def run_checks(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash counts as a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": bool(ok), "detail": detail})
    return {"seed": seed, "passed": all(r["passed"] for r in results), "checks": results}
