from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabboot.clifford import (CliffordCircuit, apply_circuit, circuit_unitary, clifford_to_z0, conjugate_density,
                               random_clifford, synthesize_clifford)
from stabboot.f2 import symplectic_product
from stabboot.pauli import SignedPauli, parse_pauli, pauli_label, single_qubit_pauli, weyl_matrix

X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])


@pytest.mark.parametrize("label,mat", [("X", X), ("Y", Y), ("Z", Z), ("I", np.eye(2))])
def test_single_qubit_weyl(label, mat):
    x = single_qubit_pauli(label, 0, 1) if label != "I" else 0
    np.testing.assert_allclose(weyl_matrix(x, 1), mat)


@given(st.integers(1, 3), st.data())
def test_weyl_hermitian_unitary_and_commutation(n, data):
    x = data.draw(st.integers(0, 4 ** n - 1))
    y = data.draw(st.integers(0, 4 ** n - 1))
    a, b = weyl_matrix(x, n), weyl_matrix(y, n)
    np.testing.assert_allclose(a, a.conj().T, atol=1e-12)
    np.testing.assert_allclose(a @ a, np.eye(2 ** n), atol=1e-12)
    sign = -1 if symplectic_product(x, y, n) else 1
    np.testing.assert_allclose(a @ b, sign * b @ a, atol=1e-12)


@given(st.integers(1, 4), st.data())
def test_label_roundtrip(n, data):
    x = data.draw(st.integers(0, 4 ** n - 1))
    sign = data.draw(st.sampled_from([1, -1]))
    p = SignedPauli(sign, x, n)
    assert SignedPauli.from_label(p.label) == p
    assert parse_pauli(pauli_label(x, n))[1] == x


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_tableau_matches_dense_conjugation(n, seed):
    c = random_clifford(n, np.random.default_rng(seed))
    u = circuit_unitary(c)
    t = c.tableau()
    assert t.is_symplectic()
    for x in range(1, 4 ** n):
        img = t.act(SignedPauli(1, x, n))
        np.testing.assert_allclose(u @ weyl_matrix(x, n) @ u.conj().T, img.matrix(), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_then_inverse_shifted(n, seed):
    rng = np.random.default_rng(seed)
    a, b = random_clifford(n, rng), random_clifford(n, rng)
    np.testing.assert_allclose(circuit_unitary(a.then(b)), circuit_unitary(b) @ circuit_unitary(a), atol=1e-10)
    np.testing.assert_allclose(circuit_unitary(a.then(a.inverse())), np.eye(2 ** n), atol=1e-10)
    big = a.shifted(1, n + 1)
    # qubit 0 untouched, the rest carries a
    np.testing.assert_allclose(circuit_unitary(big), np.kron(circuit_unitary(a), np.eye(2)), atol=1e-10)
    assert CliffordCircuit.from_json(n, a.to_json()) == a


def test_conjugate_density():
    rng = np.random.default_rng(3)
    c = random_clifford(2, rng)
    rho = np.diag([0.5, 0.25, 0.25, 0]).astype(complex)
    u = circuit_unitary(c)
    np.testing.assert_allclose(conjugate_density(c, rho), u @ rho @ u.conj().T, atol=1e-12)
    v = np.eye(4)[:, :1].astype(complex)
    np.testing.assert_allclose(apply_circuit(c, v), u @ v, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_clifford_to_z0(n, seed):
    rng = np.random.default_rng(seed)
    x = int(rng.integers(1, 4 ** n))
    p = SignedPauli(int(rng.choice([1, -1])), x, n)
    img = clifford_to_z0(p).tableau().act(p)
    assert img == SignedPauli(1, 1 << n, n)


def test_clifford_to_z0_rejects_identity():
    with pytest.raises(ValueError):
        clifford_to_z0(SignedPauli(1, 0, 2))


def test_synthesis_rejects_anticommuting():
    with pytest.raises(ValueError):
        synthesize_clifford([0b01, 0b10], 1)


def test_random_clifford_covers_single_qubit_group():
    # 24 single-qubit Cliffords up to phase: images of (X, Z) under conjugation
    rng = np.random.default_rng(0)
    seen = set()
    for _ in range(2000):
        t = random_clifford(1, rng).tableau()
        seen.add((t.act(SignedPauli(1, 1, 1)), t.act(SignedPauli(1, 2, 1))))
    assert len(seen) == 24
