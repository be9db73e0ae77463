from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabboot.f2 import (AnticommutingError, BitVec, affine_span, extend_to_lagrangian, find_anticommuting_pair,
                         is_isotropic, orthogonal_complement, row_reduce, symplectic_product)


def _span_brute(vectors, length):
    out = set()
    for coeffs in itertools.product((0, 1), repeat=len(vectors)):
        v = 0
        for c, x in zip(coeffs, vectors):
            if c:
                v ^= x
        out.add(v)
    return out


vec_lists = st.integers(1, 6).flatmap(
    lambda length: st.tuples(st.just(length), st.lists(st.integers(0, (1 << length) - 1), max_size=6)))


@given(vec_lists)
def test_row_reduce_matches_brute_span(data):
    length, vecs = data
    s = row_reduce(vecs, length)
    assert set(int(e) for e in s.elements()) == _span_brute(vecs, length)
    assert len(set(s.pivots)) == s.dim


@given(vec_lists, st.randoms(use_true_random=False))
def test_row_reduce_is_canonical(data, rnd):
    length, vecs = data
    shuffled = list(vecs)
    rnd.shuffle(shuffled)
    assert row_reduce(vecs, length) == row_reduce(shuffled, length)


@given(vec_lists)
def test_orthogonal_complement_dimension_and_products(data):
    length, vecs = data
    s = row_reduce(vecs, length)
    c = orthogonal_complement(s)
    assert s.dim + c.dim == length
    for a in s.rows:
        for b in c.rows:
            assert bin(a & b).count("1") % 2 == 0


@given(st.integers(1, 4), st.data())
@settings(max_examples=60)
def test_symplectic_complement_contains_isotropic_span(n, data):
    gens = data.draw(st.lists(st.sampled_from([1 << (n + q) for q in range(n)]), max_size=n))
    s = row_reduce(gens, 2 * n)
    comp = orthogonal_complement(s, "symplectic")
    assert all(r in comp for r in s.rows)


@given(st.integers(1, 4), st.data())
def test_extend_to_lagrangian(n, data):
    k = data.draw(st.integers(0, n))
    s = row_reduce([1 << q for q in range(k)], 2 * n)
    lag = extend_to_lagrangian(s)
    assert lag.dim == n and is_isotropic(lag)
    assert all(r in lag for r in s.rows)


def test_extend_rejects_anticommuting():
    with pytest.raises(AnticommutingError):
        extend_to_lagrangian(row_reduce([0b01, 0b10], 2))


def test_symplectic_product_single_qubit():
    x, z, y = 0b01, 0b10, 0b11
    assert symplectic_product(x, z, 1) == 1
    assert symplectic_product(x, y, 1) == 1
    assert symplectic_product(y, y, 1) == 0
    assert find_anticommuting_pair([x, z], 1) == (x, z)


def test_affine_span_contains_points():
    rng = np.random.default_rng(0)
    for _ in range(50):
        pts = [int(p) for p in rng.integers(16, size=int(rng.integers(1, 5)))]
        a = affine_span(pts, 4)
        assert all(p in a for p in pts)
        assert a.dim <= len(pts) - 1


def test_bitvec_roundtrip():
    b = BitVec(0b1011, 6)
    assert BitVec.from_hex(b.to_hex(), 6) == b
    assert BitVec.from_json(b.to_json()) == b
    assert list(b.bits()) == [1, 1, 0, 1, 0, 0]
    with pytest.raises(ValueError):
        BitVec(64, 6)


def test_subspace_json_roundtrip():
    s = row_reduce([5, 3, 6], 4)
    assert type(s).from_json(s.to_json()) == s
