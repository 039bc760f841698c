from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, strategies as st

from dualcert import fq
from dualcert.errors import BudgetExceeded, UnsupportedField


def test_gaussian_binomial_examples():
    assert fq.gaussian_binomial(4, 0, 2) == 1
    assert fq.gaussian_binomial(4, 2, 2) == 35
    assert fq.gaussian_binomial(2, 1, 3) == 4
    assert fq.gaussian_binomial(3, 5, 2) == 0
    assert fq.gaussian_binomial(3, -1, 2) == 0


def test_gaussian_binomial_counts_rref_subspaces():
    assert sum(1 for S in fq.iter_subspaces(4, 2) if len(S) == 2) == 35


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_q_pascal(q):
    for n in range(1, 13):
        for k in range(1, n + 1):
            lhs = fq.gaussian_binomial(n, k, q)
            assert lhs == fq.gaussian_binomial(n - 1, k - 1, q) + q ** k * fq.gaussian_binomial(n - 1, k, q)


def test_q_one_is_ordinary_binomial():
    for n in range(10):
        for k in range(n + 1):
            assert fq.gaussian_binomial(n, k, 1) == math.comb(n, k)


def test_rank_examples():
    assert fq.rank(((0, 0, 0), (0, 0, 0)), 2) == 0
    assert fq.rank(((1, 0, 0), (0, 1, 0)), 2) == 2
    assert fq.rank(((1, 1, 0), (1, 1, 0)), 2) == 1


@pytest.mark.parametrize("ell,q,size", [(1, 5, 4), (2, 2, 6), (3, 2, 168), (2, 3, 48)])
def test_gl_order(ell, q, size):
    group = fq.enumerate_gl(ell, q)
    assert len(group) == size == fq.gl_order(ell, q)
    assert all(fq.det_nonzero(M, q) for M in group)


def test_gl_closed_under_product_and_inverse():
    group = fq.enumerate_gl(2, 3)
    elems = set(group)
    for A, B in itertools.product(group, repeat=2):
        assert fq.matmul(A, B, 3) in elems
    for A in group:
        assert fq.inverse(A, 3) in elems
        assert fq.matmul(A, fq.inverse(A, 3), 3) == fq.identity(2)


def test_gl_order_is_lexicographic():
    elems = list(fq.enumerate_gl(2, 2))
    flat = [sum(M, ()) for M in elems]
    assert flat == sorted(flat)


def test_m_qst_examples():
    assert fq.count_m_qst(((0, 0), (0, 0)), 1, 2, 2) == 6
    assert fq.count_m_qst(((1, 0), (0, 0)), 1, 2, 2) == 2
    assert fq.count_m_qst(((1, 0), (0, 1)), 1, 2, 2) == 0


@pytest.mark.parametrize("ell,q", [(1, 2), (2, 2), (3, 2), (1, 3), (2, 3)])
def test_m_qst_closed_form_exhaustive(ell, q):
    group = fq.enumerate_gl(ell, q)
    n = 2
    for flat in itertools.product(range(q), repeat=ell * n):
        X = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(ell))
        for s in range(ell + 1):
            for t in range(s, ell + 1):
                assert len(fq.enumerate_m_qst(X, s, t, q, group)) == fq.count_m_qst(X, s, t, q)


def test_m_qst_closed_form_l3_q3_sampled():
    group = fq.enumerate_gl(3, 3)
    for X in [((1, 0), (0, 1), (1, 1)), ((0, 0), (2, 1), (1, 2)), ((0, 0), (0, 0), (0, 1))]:
        for s, t in [(0, 3), (1, 2), (1, 3), (0, 1), (2, 2)]:
            assert len(fq.enumerate_m_qst(X, s, t, 3, group)) == fq.count_m_qst(X, s, t, 3)


def test_rank_is_gl_invariant():
    group = fq.enumerate_gl(2, 2)
    for n in range(1, 4):
        for flat in itertools.product(range(2), repeat=2 * n):
            X = (flat[:n], flat[n:])
            r = fq.rank(X, 2)
            assert all(fq.rank(fq.matmul(M, X, 2), 2) == r for M in group)


@pytest.mark.parametrize("q", [2, 3])
def test_subspace_counts(q):
    for n in range(1, 9 if q == 2 else 6):
        dims = [len(S) for S in fq.iter_subspaces(n, q)]
        for k in range(n + 1):
            assert dims.count(k) == fq.gaussian_binomial(n, k, q)


def test_subspaces_distinct():
    spans = [fq.span(S, 3, 3) for S in fq.iter_subspaces(3, 3)]
    assert len(spans) == len(set(spans)) == fq.subspace_count(3, 3)


def test_span_of_empty_basis():
    assert fq.span((), 2, 3) == frozenset({(0, 0, 0)})


@given(st.integers(0, 3), st.integers(0, 3))
def test_gf4_field_axioms(a, b):
    F = fq.field(4)
    assert F.add[a, b] == F.add[b, a]
    assert F.mul[a, b] == F.mul[b, a]
    if a:
        assert F.mul[a, F.inv[a]] == 1
    for c in range(4):
        assert F.mul[a, F.add[b, c]] == F.add[F.mul[a, b], F.mul[a, c]]


@pytest.mark.parametrize("q", [2, 3, 5, 4])
def test_field_values_below_q(q):
    F = fq.field(q)
    assert F.add.max() < q and F.mul.max() < q


def test_unsupported_field():
    with pytest.raises(UnsupportedField):
        fq.field(6)


def test_gl_budget():
    old = fq.GL_ENUM_MAX_ELEMENTS
    try:
        fq.GL_ENUM_MAX_ELEMENTS = 10
        fq.enumerate_gl.cache_clear()
        with pytest.raises(BudgetExceeded):
            fq.enumerate_gl(3, 2)
    finally:
        fq.GL_ENUM_MAX_ELEMENTS = old
        fq.enumerate_gl.cache_clear()
