from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dualcert import fq
from dualcert import valid as vd
from dualcert.errors import UnsupportedField


def test_vector_examples():
    assert vd.vector_valid((0, 0, 0, 0), vd.distance(3, 4))
    spec = vd.balanced(Fraction(1, 2), 4)
    # window [1, 3]: the boundary weights are inside, weight 4 is outside
    assert vd.vector_valid((1, 1, 0, 0), spec)
    assert vd.vector_valid((1, 0, 0, 0), spec)
    assert not vd.vector_valid((1, 1, 1, 1), spec)
    assert not vd.vector_valid((1, 1, 0, 0, 0), vd.distance(3, 5))


def test_matrix_examples():
    spec = vd.balanced(Fraction(1, 2), 4)
    assert vd.matrix_valid(((0, 0, 0, 0), (0, 0, 0, 0)), spec)
    assert not vd.matrix_valid(((1, 1, 0, 0), (0, 0, 1, 1)), spec)
    assert not vd.matrix_valid(((1, 0), (0, 1)), vd.dim_at_most(1, 2))


def test_enumeration_examples():
    assert len(list(vd.enumerate_valid_matrices(vd.balanced(1, 2), 1))) == 4
    assert list(vd.enumerate_valid_matrices(vd.dim_at_most(0, 3), 2)) == [((0, 0, 0), (0, 0, 0))]
    assert len(list(vd.enumerate_valid_matrices(vd.distance(4, 3), 1))) == 1


@pytest.mark.parametrize("spec", [vd.distance(2, 3), vd.balanced(Fraction(1, 3), 3), vd.dim_at_most(1, 3)])
def test_gl_invariance(spec):
    group = fq.enumerate_gl(2, 2)
    for flat in itertools.product(range(2), repeat=6):
        X = (flat[:3], flat[3:])
        v = vd.matrix_valid(X, spec)
        assert all(vd.matrix_valid(fq.matmul(M, X, 2), spec) == v for M in group)


@given(st.lists(st.integers(0, 1), min_size=8, max_size=8), st.permutations(range(4)))
def test_column_permutation_invariance(flat, sigma):
    X = (tuple(flat[:4]), tuple(flat[4:]))
    Y = tuple(tuple(r[s] for s in sigma) for r in X)
    for spec in (vd.distance(2, 4), vd.balanced(Fraction(1, 2), 4), vd.dim_at_most(1, 4)):
        assert vd.matrix_valid(X, spec) == vd.matrix_valid(Y, spec)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_subspace_closure(n):
    for spec in (vd.distance(2, n), vd.balanced(Fraction(1, 2), n)):
        for S in fq.iter_subspaces(n, 2):
            if not vd.code_valid(S, spec):
                continue
            for T in fq.iter_subspaces(n, 2, range(len(S))):
                if fq.is_subspace_of(T, S, 2):
                    assert vd.code_valid(T, spec)


def test_balanced_requires_binary():
    with pytest.raises(UnsupportedField):
        vd.ValidSpec(vd.EpsilonBalanced(Fraction(1, 2)), 4, 3)


def test_window_is_exact():
    spec = vd.balanced(Fraction(1, 3), 6)  # window [2, 4]
    assert [w for w in range(7) if spec.weight_ok(w)] == [2, 3, 4]


def test_valid_mask_matches_matrix_valid():
    spec = vd.distance(2, 3)
    mask = vd.valid_mask(spec, 2)
    pts = list(itertools.product(range(2), repeat=6))
    for i, flat in enumerate(pts):
        assert mask[i] == vd.matrix_valid((flat[:3], flat[3:]), spec)


def test_parse_and_json():
    for text in ("distance:3", "balanced:1/2", "dim:2"):
        spec = vd.parse_spec(text, 5)
        assert vd.ValidSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        vd.parse_spec("weird:1", 5)
