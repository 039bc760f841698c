from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualcert import configs as cfg
from dualcert import gridfunc as gf
from dualcert import oracle
from dualcert import spectral as sp
from dualcert.errors import BudgetExceeded, NoRoot, PreconditionError
from dualcert.gridfunc import GridFunction

HALF = Fraction(1, 2)


# ------------------------------------------------------------ parameters

def test_tau_vertex_uniform_example():
    assert sp.choose_tau(sp.VERTEX_UNIFORM, 0.3, 1, 2).tau == pytest.approx(0.1)


@pytest.mark.parametrize("family", [sp.VERTEX_UNIFORM, sp.QUASIRANDOM])
@pytest.mark.parametrize("ell,m", [(1, 2), (2, 2), (2, 4)])
def test_tau_leading_term(family, ell, m):
    eps = 1e-3
    tau = sp.choose_tau(family, eps, ell, m).tau
    lead = eps ** 2 * 2 ** ((4 * ell - 1) / m) * m ** (1 / m) / 4
    assert tau / lead == pytest.approx(1, rel=1e-2)


def test_no_root_and_clamp():
    with pytest.raises(NoRoot) as err:
        sp.choose_tau(sp.VERTEX_UNIFORM, HALF, 2, 2)
    assert err.value.max_eps == pytest.approx(0.1768, abs=1e-4)
    with pytest.raises(NoRoot) as err:
        sp.choose_tau(sp.QUASIRANDOM, HALF, 2, 2)
    assert err.value.max_eps == pytest.approx(0.1484, abs=1e-4)
    assert sp.choose_tau(sp.VERTEX_UNIFORM, HALF, 2, 2, clamp=True).tau == 0.25
    assert sp.choose_tau(sp.QUASIRANDOM, HALF, 2, 2, clamp=True).clamped


def test_vertex_uniform_exact_boundary():
    choice = sp.choose_tau(sp.VERTEX_UNIFORM, HALF, 1, 2)
    assert choice.tau == 0.5 and not choice.clamped


def test_quasirandom_root_residual():
    choice = sp.choose_tau(sp.QUASIRANDOM, 0.1, 2, 2)
    assert abs(sp.qr_expression(choice.tau, 2, 2, 0.1)) < 1e-9


@given(st.sampled_from([sp.VERTEX_UNIFORM, sp.QUASIRANDOM]), st.integers(1, 3),
       st.fractions(0, Fraction(1, 4), max_denominator=64))
def test_normalized_config_sums_to_one(family, ell, tau):
    G = sp.normalized_config(family, ell, tau)
    assert sum(G) == 1 and all(x >= 0 for x in G)


def test_rounding_examples():
    assert sp.round_config((Fraction(7, 10), Fraction(3, 10)), 10) == (7, 3)
    assert sp.round_config((HALF, HALF), 10) == (5, 5)
    g = sp.round_config([Fraction(1, 4)] * 4, 6)
    assert sum(g) == 6 and set(g) <= {1, 2}
    assert sp.round_config([Fraction(1, 4)] * 4, 6) == (2, 2, 1, 1)


@given(st.lists(st.integers(0, 20), min_size=4, max_size=4).filter(sum), st.integers(1, 30))
def test_rounding_is_a_configuration(weights, n):
    G = [Fraction(w, sum(weights)) for w in weights]
    g = sp.round_config(G, n)
    assert sum(g) == n
    assert all(abs(c - x * n) < 1 for c, x in zip(g, G))


def test_entropy_examples():
    assert sp.entropy([Fraction(1, 4)] * 4) == pytest.approx(2)
    assert sp.entropy(sp.normalized_config(sp.VERTEX_UNIFORM, 1, HALF)) == pytest.approx(1)
    h = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    assert sp.entropy(sp.normalized_config(sp.QUASIRANDOM, 2, Fraction(1, 4))) == pytest.approx(2 * h)
    assert 2 * h == pytest.approx(2 * 0.811278, abs=1e-6)


def test_mrrw_leading():
    eps = 0.1
    assert sp.mrrw_leading(eps) == pytest.approx(eps ** 2 * math.log2(1 / eps) / 4)


def test_m_bound():
    with pytest.raises(PreconditionError):
        sp.check_m_bound(1, 3, HALF)
    with pytest.raises(PreconditionError):
        sp.check_m_bound(3, 2, Fraction(3, 4))
    sp.check_m_bound(2, 2, HALF)


# ------------------------------------------------------------ Phi_m

def test_phi_zero_closed_form():
    assert sp.big_phi(cfg.zero_config(1, 4), 2, HALF) == sp.phi_zero_closed_form(1, 4, 2, HALF) == 12
    for ell, n in [(1, 7), (2, 5)]:
        for m in (2, 4):
            assert sp.big_phi(cfg.zero_config(ell, n), m, HALF) == sp.phi_zero_closed_form(ell, n, m, HALF)


@pytest.mark.parametrize("ell,n,m,eps", [(1, 12, 2, HALF), (2, 8, 2, Fraction(1, 4)), (2, 6, 4, HALF)])
def test_sign_scan(ell, n, m, eps):
    res = sp.sign_scan(ell, n, m, eps)
    assert res.ok and res.points == 2 ** (ell * n)


def test_sign_scan_by_configuration_agrees():
    a = sp.sign_scan(2, 5, 2, HALF)
    b = sp.sign_scan(2, 5, 2, HALF, dense=False)
    assert a.violations == b.violations == 0 and b.parity_ok


def test_big_phi_function_dense_values():
    f = sp.big_phi_function(1, 3, 2, HALF).to_dense()
    for i in range(8):
        X = gf.matrix_at(i, 1, 3, 2)
        assert f.values[i] == sp.big_phi(cfg.config_of(X), 2, HALF)


# ------------------------------------------------------------ walks

def test_walk_identity():
    psi = GridFunction(2, 2, 3, [Fraction(j) for j in range(cfg.num_configs(2, 3))], "symmetric")
    assert sp.apply_walk(cfg.zero_config(2, 3), psi).equals(psi)


def test_walk_hypercube_example():
    psi = sp.class_indicator((2, 1), 1)
    out = sp.apply_walk((2, 1), psi)
    assert out.at_config((3, 0)) == 3 and out.at_config((1, 2)) == 2
    assert list(out.values) == [3, 0, 2, 0]


def test_walk_l2_matches_dense():
    psi = sp.class_indicator(cfg.zero_config(2, 2), 2)
    h = (1, 0, 1, 0)  # one column equal to (1,0)
    out = sp.apply_walk(h, psi).to_dense().values
    ref = oracle.apply_dense_operator(h, psi.to_dense().values, 1, 2, 2)
    assert list(out) == list(ref)


@given(st.integers(1, 3), st.integers(0, 3))
def test_apply_step_matches_walk(v, seed):
    n = 3
    rng = np.random.default_rng(seed)
    psi = GridFunction(2, 2, n, [Fraction(int(x)) for x in rng.integers(-3, 4, cfg.num_configs(2, n))], "symmetric")
    h = [n - 1, 0, 0, 0]
    h[v] += 1
    assert sp.apply_step(v, psi).equals(sp.apply_walk(tuple(h), psi))


def test_exact_walk_examples():
    assert sp.exact_walk_count((3, 2), 1, 0) == 1
    assert sp.exact_walk_count((3, 2), 1, 2) == 17 == 2 * 2 * 3 + 5
    assert sp.exact_walk_count((2, 0), 1, 1) == 0
    assert oracle.dense_walk_count((3, 2), (1,), 2, 1, 5) == 17
    assert oracle.dense_walk_count((2, 0), (1,), 1, 1, 2) == 0


@pytest.mark.parametrize("g0,v,m", [((1, 1, 1, 0), 1, 2), ((2, 1, 0, 1), 3, 4), ((1, 0, 2, 1), 2, 3), ((3, 1), 1, 4)])
def test_exact_walk_matches_dense(g0, v, m):
    ell = 2 if len(g0) == 4 else 1
    vec = cfg.column_value(v, ell, 2)
    assert sp.exact_walk_count(g0, v, m) == oracle.dense_walk_count(g0, vec, m, ell, sum(g0))


def test_asymptotic_examples():
    assert sp.asymptotic_walk_count((3, 2), 1, 2) == 12
    assert sp.asymptotic_walk_count((3, 2), 1, 0) == 1
    g0 = (2, 1, 3, 1)
    # cosets {0, 2} and {1, 3} for v = (1,0)
    assert sp.asymptotic_walk_count(g0, (1, 0), 2) == 2 * 2 * 3 + 2 * 1 * 1


def test_walk_ratio_improves():
    g = [sp.round_config(sp.normalized_config(sp.QUASIRANDOM, 2, Fraction(1, 2)), n) for n in (8, 16, 24)]
    err = [abs(Fraction(sp.exact_walk_count(x, 1, 2), sp.asymptotic_walk_count(x, 1, 2)) - 1) for x in g]
    assert err[0] > err[1] > err[2]


# ------------------------------------------------------------ M_m

def test_mm_level1_is_shifted_square():
    n, m = 4, 2
    for g0 in cfg.all_configs(1, n):
        lam = sp.class_indicator(g0, 1)
        ref = oracle.apply_dense_operator((n - 1, 1), lam.to_dense().values, m, 1, n)
        ref = [x - (HALF * n) ** m * y for x, y in zip(ref, lam.to_dense().values)]
        assert list(sp.apply_Mm(lam, m, HALF).to_dense().values) == ref


@pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (2, 4), (3, 4)])
def test_mm_decomposition(n, m):
    for g0 in cfg.all_configs(2, n):
        lam = sp.class_indicator(g0, 2)
        assert sp.apply_Mm(lam, m, HALF).equals(sp.apply_Mm_decomposed(lam, m, HALF))


def test_mm_literal_decomposition_differs():
    lam = sp.class_indicator((1, 1, 1, 0), 2)
    assert not sp.apply_Mm(lam, 2, HALF).equals(sp.apply_Mm_decomposed(lam, 2, HALF, literal=True))


def test_hat_phi_identity_l1():
    n, m = 4, 2
    phi_hat = gf.fourier(sp.big_phi_function(1, n, m, HALF).to_dense())
    for g0 in cfg.all_configs(1, n):
        lam = sp.class_indicator(g0, 1)
        lhs = gf.convolve(phi_hat, lam.to_dense(), normalized=True) * 2 ** n
        assert lhs.equals(sp.apply_Mm(lam, m, HALF).to_dense())


@pytest.mark.parametrize("ell,n", [(1, 6), (2, 3)])
def test_lambda_hat_and_symmetric_fourier(ell, n):
    for g0 in cfg.all_configs(ell, n):
        ref = gf.fourier(sp.class_indicator(g0, ell).to_dense())
        assert sp.lambda_hat(g0, ell).to_dense().equals(ref)
    f = GridFunction.from_config_callable(2, ell, n, lambda g: sum((i + 1) * c for i, c in enumerate(g)))
    assert sp.symmetric_fourier(f).to_dense().equals(gf.fourier(f.to_dense()))


# ------------------------------------------------------------ pipeline

def test_pipeline_l1():
    params = sp.SpectralParams(1, 2, HALF, 12, sp.VERTEX_UNIFORM)
    cert, diag = sp.build_spectral_certificate(params)
    assert diag.sign_check and diag.feasible
    assert diag.objective == cert.objective() == 2079
    assert math.isfinite(diag.rate_constant)
    assert diag.rate <= diag.entropy + max(diag.rate_constant, 0) * math.log2(12) / 12 + 1e-12
    js = diag.to_json()
    assert js["objective"] == "2079/1" and "walk_margins" in js


def test_pipeline_l2_clamped():
    params = sp.SpectralParams(2, 2, HALF, 8, sp.QUASIRANDOM, clamp=True)
    cert, diag = sp.build_spectral_certificate(params)
    assert diag.tau_clamped and diag.sign_check
    assert not diag.hypothesis_holds
    assert diag.feasible


def test_pipeline_respects_budget():
    old = gf.DENSE_MAX_BITS
    try:
        gf.set_dense_budget(10)
        with pytest.raises(BudgetExceeded):
            sp.build_spectral_certificate(sp.SpectralParams(1, 2, HALF, 12))
    finally:
        gf.set_dense_budget(old)
