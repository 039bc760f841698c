from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualcert import configs as cfg
from dualcert import gridfunc as gf
from dualcert import hierarchy as hz
from dualcert import krawtchouk as kw
from dualcert import lift
from dualcert.completeness import build_completeness_cert
from dualcert.gridfunc import GridFunction
from dualcert.valid import balanced, dim_at_most, distance


def _z_strategy(ell, n):
    size = cfg.num_configs(ell, n)
    return st.lists(st.fractions(0, 3, max_denominator=4), min_size=size, max_size=size)


def _cert_from_z(vals, spec, ell):
    z = dict(zip(cfg.all_configs(ell, spec.n), vals))
    return kw.klp_dual_to_certificate(z, spec, ell, check=False)


# ------------------------------------------------------------ LPdual

def test_lpdual_constant_one_dim0():
    spec = dim_at_most(0, 3)
    cert = hz.DualCertificate(hz.LPDUAL, spec, 1, {"g": GridFunction.constant(2, 1, 3, 1), "beta": None})
    rep = hz.check_lpdual(cert)
    assert rep.feasible and rep.objective == 1


@pytest.mark.parametrize("spec", [distance(2, 3), balanced(Fraction(1, 3), 3), dim_at_most(1, 3)])
def test_trivial_lpdual(spec):
    cert = hz.trivial_lpdual(spec, 1)
    rep = hz.check_lpdual(cert)
    assert rep.feasible and rep.objective == 8


def test_lpdual_validity_witness():
    spec = distance(2, 3)
    g = GridFunction.delta(2, 1, 3, value=8) + GridFunction.delta(2, 1, 3, X=((1, 1, 0),))
    g = g / gf.fourier(g).values[0]
    rep = hz.check_lpdual(hz.DualCertificate(hz.LPDUAL, spec, 1, {"g": g, "beta": None}))
    assert not rep.feasible
    assert any(v.constraint == "validity" and v.witness == ((1, 1, 0),) for v in rep.violations)
    assert rep.violation_count == len(rep.violations) > 0


@given(_z_strategy(1, 4), st.sampled_from([2, 3]))
def test_feasible_iff_no_violations(vals, d):
    spec = distance(d, 4)
    rep = hz.check_lpdual(_cert_from_z(vals, spec, 1))
    assert rep.feasible == (not rep.violations)
    assert (rep.status == hz.FEASIBLE) == rep.feasible


@given(_z_strategy(1, 3), st.lists(st.integers(-3, 3), min_size=8, max_size=8))
def test_beta_is_inert_at_q2(vals, beta):
    spec = distance(2, 3)
    cert = _cert_from_z(vals, spec, 1)
    with_beta = hz.DualCertificate(hz.LPDUAL, spec, 1, {"g": cert.payload["g"],
                                                         "beta": GridFunction(2, 1, 3, [Fraction(b) for b in beta])})
    assert hz.check_lpdual(cert).feasible == hz.check_lpdual(with_beta).feasible


# ------------------------------------------------------------ symmpLPdual

def test_symmp_zero_dim0():
    spec = dim_at_most(0, 2)
    cert = hz.DualCertificate(hz.SYMMP, spec, 2, {"g": [GridFunction.zeros(2, 2, 2), GridFunction.zeros(2, 2, 2)]})
    rep = hz.check_symmp(cert)
    assert rep.feasible and rep.objective == 1


def test_symmp_lifted_feasible():
    spec = distance(2, 4)
    cert = lift.lift_level1(hz.lpdual_to_level1(hz.trivial_lpdual(spec, 1)), 2, spec)
    assert hz.check_symmp(cert).feasible


def test_symmp_fourier_witness():
    spec = dim_at_most(0, 2)
    g1 = GridFunction.delta(2, 2, 2, X=((1, 0), (0, 0)), value=-1)
    cert = hz.DualCertificate(hz.SYMMP, spec, 2, {"g": [g1, None]})
    rep = hz.check_symmp(cert)
    assert not rep.feasible
    assert any(v.constraint.startswith("partial_fourier[k=1]") for v in rep.violations)


@pytest.mark.parametrize("n", [2, 3])
def test_gl_average_methods_agree(n):
    spec = distance(2, n)
    cert = lift.lift_level1(hz.lpdual_to_level1(hz.trivial_lpdual(spec, 1)), 2, spec)
    a = hz.check_symmp(cert, method="direct")
    b = hz.check_symmp(cert, method="orbit")
    assert a.feasible == b.feasible and a.violation_count == b.violation_count
    G = hz._symmp_sum(cert)
    na, da = hz.gl_average(G, "direct")
    nb, db = hz.gl_average(G, "orbit")
    assert [Fraction(x, da) for x in na] == [Fraction(x, db) for x in nb]


def test_symmp_note_names_the_method():
    spec = distance(2, 2)
    rep = hz.check_symmp(hz.trivial_symmp(spec, 2))
    assert "gl-average method: direct" in rep.notes


# ------------------------------------------------------------ pLPdual

def test_plp_zero_dim0():
    spec = dim_at_most(0, 2)
    I = ((1, 0), (0, 1))
    cert = hz.DualCertificate(hz.PLPDUAL, spec, 2, {"h": {(2, I): GridFunction.zeros(2, 2, 2)},
                                                    "beta": GridFunction.zeros(2, 2, 2)})
    rep = hz.check_plp(cert)
    assert rep.feasible and rep.objective == 1


def test_plp_negative_h():
    spec = dim_at_most(0, 2)
    I = ((1, 0), (0, 1))
    h = GridFunction.delta(2, 2, 2, X=((0, 1), (0, 0)), value=-1)
    assert not hz.check_plp(hz.DualCertificate(hz.PLPDUAL, spec, 2, {"h": {(2, I): h}, "beta": None})).feasible


def test_desymmetrize_image_feasible():
    spec = distance(2, 3)
    sym = lift.lift_level1(hz.lpdual_to_level1(hz.trivial_lpdual(spec, 1)), 2, spec)
    plp = hz.desymmetrize(sym)
    rep = hz.check_plp(plp)
    assert rep.feasible and rep.objective == sym.objective()


def test_literal_desymmetrize_keeps_value():
    spec = distance(2, 3)
    sym = lift.lift_level1(hz.lpdual_to_level1(hz.trivial_lpdual(spec, 1)), 2, spec)
    assert hz.desymmetrize(sym, literal=True).objective() == sym.objective()


def test_embed_lpdual():
    spec = distance(2, 3)
    plp = hz.embed_lpdual(hz.trivial_lpdual(spec, 1))
    rep = hz.check_plp(plp)
    assert rep.feasible and rep.objective == 8
    const = hz.DualCertificate(hz.LPDUAL, dim_at_most(0, 3), 1, {"g": GridFunction.constant(2, 1, 3, 1), "beta": None})
    emb = hz.embed_lpdual(const)
    (h,) = emb.payload["h"].values()
    assert all(v == 0 for v in h.values) and emb.objective() == 1


@given(_z_strategy(2, 2))
def test_symmetrization_roundtrip_values(vals):
    spec = distance(1, 2)
    plp = hz.embed_lpdual(_cert_from_z(vals, spec, 2))
    sym = hz.symmetrize(plp)
    assert sym.objective() == plp.objective()
    assert hz.desymmetrize(sym).objective() == plp.objective()
    if hz.check_plp(plp).feasible:
        assert hz.check_symmp(sym).feasible
        assert hz.check_plp(hz.desymmetrize(sym)).feasible


# ------------------------------------------------------------ Mdual

def test_mdual_examples():
    cert = build_completeness_cert(1, 1, 1, 2)
    rep = hz.check_mdual(cert)
    assert rep.feasible and rep.objective == 2
    bad = build_completeness_cert(2, 2, 2, 2)
    bad.payload["beta"][0] = Fraction(-1)
    assert not hz.check_mdual(bad).feasible
    cert = build_completeness_cert(2, 2, 1, 2)
    cert.payload["alpha"] += 1
    rep = hz.check_mdual(cert)
    assert not rep.feasible
    assert any(v.constraint == "equality-to-objective" and len(v.witness) == 1 for v in rep.violations)


# ------------------------------------------------------------ primal

def test_primal_from_code():
    assert hz.primal_from_code((), 2, 3)[0] == 1
    full = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    size, f = hz.primal_from_code(full, 2, 3)
    assert size == 64 and all(v == 1 for v in f.values)
    size, f = hz.primal_from_code(((1, 1, 0), (0, 1, 1)), 2, 3)
    assert size == 16 == sum(f.values)


@pytest.mark.parametrize("spec,basis", [(distance(2, 3), ((1, 1, 0), (0, 1, 1))), (dim_at_most(1, 3), ((1, 0, 1),))])
def test_weak_duality_against_primal_codes(spec, basis):
    _, sol, red = kw.solve_klp(spec, 2)
    cert = kw.klp_dual_to_certificate(kw.reduced_dual_from_primal(red, sol), spec, 2)
    size, _ = hz.primal_from_code(basis, 2, 3)
    assert cert.objective() >= size


# ------------------------------------------------------------ JSON

def test_json_roundtrip_all_formulations():
    spec = distance(2, 3)
    certs = [hz.trivial_lpdual(spec, 1), hz.trivial_symmp(spec, 2), hz.embed_lpdual(hz.trivial_lpdual(spec, 1)),
             build_completeness_cert(2, 2, 1, 2)]
    for cert in certs:
        back = hz.cert_from_json(hz.cert_to_json(cert))
        assert back.formulation == cert.formulation and back.objective() == cert.objective()
        assert hz.check(back).feasible == hz.check(cert).feasible


def test_report_json_is_exact():
    rep = hz.check_lpdual(hz.trivial_lpdual(distance(2, 3), 1))
    assert rep.to_json()["objective"] == "8/1"
