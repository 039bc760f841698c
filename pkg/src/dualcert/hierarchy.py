"""Dual certificates for every formulation of the hierarchy and exact checkers for them.

Formulations:

* ``LPdual``       g with hat g(0) = 1, hat g >= 0, g + beta - beta(-.) <= 0 on valid nonzero X.
* ``pLPdual``      h_{k,M} >= 0 and 1 + sum F_{k,M}(h_{k,M}) + beta - beta(-.) <= 0 on valid nonzero X.
* ``symmpLPdual``  g_1..g_l with F_k(g_k) >= 0 and 1 + GL-average of sum_k g_k <= 0 on valid nonzero X.
* ``Mdual``        (alpha, beta, gamma) over the subspace lattice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import configs as cfg
from . import fq
from . import gridfunc as gf
from .errors import BudgetExceeded, ShapeMismatch
from .gridfunc import GridFunction
from .valid import ValidSpec, code_valid, valid_mask

LPDUAL, PLPDUAL, SYMMP, MDUAL = "LPdual", "pLPdual", "symmpLPdual", "Mdual"
FORMULATIONS = (LPDUAL, PLPDUAL, SYMMP, MDUAL)

FEASIBLE, INFEASIBLE, TOLERANCE = "feasible", "infeasible", "feasible-within-tolerance"

SYMMP_WORK_CAP = 2 ** 25
MAX_LISTED_VIOLATIONS = 50


# --------------------------------------------------------------------- types

@dataclass
class DualCertificate:
    formulation: str
    spec: ValidSpec
    ell: int
    payload: dict

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {self.formulation!r}")

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def n(self) -> int:
        return self.spec.n

    def objective(self):
        p = self.payload
        if self.formulation == LPDUAL:
            return p["g"].at_zero()
        if self.formulation == SYMMP:
            return 1 + sum((g.at_zero() for g in p["g"] if g is not None), Fraction(0))
        if self.formulation == PLPDUAL:
            tot = Fraction(1)
            for (k, M), h in p["h"].items():
                tot += _partial_at_zero(h, k, M)
            return tot
        return Fraction(p["alpha"])


def _partial_at_zero(h: GridFunction, k: int, M) -> Fraction:
    # F_{k,M}(h)(0) = F_k(h.M)(0) = q^{-kn} sum over the first k rows with the rest zero
    hm = gf.act_gl(h.to_dense(), M) if M is not None else h.to_dense()
    block = hm.values[: hm.q ** (k * hm.n)] if k == hm.ell else None
    if block is None:
        # rows k+1..l are the least significant digits; zero there means stride q^{(l-k)n}
        stride = hm.q ** ((hm.ell - k) * hm.n)
        block = hm.values[::stride]
    return sum(block, Fraction(0)) / hm.q ** (k * hm.n)


@dataclass
class Violation:
    constraint: str
    witness: Any
    lhs: Any
    relation: str

    def to_json(self) -> dict:
        lhs = self.lhs
        if isinstance(lhs, Fraction):
            lhs = gf.frac_str(lhs)
        elif isinstance(lhs, complex):
            lhs = [lhs.real, lhs.imag]
        return {"constraint": self.constraint, "witness": _jsonable(self.witness), "lhs": lhs, "relation": self.relation}


def _jsonable(w):
    if isinstance(w, tuple):
        return [_jsonable(x) for x in w]
    if isinstance(w, (np.integer,)):
        return int(w)
    return w


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list = field(default_factory=list)
    objective: Any = None
    status: str = FEASIBLE
    violation_count: int = 0
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        obj = self.objective
        return {
            "feasible": self.feasible,
            "status": self.status,
            "objective": gf.frac_str(obj) if isinstance(obj, (Fraction, int)) else obj,
            "violation_count": self.violation_count,
            "violations": [v.to_json() for v in self.violations],
            "notes": list(self.notes),
        }


class _Collector:
    def __init__(self):
        self.violations = []
        self.count = 0
        self.approx = False
        self.notes = []

    def add(self, constraint, witness, lhs, relation):
        self.count += 1
        if len(self.violations) < MAX_LISTED_VIOLATIONS:
            self.violations.append(Violation(constraint, witness, lhs, relation))

    def report(self, objective) -> FeasibilityReport:
        feasible = self.count == 0
        status = INFEASIBLE if not feasible else (TOLERANCE if self.approx else FEASIBLE)
        return FeasibilityReport(feasible, self.violations, objective, status, self.count, self.notes)


def _check_shape(f: GridFunction, q, ell, n, what):
    if f.shape != (q, ell, n):
        raise ShapeMismatch(f"{what} has shape {f.shape}, expected {(q, ell, n)}")


def _scan_nonneg(col: _Collector, F: GridFunction, name: str):
    """Record every point where F < 0 (exact) or Re F < -tol / |Im F| > tol (complex)."""
    ell, n, q = F.ell, F.n, F.q
    if F.is_complex:
        col.approx = True
        vals = F.values
        bad = np.nonzero((vals.real < -gf.COMPLEX_TOL) | (np.abs(vals.imag) > gf.COMPLEX_TOL))[0]
        for i in bad:
            col.add(name, gf.matrix_at(int(i), ell, n, q), complex(vals[i]), ">= 0")
        return
    D = F.to_dense() if F.repr == "dense" else F
    if D.repr == "symmetric":
        for g, v in zip(cfg.all_configs(ell, n, q), D.values):
            if v < 0:
                col.add(name, ("config", g), v, ">= 0")
        return
    for i, v in enumerate(D.values):
        if v < 0:
            col.add(name, gf.matrix_at(i, ell, n, q), v, ">= 0")


def _valid_nonzero(spec: ValidSpec, ell: int) -> np.ndarray:
    mask = valid_mask(spec, ell).copy()
    mask[0] = False
    return mask


def _neg_index(ell, n, q) -> np.ndarray:
    if q == 2:
        return np.arange(2 ** (ell * n))
    digits = cfg.dense_digits(ell, n, q)
    return np.einsum("pin,in->p", (-digits) % q, gf._weights(ell, n, q))


# ------------------------------------------------------------------- LPdual

def check_lpdual(cert: DualCertificate, spec: ValidSpec | None = None) -> FeasibilityReport:
    spec = spec or cert.spec
    q, n, ell = spec.q, spec.n, cert.ell
    g = cert.payload["g"]
    _check_shape(g, q, ell, n, "g")
    beta = cert.payload.get("beta")
    col = _Collector()
    gd = g.to_dense()
    ghat = gf.fourier(gd)
    # normalization
    z = ghat.values[0]
    if ghat.is_complex:
        col.approx = True
        if abs(z - 1) > gf.COMPLEX_TOL:
            col.add("normalization", gf.matrix_at(0, ell, n, q), complex(z), "= 1")
    elif z != 1:
        col.add("normalization", gf.matrix_at(0, ell, n, q), z, "= 1")
    # validity
    lhs = gd.values.copy()
    if beta is not None:
        _check_shape(beta, q, ell, n, "beta")
        bd = beta.to_dense().values
        lhs = lhs + bd - bd[_neg_index(ell, n, q)]
    for i in np.nonzero(_valid_nonzero(spec, ell))[0]:
        if lhs[i] > 0:
            col.add("validity", gf.matrix_at(int(i), ell, n, q), lhs[i], "<= 0")
    _scan_nonneg(col, ghat, "fourier")
    return col.report(gd.at_zero())


def trivial_lpdual(spec: ValidSpec, ell: int) -> DualCertificate:
    """g = q^{l n} * indicator(0): feasible for every spec, objective q^{l n}."""
    g = GridFunction.delta(spec.q, ell, spec.n, value=spec.q ** (ell * spec.n))
    return DualCertificate(LPDUAL, spec, ell, {"g": g, "beta": None})


# ------------------------------------------------------------------- symmpLPdual

def rowspace_classes(ell: int, n: int, q: int):
    """Label every dense index by its row space; returns (labels, class sizes)."""
    gf.check_dense_budget(q, ell, n)
    digits = cfg.dense_digits(ell, n, q)
    us = np.array(list(itertools.product(range(q), repeat=ell)), dtype=np.int64)  # (q^l, l)
    combos = np.einsum("ui,pin->pun", us, digits) % q
    vec_ints = np.einsum("pun,n->pu", combos, q ** np.arange(n - 1, -1, -1, dtype=np.int64))
    vec_ints.sort(axis=1)
    _, labels, counts = np.unique(vec_ints, axis=0, return_inverse=True, return_counts=True)
    return labels.reshape(-1), counts


def _symmp_sum(cert: DualCertificate) -> GridFunction:
    q, n, ell = cert.q, cert.n, cert.ell
    total = GridFunction.zeros(q, ell, n)
    for g in cert.payload["g"]:
        if g is not None:
            _check_shape(g, q, ell, n, "g_k")
            total = total + g.to_dense()
    return total


def resolve_average_method(ell: int, n: int, q: int, method: str = "auto") -> str:
    if method != "auto":
        return method
    order = fq.gl_order(ell, q)
    return "direct" if order * q ** (ell * n) <= SYMMP_WORK_CAP and order <= fq.GL_ENUM_MAX_ELEMENTS else "orbit"


def gl_average(G: GridFunction, method: str = "auto") -> tuple:
    """(1/|GL|) sum_M G(M X) for every X, as (integer numerators, common denominator)."""
    q, ell, n = G.q, G.ell, G.n
    order = fq.gl_order(ell, q)
    ints, den = gf.to_scaled(G.to_dense().values)
    method = resolve_average_method(ell, n, q, method)
    if method == "direct":
        if order * q ** (ell * n) > SYMMP_WORK_CAP:
            raise BudgetExceeded(f"|GL| * q^(l n) = {order * q ** (ell * n)} exceeds the work cap")
        arr = gf._maybe_int64(ints, int(order).bit_length() + 1)
        acc = np.zeros(len(arr), dtype=arr.dtype)
        for M in fq.enumerate_gl(ell, q):
            acc = acc + arr[gf.gl_index_map(M, n, q)]
        return [int(x) for x in acc], den * order
    if method == "orbit":
        # GL acts transitively on the matrices with a given row space
        labels, counts = rowspace_classes(ell, n, q)
        sums = [0] * len(counts)
        for lab, v in zip(labels, ints):
            sums[lab] += int(v)
        lcm = math.lcm(*[int(c) for c in counts])
        scaled = [sums[lab] * (lcm // int(counts[lab])) for lab in labels]
        return scaled, den * lcm
    raise ValueError(f"unknown method {method!r}")


def check_symmp(cert: DualCertificate, spec: ValidSpec | None = None, method: str = "auto") -> FeasibilityReport:
    spec = spec or cert.spec
    q, n, ell = spec.q, spec.n, cert.ell
    gs = cert.payload["g"]
    if len(gs) != ell:
        raise ShapeMismatch("symmpLPdual needs exactly l functions g_1..g_l")
    col = _Collector()
    for k, g in enumerate(gs, start=1):
        if g is None:
            continue
        _check_shape(g, q, ell, n, f"g_{k}")
        _scan_nonneg(col, gf.partial_fourier(g.to_dense(), k), f"partial_fourier[k={k}]")
    G = _symmp_sum(cert)
    method = resolve_average_method(ell, n, q, method)
    nums, den = gl_average(G, method)
    for i in np.nonzero(_valid_nonzero(spec, ell))[0]:
        v = nums[i]
        if den + v > 0:  # 1 + v/den > 0
            col.add("validity", gf.matrix_at(int(i), ell, n, q), 1 + Fraction(v, den), "<= 0")
    col.notes.append(f"gl-average method: {method}")
    return col.report(cert.objective())


def trivial_symmp(spec: ValidSpec, ell: int) -> DualCertificate:
    """g_l = q^{ln} indicator(0) - 1, other g_u = 0; objective q^{ln}."""
    q, n = spec.q, spec.n
    gs = [None] * ell
    gs[ell - 1] = GridFunction.delta(q, ell, n, value=q ** (ell * n)) - 1
    return DualCertificate(SYMMP, spec, ell, {"g": gs})


def level_certificate(h_list, spec: ValidSpec) -> DualCertificate:
    """Wrap level-k functions h_1..h_k as a symmpLPdual certificate at level k."""
    return DualCertificate(SYMMP, spec, len(h_list), {"g": list(h_list)})


# ------------------------------------------------------------------- pLPdual

def check_plp(cert: DualCertificate, spec: ValidSpec | None = None) -> FeasibilityReport:
    spec = spec or cert.spec
    q, n, ell = spec.q, spec.n, cert.ell
    col = _Collector()
    total = GridFunction.zeros(q, ell, n)
    for (k, M), h in sorted(cert.payload["h"].items(), key=lambda kv: (kv[0][0], kv[0][1])):
        _check_shape(h, q, ell, n, f"h[{k},{M}]")
        hd = h.to_dense()
        for i, v in enumerate(hd.values):
            if v < 0:
                col.add(f"nonnegativity[k={k},M={M}]", gf.matrix_at(i, ell, n, q), v, ">= 0")
        total = total + gf.partial_fourier(hd, k, M)
    lhs = total.values + 1
    beta = cert.payload.get("beta")
    if beta is not None:
        bd = beta.to_dense().values
        lhs = lhs + bd - bd[_neg_index(ell, n, q)]
    if total.is_complex:
        col.approx = True
        for i in np.nonzero(_valid_nonzero(spec, ell))[0]:
            if lhs[i].real > gf.COMPLEX_TOL or abs(lhs[i].imag) > gf.COMPLEX_TOL:
                col.add("validity", gf.matrix_at(int(i), ell, n, q), complex(lhs[i]), "<= 0")
        obj = complex(lhs[0] - (0 if beta is None else 0))
        return col.report(obj)
    for i in np.nonzero(_valid_nonzero(spec, ell))[0]:
        if lhs[i] > 0:
            col.add("validity", gf.matrix_at(int(i), ell, n, q), lhs[i], "<= 0")
    return col.report(cert.objective())


def embed_lpdual(cert: DualCertificate) -> DualCertificate:
    """LPdual -> pLPdual: h_{l,I} = q^{nl}(hat g - 1_0), beta'(X) = beta(-X)."""
    if cert.formulation != LPDUAL:
        raise ValueError("embed_lpdual expects an LPdual certificate")
    q, n, ell = cert.q, cert.n, cert.ell
    g = cert.payload["g"].to_dense()
    h = (gf.fourier(g) - GridFunction.delta(q, ell, n)) * q ** (n * ell)
    beta = cert.payload.get("beta")
    if beta is not None:
        bd = beta.to_dense()
        beta = GridFunction(q, ell, n, bd.values[_neg_index(ell, n, q)])
    return DualCertificate(PLPDUAL, cert.spec, ell, {"h": {(ell, fq.identity(ell)): h}, "beta": beta})


def lpdual_to_level1(cert: DualCertificate) -> GridFunction:
    """A level-1 LPdual g becomes the symmpLPdual function h = g(-x) - 1 (same objective)."""
    if cert.ell != 1:
        raise ValueError("expects a level-1 certificate")
    g = cert.payload["g"].to_dense()
    neg = _neg_index(1, cert.n, cert.q)
    return GridFunction(cert.q, 1, cert.n, g.values[neg]) - 1


# ----------------------------------------------------------- symmetrization

def symmetrize(cert: DualCertificate) -> DualCertificate:
    """pLPdual -> symmpLPdual: g_k = sum_M F_{k,M}(h_{k,M}) . M."""
    if cert.formulation != PLPDUAL:
        raise ValueError("symmetrize expects a pLPdual certificate")
    q, n, ell = cert.q, cert.n, cert.ell
    gs = [None] * ell
    for (k, M), h in cert.payload["h"].items():
        term = gf.act_gl(gf.partial_fourier(h.to_dense(), k, M), M)
        gs[k - 1] = term if gs[k - 1] is None else gs[k - 1] + term
    return DualCertificate(SYMMP, cert.spec, ell, {"g": gs})


def desymmetrize(cert: DualCertificate, literal: bool = False) -> DualCertificate:
    """symmpLPdual -> pLPdual with beta = 0.

    h_{k,M} = (q^{kn}/|GL|) F_{k,M}(g_k . M^{-1}), which equals (q^{kn}/|GL|) F_k(g_k) . M^{-1}
    and is therefore non-negative. ``literal=True`` uses g_k . M in place of g_k . M^{-1}; that
    variant keeps the objective but can produce negative h.
    """
    if cert.formulation != SYMMP:
        raise ValueError("desymmetrize expects a symmpLPdual certificate")
    q, n, ell = cert.q, cert.n, cert.ell
    group = fq.enumerate_gl(ell, q)
    order = len(group)
    hs = {}
    for k, g in enumerate(cert.payload["g"], start=1):
        if g is None:
            continue
        gd = g.to_dense()
        scale = Fraction(q ** (k * n), order)
        Fk = gf.partial_fourier(gd, k) if not literal else None
        for M in group:
            Minv = fq.inverse(M, q)
            if literal:
                h = gf.partial_fourier(gf.act_gl(gd, M), k, M) * scale
            else:
                h = gf.act_gl(Fk, Minv) * scale
            hs[(k, M)] = h
    return DualCertificate(PLPDUAL, cert.spec, ell, {"h": hs, "beta": None})


# -------------------------------------------------------------------- primal

def primal_from_code(basis, ell: int, n: int, q: int = 2):
    """f_C(X) = 1[X_1..X_l in C]; returns (|C|^l, f_C)."""
    basis = fq.as_mat(basis) if basis else ()
    C = fq.span(basis, q) if basis else frozenset({(0,) * n})
    size = len(C)
    gf.check_dense_budget(q, ell, n)
    digits = cfg.dense_digits(ell, n, q)
    vals = [Fraction(int(all(tuple(int(x) for x in row) in C for row in d))) for d in digits]
    return size ** ell, GridFunction(q, ell, n, vals)


# --------------------------------------------------------------------- Mdual

def mdual_beta(cert: DualCertificate, T) -> Fraction:
    p = cert.payload
    key = len(T) if p.get("by_dim", False) else tuple(T)
    return Fraction(p["beta"].get(key, 0))


def mdual_gamma(cert: DualCertificate, T) -> Fraction:
    p = cert.payload
    key = len(T) if p.get("by_dim", False) else tuple(T)
    return Fraction(p["gamma"].get(key, 0))


def check_mdual(cert: DualCertificate, spec: ValidSpec | None = None) -> FeasibilityReport:
    """alpha = |S|^l (1 + sum_{T >= S} beta(T)) + sum_{T <= S} gamma(T) for each valid S; beta, gamma >= 0."""
    spec = spec or cert.spec
    q, n, ell = spec.q, spec.n, cert.ell
    col = _Collector()
    subspaces = list(fq.iter_subspaces(n, q))
    if len(subspaces) > 200000:
        raise BudgetExceeded("subspace lattice too large")
    betas = [mdual_beta(cert, T) for T in subspaces]
    gammas = [mdual_gamma(cert, T) for T in subspaces]
    for T, b, c in zip(subspaces, betas, gammas):
        if b < 0:
            col.add("beta-nonnegativity", T, b, ">= 0")
        if c < 0:
            col.add("gamma-nonnegativity", T, c, ">= 0")
    alpha = Fraction(cert.payload["alpha"])
    # containment via rank: S <= T iff rank(T + S) == rank(T)
    ranks = [len(T) for T in subspaces]
    for S, dS in zip(subspaces, ranks):
        if not code_valid(S, spec):
            continue
        up = Fraction(0)
        down = Fraction(0)
        for T, dT, b, c in zip(subspaces, ranks, betas, gammas):
            if dT >= dS and b and fq.is_subspace_of(S, T, q):
                up += b
            if dT <= dS and c and fq.is_subspace_of(T, S, q):
                down += c
        size = q ** (dS * ell)
        rhs = size + size * up + down
        if rhs != alpha:
            col.add("equality-to-objective", S, rhs, f"= {alpha}")
    return col.report(alpha)


def check(cert: DualCertificate, spec: ValidSpec | None = None) -> FeasibilityReport:
    return {LPDUAL: check_lpdual, PLPDUAL: check_plp, SYMMP: check_symmp, MDUAL: check_mdual}[cert.formulation](
        cert, spec)


# ---------------------------------------------------------------------- JSON

def _mat_key(M) -> str:
    return ";".join(",".join(str(x) for x in row) for row in M)


def _parse_mat(s: str):
    return tuple(tuple(int(x) for x in row.split(",")) for row in s.split(";"))


def cert_to_json(cert: DualCertificate) -> dict:
    p = cert.payload
    if cert.formulation == LPDUAL:
        payload = {"g": gf.to_json(p["g"]), "beta": None if p.get("beta") is None else gf.to_json(p["beta"])}
    elif cert.formulation == SYMMP:
        payload = {"g": [None if g is None else gf.to_json(g) for g in p["g"]]}
    elif cert.formulation == PLPDUAL:
        payload = {
            "h": [{"k": k, "M": _mat_key(M), "values": gf.to_json(h)} for (k, M), h in sorted(p["h"].items())],
            "beta": None if p.get("beta") is None else gf.to_json(p["beta"]),
        }
    else:
        def keyed(d):
            if p.get("by_dim", False):
                return {str(k): gf.frac_str(v) for k, v in sorted(d.items())}
            return {(_mat_key(k) if k else ""): gf.frac_str(v) for k, v in sorted(d.items())}
        payload = {"alpha": gf.frac_str(p["alpha"]), "by_dim": bool(p.get("by_dim", False)),
                   "beta": keyed(p["beta"]), "gamma": keyed(p["gamma"])}
    return {
        "schema": 1,
        "formulation": cert.formulation,
        "spec": cert.spec.to_json(),
        "q": cert.q,
        "l": cert.ell,
        "n": cert.n,
        "payload": payload,
        "claimed_objective": gf.frac_str(cert.objective()),
    }


def cert_from_json(obj: dict) -> DualCertificate:
    if obj.get("schema") != 1:
        raise ValueError("unsupported certificate schema")
    spec = ValidSpec.from_json(obj["spec"])
    form, ell, p = obj["formulation"], int(obj["l"]), obj["payload"]
    if form == LPDUAL:
        payload = {"g": gf.from_json(p["g"]), "beta": None if p.get("beta") is None else gf.from_json(p["beta"])}
    elif form == SYMMP:
        payload = {"g": [None if g is None else gf.from_json(g) for g in p["g"]]}
    elif form == PLPDUAL:
        payload = {"h": {(int(e["k"]), _parse_mat(e["M"])): gf.from_json(e["values"]) for e in p["h"]},
                   "beta": None if p.get("beta") is None else gf.from_json(p["beta"])}
    elif form == MDUAL:
        by_dim = bool(p.get("by_dim", False))

        def unkey(d):
            if by_dim:
                return {int(k): Fraction(v) for k, v in d.items()}
            return {(_parse_mat(k) if k else ()): Fraction(v) for k, v in d.items()}
        payload = {"alpha": Fraction(p["alpha"]), "by_dim": by_dim, "beta": unkey(p["beta"]), "gamma": unkey(p["gamma"])}
    else:
        raise ValueError(f"unknown formulation {form!r}")
    return DualCertificate(form, spec, ell, payload)
