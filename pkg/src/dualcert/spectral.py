"""Spectral dual solutions for epsilon-balanced binary codes.

f = Phi_m * hat(Lambda)^2 / widehat(Phi_m * hat(Lambda)^2)(0), where Phi_m is a product of
2^l - 1 "cylinder" polynomials in the weights |vX| and Lambda indicates one configuration class.
Everything is S_n-symmetric and handled by configuration, over F_2 only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import configs as cfg
from . import gridfunc as gf
from . import hierarchy as hz
from .errors import BudgetExceeded, DegenerateInput, NoRoot, PreconditionError, ShapeMismatch
from .gridfunc import GridFunction
from .krawtchouk import kraw_column
from .valid import ValidSpec, balanced, config_valid

VERTEX_UNIFORM = "vu"
QUASIRANDOM = "qr"
FAMILIES = (VERTEX_UNIFORM, QUASIRANDOM)
CONTINGENCY_CAP = 5_000_000
TAU_TOL = 1e-12


# ------------------------------------------------------------------ basics

def _dot(u: int, v: int) -> int:
    return bin(u & v).count("1") & 1


def _weight(u: int) -> int:
    return bin(u).count("1")


def vector_index(v) -> int:
    """Column value index of a vector in F_2^l given as a tuple (row 1 first) or an int."""
    if isinstance(v, int):
        return v
    return cfg.column_value_index(v, 2)


def row_weight(g, v: int) -> int:
    """|vX| for X of configuration g: the number of columns w with <v, w> = 1."""
    return sum(c for w, c in enumerate(g) if _dot(v, w))


def h_vector(v: int, ell: int, n: int) -> tuple:
    """The configuration with one column equal to v and n - 1 zero columns."""
    h = [0] * (2 ** ell)
    h[0] = n - 1
    h[v] += 1
    return tuple(h)


def entropy(G) -> float:
    return float(sum(float(x) * math.log2(1 / float(x)) for x in G if x > 0))


def mrrw_leading(eps) -> float:
    e = float(eps)
    return e * e * math.log2(1 / e) / 4


# ------------------------------------------------------------- parameters

def check_m_bound(ell: int, m: int, eps: Fraction) -> None:
    """m even and m >= (l - 1) / lg(1/eps), tested exactly as (1/eps)^m >= 2^(l-1)."""
    eps = Fraction(eps)
    if m <= 0 or m % 2:
        raise PreconditionError("m must be a positive even integer")
    if not 0 < eps < 1:
        raise PreconditionError("need 0 < eps < 1")
    if Fraction(1) / eps ** m < 2 ** (ell - 1):
        raise PreconditionError(f"m={m} is below (l-1)/lg(1/eps) for l={ell}, eps={eps}")


def _tau_coeff(ell: int, m: int) -> float:
    return 2 ** ((4 * ell - 1) / m) * m ** (1 / m)


def qr_expression(tau: float, ell: int, m: int, eps) -> float:
    e = float(eps)
    return 4 * tau * (1 - tau) ** ell * (1 - 2 * tau + 2 * tau * tau) ** (ell - 1) - _tau_coeff(ell, m) * e * e


@dataclass(frozen=True)
class TauChoice:
    tau: float
    family: str
    clamped: bool
    residual: float  # defining expression at tau (0 for an exact root)


def choose_tau(family: str, eps, ell: int, m: int, clamp: bool = False) -> TauChoice:
    """Vertex-uniform: closed form. Quasirandom: first root in [0, 1/2] by bisection.

    With no admissible root NoRoot is raised unless ``clamp`` is set, in which case the
    radicand is clamped at 0 (vertex-uniform, tau = 1/(2l)) or tau = 1/2 (quasirandom).
    """
    c = _tau_coeff(ell, m)
    e2 = float(eps) ** 2
    if family == VERTEX_UNIFORM:
        # radicand 1 - l c eps^2 >= 0  <=>  (l eps^2)^m 2^(4l-1) m <= 1, tested exactly
        e = Fraction(eps)
        exact_ok = (ell * e * e) ** m * 2 ** (4 * ell - 1) * m <= 1
        rad = max(1 - ell * c * e2, 0.0) if exact_ok else 1 - ell * c * e2
        if not exact_ok:
            if not clamp:
                raise NoRoot(f"radicand {rad:.6g} < 0", max_eps=math.sqrt(1 / (ell * c)))
            return TauChoice(1 / (2 * ell), family, True, rad)
        return TauChoice((1 - math.sqrt(rad)) / (2 * ell), family, False, 0.0)
    if family == QUASIRANDOM:
        lo, hi = 0.0, 0.5
        if qr_expression(hi, ell, m, eps) < 0:
            # the first root, if any, lies where the expression first turns non-negative
            grid = np.linspace(0, 0.5, 20001)
            vals = np.array([qr_expression(t, ell, m, eps) for t in grid])
            pos = np.nonzero(vals >= 0)[0]
            if len(pos) == 0:
                if not clamp:
                    best = max(4 * t * (1 - t) ** ell * (1 - 2 * t + 2 * t * t) ** (ell - 1) for t in grid)
                    raise NoRoot("the quasirandom expression has no root in [0, 1/2]", max_eps=math.sqrt(best / c))
                return TauChoice(0.5, family, True, qr_expression(0.5, ell, m, eps))
            hi = float(grid[pos[0]])
            lo = float(grid[pos[0] - 1])
        while hi - lo > TAU_TOL:
            mid = (lo + hi) / 2
            if qr_expression(mid, ell, m, eps) < 0:
                lo = mid
            else:
                hi = mid
        return TauChoice(hi, family, False, qr_expression(hi, ell, m, eps))
    raise ValueError(f"unknown family {family!r}")


def normalized_config(family: str, ell: int, tau) -> tuple:
    """G^vu or G^QR as weights indexed by column value."""
    t = tau
    if family == VERTEX_UNIFORM:
        return tuple((1 - ell * t) if u == 0 else (t if _weight(u) == 1 else 0 * t) for u in range(2 ** ell))
    if family == QUASIRANDOM:
        return tuple(t ** _weight(u) * (1 - t) ** (ell - _weight(u)) for u in range(2 ** ell))
    raise ValueError(f"unknown family {family!r}")


def round_config(G, n: int) -> tuple:
    """Largest-remainder rounding of n*G to a configuration; ties go to the smaller u."""
    exact = [Fraction(x) * n for x in G]
    base = [math.floor(x) for x in exact]
    short = n - sum(base)
    order = sorted(range(len(G)), key=lambda u: (-(exact[u] - base[u]), u))
    for u in order[:short]:
        base[u] += 1
    return tuple(base)


@dataclass
class SpectralParams:
    ell: int
    m: int
    eps: Fraction
    n: int
    family: str = VERTEX_UNIFORM
    tau: float | None = None
    clamp: bool = False

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        check_m_bound(self.ell, self.m, self.eps)
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")


# --------------------------------------------------------------- Phi_m

def phi_u(g, u: int, m: int, eps, n: int | None = None) -> Fraction:
    """phi_{m,u} = sum_{<u,v>=1} ((n - 2|vX|)^m - (eps n)^m) for X of configuration g."""
    n = sum(g) if n is None else n
    eps = Fraction(eps)
    return sum((Fraction(n - 2 * row_weight(g, v)) ** m - (eps * n) ** m
                for v in range(len(g)) if _dot(u, v)), Fraction(0))


def big_phi(g, m: int, eps) -> Fraction:
    out = Fraction(1)
    for u in range(1, len(g)):
        out *= phi_u(g, u, m, eps)
    return out


def phi_zero_closed_form(ell: int, n: int, m: int, eps) -> Fraction:
    eps = Fraction(eps)
    return (2 ** (ell - 1) * (1 - eps ** m) * Fraction(n) ** m) ** (2 ** ell - 1)


def big_phi_function(ell: int, n: int, m: int, eps) -> GridFunction:
    return GridFunction.from_config_callable(2, ell, n, lambda g: big_phi(g, m, eps))


_sign = np.frompyfunc(lambda x: (x > 0) - (x < 0), 1, 1)


@dataclass
class SignScan:
    points: int
    valid_nonzero: int
    violations: int
    parity_ok: bool
    phi0: Fraction
    phi0_closed: Fraction

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.parity_ok and self.phi0 == self.phi0_closed


def sign_scan(ell: int, n: int, m: int, eps, dense: bool = True) -> SignScan:
    """Exhaustive check of Phi_m <= 0 on valid nonzero X plus the odd-parity structure.

    Each factor phi_{m,u} is scaled by den(eps)^m to an integer; the sign of Phi_m is the
    product of factor signs. With ``dense`` every matrix is scanned, otherwise every configuration.
    """
    eps = Fraction(eps)
    check_m_bound(ell, m, eps)
    p, d = eps.numerator, eps.denominator
    Q = 2 ** ell
    if dense:
        gf.check_dense_budget(2, ell, n)
        digits = cfg.dense_digits(ell, n, 2)
        us = np.array([cfg.column_value(v, ell, 2) for v in range(Q)], dtype=np.int64)
        weights = (np.einsum("vi,pin->pvn", us, digits) % 2).sum(axis=2)  # |vX| per point and v
    else:
        weights = np.array([[row_weight(g, v) for v in range(Q)] for g in cfg.all_configs(ell, n, 2)], dtype=np.int64)
    terms = [(d * (n - 2 * weights[:, v]).astype(object)) ** m - (p * n) ** m for v in range(Q)]
    factors = {}
    for u in range(1, Q):
        acc = 0
        for v in range(Q):
            if _dot(u, v):
                acc = acc + terms[v]
        factors[u] = _sign(np.asarray(acc, dtype=object)).astype(np.int64)
    sign = np.ones(len(weights), dtype=np.int64)
    for u in range(1, Q):
        sign = sign * factors[u]
    # validity: every nonzero combination vX has weight in [(1-eps)n/2, (1+eps)n/2]
    lo, hi = (1 - eps) * n / 2, (1 + eps) * n / 2
    valid = np.ones(len(weights), dtype=bool)
    for v in range(1, Q):
        w = weights[:, v]
        valid &= (w == 0) | ((w >= math.ceil(lo)) & (w <= math.floor(hi)))
    nonzero = weights[:, 1:].any(axis=1)
    mask = valid & nonzero
    violations = int(np.count_nonzero(sign[mask] > 0))
    # parity: u in V^perp \ {0} (V = {v : vX = 0}) gives phi_u <= 0, other u give phi_u >= 0
    parity_ok = True
    kernel = weights == 0  # kernel[p, v] <=> vX = 0
    for idx in np.nonzero(mask)[0]:
        V = [v for v in range(Q) if kernel[idx, v]]
        perp = [u for u in range(1, Q) if all(not _dot(u, v) for v in V)]
        if len(perp) % 2 == 0 or any(factors[u][idx] > 0 for u in perp):
            parity_ok = False
            break
        if any(factors[u][idx] < 0 for u in range(1, Q) if u not in perp):
            parity_ok = False
            break
    return SignScan(len(weights), int(mask.sum()), violations, parity_ok,
                    big_phi(cfg.zero_config(ell, n), m, eps), phi_zero_closed_form(ell, n, m, eps))


# ---------------------------------------------------------- walk operators

def _require_symmetric(psi: GridFunction):
    if psi.repr != "symmetric" or psi.q != 2:
        raise ShapeMismatch("walk operators act on configuration-indexed functions over F_2")


def _transitions(g, h, cap: int = CONTINGENCY_CAP):
    """Yield (multiplicity, resulting configuration) over contingency tables F in F_{g,h}.

    F(u, w) counts columns where X has u and Y has w; X + Y then has configuration
    c(x) = sum_u F(u, u + x).
    """
    Q = len(g)
    seen = 0

    def rec(w, remaining, weight, result):
        nonlocal seen
        if w == Q:
            if not any(remaining):
                seen += 1
                if seen > cap:
                    raise BudgetExceeded("contingency enumeration exceeds its cap")
                yield weight, tuple(result)
            return
        m = g[w]
        for c in _bounded(m, remaining):
            mult = math.factorial(m)
            nr = list(remaining)
            res = list(result)
            for u, cu in enumerate(c):
                mult //= math.factorial(cu)
                nr[u] -= cu
                res[u ^ w] += cu
            yield from rec(w + 1, tuple(nr), weight * mult, res)

    yield from rec(0, tuple(h), 1, [0] * Q)


def _bounded(m, caps):
    if len(caps) == 1:
        if m <= caps[0]:
            yield (m,)
        return
    rest = sum(caps[1:])
    for first in range(min(m, caps[0]), max(0, m - rest) - 1, -1):
        for tail in _bounded(m - first, caps[1:]):
            yield (first,) + tail


def apply_walk(h, psi: GridFunction) -> GridFunction:
    """(A_h psi)(Y) = sum over X of configuration h of psi(X + Y), by contingency tables."""
    _require_symmetric(psi)
    h = tuple(h)
    pos = cfg.config_position(psi.ell, psi.n, 2)
    out = []
    for g in cfg.all_configs(psi.ell, psi.n, 2):
        acc = Fraction(0)
        for mult, c in _transitions(g, h):
            v = psi.values[pos[c]]
            if v:
                acc += mult * v
        out.append(acc)
    return GridFunction(2, psi.ell, psi.n, out, "symmetric")


def apply_step(v: int, psi: GridFunction) -> GridFunction:
    """A_v psi(g) = sum_t g(t) Psi(g + 1_{v+t} - 1_t): the one-column special case."""
    _require_symmetric(psi)
    pos = cfg.config_position(psi.ell, psi.n, 2)
    out = []
    for g in cfg.all_configs(psi.ell, psi.n, 2):
        acc = Fraction(0)
        for t, c in enumerate(g):
            if c:
                nxt = list(g)
                nxt[t] -= 1
                nxt[t ^ v] += 1
                acc += c * psi.values[pos[tuple(nxt)]]
        out.append(acc)
    return GridFunction(2, psi.ell, psi.n, out, "symmetric")


def apply_step_power(v: int, m: int, psi: GridFunction) -> GridFunction:
    for _ in range(m):
        psi = apply_step(v, psi)
    return psi


def class_indicator(g0, ell: int) -> GridFunction:
    g0 = tuple(g0)
    n = sum(g0)
    return GridFunction.from_config_callable(2, ell, n, lambda g: int(g == g0))


def exact_walk_count(g0, v, m: int) -> int:
    """(A_v^m Lambda)(X) for X of configuration g0 and Lambda the class indicator of g0."""
    g0 = tuple(g0)
    v = vector_index(v)

    @lru_cache(maxsize=None)
    def walks(g, steps):
        if steps == 0:
            return int(g == g0)
        # a walk must be able to return: each step moves one column, so distance bounds pruning
        dist = sum(abs(a - b) for a, b in zip(g, g0)) // 2
        if dist > steps:
            return 0
        total = 0
        for t, c in enumerate(g):
            if c:
                nxt = list(g)
                nxt[t] -= 1
                nxt[t ^ v] += 1
                total += c * walks(tuple(nxt), steps - 1)
        return total

    return walks(g0, m)


def asymptotic_walk_count(g0, v, m: int) -> int:
    """sum over F constant on the cosets {u, u+v} with total m of multinomial(m; F) prod g0(u)^F(u)."""
    g0 = tuple(g0)
    v = vector_index(v)
    if m == 0:
        return 1
    if m % 2:
        return 0
    reps = [u for u in range(len(g0)) if u < (u ^ v)]
    total = 0
    for comp in cfg._compositions(m // 2, len(reps)):
        F = [0] * len(g0)
        for u, c in zip(reps, comp):
            F[u] = F[u ^ v] = c
        mult = math.factorial(m)
        term = 1
        for u, c in enumerate(F):
            mult //= math.factorial(c)
            term *= g0[u] ** c
        total += mult * term
    return total


# ------------------------------------------------------------------- M_m

def _sum_over_v(u: int, ell: int, m: int, psi: GridFunction) -> GridFunction:
    """(sum_{<u,v>=1} A_v^m) psi."""
    acc = None
    for v in range(2 ** ell):
        if _dot(u, v):
            term = apply_step_power(v, m, psi)
            acc = term if acc is None else acc + term
    return acc


def apply_Mm(psi: GridFunction, m: int, eps) -> GridFunction:
    """M_m psi = prod_{u != 0} B_{m,u} psi with B_{m,u} = sum_{<u,v>=1} (A_v^m - (eps n)^m I)."""
    _require_symmetric(psi)
    ell, n = psi.ell, psi.n
    c = (Fraction(eps) * n) ** m
    half = 2 ** (ell - 1)
    for u in range(1, 2 ** ell):
        psi = _sum_over_v(u, ell, m, psi) - psi * (half * c)
    return psi


def apply_Mm_decomposed(psi: GridFunction, m: int, eps, literal: bool = False) -> GridFunction:
    """Odd-subset decomposition of M_m.

    M_m = sum_{|S| odd} sum_{i in S} (2^{l-1})^{2^l-1-|S|} (prod_{u in S-i} C_u)
          (eps n)^{m(2^l-1-|S|)} (C_i/|S| - 2^{l-1}(eps n)^m/(2^l-|S|)),  C_u = sum_{<u,v>=1} A_v^m.
    ``literal=True`` drops the (2^{l-1})^{2^l-1-|S|} factor.
    """
    _require_symmetric(psi)
    ell, n = psi.ell, psi.n
    c = (Fraction(eps) * n) ** m
    half = 2 ** (ell - 1)
    nonzero = list(range(1, 2 ** ell))
    total = None
    for size in range(1, len(nonzero) + 1, 2):
        for S in itertools.combinations(nonzero, size):
            rest = len(nonzero) - size
            coef = c ** rest * (1 if literal else half ** rest)
            for i in S:
                cur = _sum_over_v(i, ell, m, psi) * Fraction(1, size) - psi * (half * c / (2 ** ell - size))
                for u in S:
                    if u != i:
                        cur = _sum_over_v(u, ell, m, cur)
                cur = cur * coef
                total = cur if total is None else total + cur
    return total


# ------------------------------------------------------------ Lambda hat

def lambda_hat(g0, ell: int) -> GridFunction:
    """hat Lambda(Z) = K_{g0}(config Z) / 2^{l n}, via K_{g0}(g) = |g0| K_g(g0) / |g|."""
    g0 = tuple(g0)
    n = sum(g0)
    col = kraw_column(g0, 2)
    size0 = cfg.class_size(g0)
    N = ell * n
    return GridFunction.from_config_callable(
        2, ell, n, lambda g: Fraction(size0 * col.get(tuple(g), 0), cfg.class_size(g) * 2 ** N))


def symmetric_fourier(f: GridFunction) -> GridFunction:
    """hat f(W) = 2^{-ln} sum_g f(g) K_g(config W) for configuration-indexed f over F_2."""
    _require_symmetric(f)
    ell, n = f.ell, f.n
    configs = cfg.all_configs(ell, n, 2)
    pos = cfg.config_position(ell, n, 2)
    N = ell * n
    out = [Fraction(0)] * len(configs)
    # K_g(w) = |g| K_w(g) / |w|; kraw_column(g) holds K_w(g) for every w
    for j, g in enumerate(configs):
        fg = f.values[j]
        if not fg:
            continue
        size_g = cfg.class_size(g)
        for w, k in kraw_column(g, 2).items():
            out[pos[w]] += fg * Fraction(size_g * k, cfg.class_size(w))
    return GridFunction(2, ell, n, [x / 2 ** N for x in out], "symmetric")


# ---------------------------------------------------------- certificate

@dataclass
class SpectralDiagnostics:
    params: dict
    tau: float
    tau_clamped: bool
    G: tuple
    g0: tuple
    objective: Fraction
    rate: float
    entropy: float
    entropy_rounded: float
    min_fourier: Fraction
    sign_check: bool
    walk_margins: dict
    hypothesis_holds: bool
    feasible: bool
    notes: list = field(default_factory=list)

    @property
    def rate_constant(self) -> float:
        """C with rate = H2(G) + C lg(n)/n; the hidden constant is measured, never asserted."""
        n = self.params["n"]
        return (self.rate - self.entropy) * n / math.log2(n) if n > 1 else float("nan")

    def to_json(self) -> dict:
        return {
            "params": self.params,
            "tau": self.tau,
            "tau_clamped": self.tau_clamped,
            "G": [float(x) for x in self.G],
            "g0": list(self.g0),
            "objective": gf.frac_str(self.objective),
            "rate": self.rate,
            "entropy": self.entropy,
            "entropy_rounded": self.entropy_rounded,
            "rate_constant": self.rate_constant,
            "min_fourier": gf.frac_str(self.min_fourier),
            "sign_check": self.sign_check,
            "walk_margins": {str(k): str(v) for k, v in self.walk_margins.items()},
            "hypothesis_holds": self.hypothesis_holds,
            "feasible": self.feasible,
            "notes": list(self.notes),
        }


def walk_margins(g0, ell: int, m: int, eps) -> dict:
    """A_v^m Lambda(X) - (2^{2l-1} eps^m n^m + 1) on the class of g0, for every v != 0."""
    n = sum(g0)
    need = 2 ** (2 * ell - 1) * Fraction(eps) ** m * n ** m + 1
    return {cfg.column_value(v, ell, 2): exact_walk_count(g0, v, m) - need for v in range(1, 2 ** ell)}


def hypothesis_holds(margins: dict, ell: int) -> bool:
    """For every i != 0 some v with <i, v> = 1 has a non-negative margin."""
    by_index = {cfg.column_value_index(v, 2): d for v, d in margins.items()}
    return all(any(_dot(i, v) and d >= 0 for v, d in by_index.items()) for i in range(1, 2 ** ell))


def build_spectral_certificate(params: SpectralParams, dense_check: bool = True):
    """(LPdual certificate, diagnostics). The certificate is stamped feasible only by check_lpdual."""
    ell, m, eps, n = params.ell, params.m, params.eps, params.n
    if params.tau is None:
        choice = choose_tau(params.family, eps, ell, m, clamp=params.clamp)
        tau, clamped = choice.tau, choice.clamped
    else:
        tau, clamped = float(params.tau), False
    G = normalized_config(params.family, ell, Fraction(tau))
    g0 = round_config(G, n)
    notes = []
    if any(x == 0 for x in G):
        notes.append("G has zero weights")
    phi = big_phi_function(ell, n, m, eps)
    lam_hat = lambda_hat(g0, ell)
    F = phi * lam_hat * lam_hat
    F_hat = symmetric_fourier(F)
    F0 = F_hat.values[0]
    if F0 == 0:
        raise DegenerateInput("widehat(Phi_m hat(Lambda)^2)(0) = 0")
    f = F / F0
    f_hat = F_hat / F0
    spec = balanced(eps, n)
    configs = cfg.all_configs(ell, n, 2)
    sign_ok = all(f.values[j] <= 0 for j, g in enumerate(configs) if j > 0 and config_valid(g, spec, ell))
    margins = walk_margins(g0, ell, m, eps)
    hyp = hypothesis_holds(margins, ell)
    cert = hz.DualCertificate(hz.LPDUAL, spec, ell, {"g": f, "beta": None})
    feasible = False
    if dense_check:
        rep = hz.check_lpdual(cert, spec)
        feasible = rep.feasible
        if not feasible:
            notes.append(f"check_lpdual: {rep.violation_count} violations")
    else:
        feasible = sign_ok and min(f_hat.values) >= 0 and f_hat.values[0] == 1
        notes.append("feasibility from the configuration-level check only")
    obj = f.values[0]
    rate = math.log2(obj) / n if obj > 0 else float("nan")
    diag = SpectralDiagnostics(
        params={"ell": ell, "m": m, "eps": str(eps), "n": n, "family": params.family},
        tau=tau, tau_clamped=clamped, G=G, g0=g0, objective=obj, rate=rate,
        entropy=entropy(G), entropy_rounded=entropy([Fraction(c, n) for c in g0]),
        min_fourier=min(f_hat.values), sign_check=sign_ok, walk_margins=margins,
        hypothesis_holds=hyp, feasible=feasible, notes=notes)
    return cert, diag
