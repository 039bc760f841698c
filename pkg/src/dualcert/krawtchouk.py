"""Multivariate Krawtchouk numbers and the S_n-reduced linear programs.

K_h(g) = sum over X of configuration h of chi_X(Y), for any Y of configuration g.
Equivalently K_h(g) is the coefficient of z^h in prod_w (sum_u chi_u(w) z_u)^{g(w)}.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import configs as cfg
from . import hierarchy as hz
from .errors import BudgetExceeded, InfeasibleInput, UnsupportedField
from .gridfunc import GridFunction
from .simplex import EQ, GE, LE, LpProblem, LpSolution, solve
from .valid import ValidSpec, config_valid

MAX_TABLE_ENTRIES = 4_000_000


def _dot(u: int, w: int, ell: int, q: int) -> int:
    a, b = cfg.column_value(u, ell, q), cfg.column_value(w, ell, q)
    return sum(x * y for x, y in zip(a, b)) % q


@lru_cache(maxsize=32)
def _char_table(ell: int, q: int):
    """chi_u(w) for column values u, w: integers for q = 2, complex otherwise."""
    Q = q ** ell
    if q == 2:
        return tuple(tuple(-1 if _dot(u, w, ell, q) else 1 for w in range(Q)) for u in range(Q))
    zeta = [complex(np.exp(2j * np.pi * s / q)) for s in range(q)]
    return tuple(tuple(zeta[_dot(u, w, ell, q)] for w in range(Q)) for u in range(Q))


def _multinomial(parts) -> int:
    out = math.factorial(sum(parts))
    for p in parts:
        out //= math.factorial(p)
    return out


def _bounded_compositions(m: int, caps: tuple):
    """Compositions of m with part i at most caps[i]."""
    if len(caps) == 1:
        if m <= caps[0]:
            yield (m,)
        return
    rest_cap = sum(caps[1:])
    for first in range(min(m, caps[0]), max(0, m - rest_cap) - 1, -1):
        for rest in _bounded_compositions(m - first, caps[1:]):
            yield (first,) + rest


def kraw_eval(h, g, q: int = 2):
    """K_h(g) by dynamic programming over the column values w of g."""
    h, g = tuple(h), tuple(g)
    if len(h) != len(g) or sum(h) != sum(g):
        raise ValueError("h and g must be configurations of the same shape")
    ell = round(math.log(len(h), q))
    if q ** ell != len(h):
        raise ValueError("configuration length is not a power of q")
    chi = _char_table(ell, q)
    Q = len(h)

    @lru_cache(maxsize=None)
    def rec(w: int, remaining: tuple):
        if w == Q:
            return 1 if not any(remaining) else 0
        m = g[w]
        if m == 0:
            return rec(w + 1, remaining)
        total = 0
        for c in _bounded_compositions(m, remaining):
            sign = 1
            for u, cu in enumerate(c):
                if cu:
                    sign *= chi[u][w] ** cu
            sub = rec(w + 1, tuple(r - x for r, x in zip(remaining, c)))
            if sub:
                total += _multinomial(c) * sign * sub
        return total

    return rec(0, h)


def kraw_column(g, q: int = 2) -> dict:
    """{h: K_h(g)} for every configuration h, from the full polynomial product."""
    g = tuple(g)
    Q = len(g)
    ell = round(math.log(Q, q))
    chi = _char_table(ell, q)
    poly = {(0,) * Q: 1}
    for w, m in enumerate(g):
        if m == 0:
            continue
        factor = {}
        for c in cfg._compositions(m, Q):
            sign = 1
            for u, cu in enumerate(c):
                if cu:
                    sign *= chi[u][w] ** cu
            factor[c] = _multinomial(c) * sign
        nxt = {}
        for a, va in poly.items():
            for b, vb in factor.items():
                key = tuple(x + y for x, y in zip(a, b))
                nxt[key] = nxt.get(key, 0) + va * vb
        poly = nxt
    return poly


def kraw_contingency(h, g, q: int = 2):
    """Reference: explicit sum over tables F with row sums h and column sums g."""
    h, g = tuple(h), tuple(g)
    Q = len(h)
    ell = round(math.log(Q, q))
    chi = _char_table(ell, q)
    cols = [list(cfg._compositions(m, Q)) for m in g]
    total = 0

    def walk(w, used, weight):
        nonlocal total
        if w == Q:
            if tuple(used) == h:
                total += weight
            return
        for c in cols[w]:
            nu = [a + b for a, b in zip(used, c)]
            if any(x > y for x, y in zip(nu, h)):
                continue
            term = _multinomial(c)
            for u, cu in enumerate(c):
                if cu:
                    term *= chi[u][w] ** cu
            walk(w + 1, nu, weight * term)

    walk(0, [0] * Q, 1)
    return total


def classical_krawtchouk(k: int, i: int, n: int) -> int:
    return sum((-1) ** j * math.comb(i, j) * math.comb(n - i, k - j) for j in range(k + 1))


@dataclass
class KrawtchoukTable:
    ell: int
    n: int
    q: int
    configs: tuple
    entries: np.ndarray  # entries[i, j] = K_{configs[i]}(configs[j])

    def __call__(self, h, g):
        pos = cfg.config_position(self.ell, self.n, self.q)
        return self.entries[pos[tuple(h)], pos[tuple(g)]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["h", "g", "K"])
        for i, h in enumerate(self.configs):
            for j, g in enumerate(self.configs):
                w.writerow([",".join(map(str, h)), ",".join(map(str, g)), self.entries[i, j]])
        return buf.getvalue()


@lru_cache(maxsize=16)
def kraw_table(ell: int, n: int, q: int = 2) -> KrawtchoukTable:
    configs = cfg.all_configs(ell, n, q)
    if len(configs) ** 2 > MAX_TABLE_ENTRIES:
        raise BudgetExceeded(f"{len(configs)}^2 Krawtchouk entries exceed the table budget")
    pos = cfg.config_position(ell, n, q)
    E = np.empty((len(configs), len(configs)), dtype=object)
    E[:] = 0
    for j, g in enumerate(configs):
        for h, v in kraw_column(g, q).items():
            E[pos[h], j] = v
    E.setflags(write=False)
    return KrawtchoukTable(ell, n, q, configs, E)


# ------------------------------------------------------------- reduced LPs

@dataclass
class ReducedLp:
    problem: LpProblem
    configs: tuple
    kraw_rows: dict  # config h -> row index of its Krawtchouk cone row
    valid: list  # validity flag per configuration (zero config counted as valid)


def _require_binary(spec: ValidSpec):
    if spec.q != 2:
        raise UnsupportedField("the reduced LPs are built for q = 2")


def build_klp(spec: ValidSpec, ell: int) -> ReducedLp:
    """Reduced primal: variables are class masses f(g) = |g| * f(X) for X of configuration g.

    max sum_g f(g)  s.t.  f(config 0) = 1,  f(g) = 0 for invalid g,
    sum_g K_h(g) f(g) >= 0 for every h,  f >= 0.
    (f(g) = f(g^-) holds identically for q = 2.)
    """
    _require_binary(spec)
    table = kraw_table(ell, spec.n, spec.q)
    configs = table.configs
    if len(configs) > 4000:
        raise BudgetExceeded("too many configurations for the simplex")
    valid = [j == 0 or config_valid(g, spec, ell) for j, g in enumerate(configs)]
    names = ["f[" + ",".join(map(str, g)) + "]" for g in configs]
    p = LpProblem("max", [1] * len(configs), col_names=names)
    p.add_row({0: 1}, EQ, 1, name="norm")
    for j, g in enumerate(configs):
        if not valid[j]:
            p.add_row({j: 1}, EQ, 0, name=f"zero[{','.join(map(str, g))}]")
    rows = {}
    for i, h in enumerate(configs):
        coeffs = {j: table.entries[i, j] for j in range(len(configs)) if table.entries[i, j]}
        rows[h] = p.add_row(coeffs, GE, 0, name=f"kraw[{','.join(map(str, h))}]")
    return ReducedLp(p, configs, rows, valid)


def build_klp_dual(spec: ValidSpec, ell: int) -> ReducedLp:
    """Reduced dual: min 1 + sum_g |g| z_g  s.t.  1 + sum_g K_g(h) z_g <= 0 for valid nonzero h, z >= 0.

    The constant 1 is carried by column 0, fixed to 1 by the row "one".
    """
    _require_binary(spec)
    table = kraw_table(ell, spec.n, spec.q)
    configs = table.configs
    valid = [j == 0 or config_valid(g, spec, ell) for j, g in enumerate(configs)]
    # columns: 0 is the constant, 1 + j is z_{configs[j]}
    obj = [1] + [cfg.class_size(g) for g in configs]
    names = ["one"] + ["z[" + ",".join(map(str, g)) + "]" for g in configs]
    p = LpProblem("min", obj, col_names=names)
    p.add_row({0: 1}, EQ, 1, name="one")
    rows = {}
    for i, h in enumerate(configs):
        if i == 0 or not valid[i]:
            continue
        coeffs = {0: 1}
        for j in range(len(configs)):
            # K_g(h) = entries[g, h]
            v = table.entries[j, i]
            if v:
                coeffs[1 + j] = v
        rows[h] = p.add_row(coeffs, LE, 0, name=f"valid[{','.join(map(str, h))}]")
    return ReducedLp(p, configs, rows, valid)


def solve_klp(spec: ValidSpec, ell: int):
    """(optimum, solution, reduced LP) of the reduced primal."""
    red = build_klp(spec, ell)
    sol = solve(red.problem)
    if sol.status != "optimal":
        raise RuntimeError(f"reduced LP status {sol.status}")
    return sol.objective, sol, red


def reduced_dual_from_primal(red: ReducedLp, sol: LpSolution) -> dict:
    """z_h = -(dual value of the Krawtchouk row h); z >= 0."""
    return {h: -sol.y[r] for h, r in red.kraw_rows.items()}


def trivial_reduced_dual(spec: ValidSpec, ell: int) -> dict:
    """z_h = 1 for h != config 0: the dense function becomes q^{ln} 1_0."""
    configs = cfg.all_configs(ell, spec.n, spec.q)
    return {h: Fraction(int(i > 0)) for i, h in enumerate(configs)}


def reduced_dual_objective(z: dict) -> Fraction:
    return 1 + sum((Fraction(v) * cfg.class_size(h) for h, v in z.items()), Fraction(0))


def klp_dual_to_certificate(z: dict, spec: ValidSpec, ell: int, check: bool = True) -> hz.DualCertificate:
    """Dense LPdual certificate g = G / (1 + z_0) with G(X) = 1 + sum_h z_h K_h(config X).

    hat G(W) = 1[W = 0] + z_{config W}, so hat g >= 0 and hat g(0) = 1; G <= 0 on valid
    nonzero X is exactly the reduced dual constraint. The function is stored by configuration.
    """
    _require_binary(spec)
    n, q = spec.n, spec.q
    table = kraw_table(ell, n, q)
    configs = table.configs
    zv = [Fraction(z.get(h, 0)) for h in configs]
    if any(v < 0 for v in zv):
        raise InfeasibleInput("reduced dual has negative entries", None)
    vals = []
    for j in range(len(configs)):
        vals.append(1 + sum((zv[i] * table.entries[i, j] for i in range(len(configs)) if zv[i]), Fraction(0)))
    scale = 1 + zv[0]
    g = GridFunction(q, ell, n, np.array([v / scale for v in vals], dtype=object), repr="symmetric")
    cert = hz.DualCertificate(hz.LPDUAL, spec, ell, {"g": g, "beta": None})
    if check:
        rep = hz.check_lpdual(cert, spec)
        if not rep.feasible:
            raise InfeasibleInput(f"dense certificate violates {rep.violation_count} constraints", rep)
    return cert


def export_lp_text(spec: ValidSpec, ell: int, dual: bool = False) -> str:
    from .simplex import to_text
    red = build_klp_dual(spec, ell) if dual else build_klp(spec, ell)
    return to_text(red.problem)
