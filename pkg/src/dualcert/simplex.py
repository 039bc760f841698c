"""Exact two-phase simplex with Bland's rule, returning primal and dual optima.

Arithmetic runs on ``gmpy2.mpq`` inside numpy object arrays; everything that
leaves the module is a ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np

from .errors import BudgetExceeded

MAX_COLUMNS = 4000
MAX_ROWS = 4000

LE, GE, EQ = "<=", ">=", "="


@dataclass
class LpProblem:
    """max/min c.x subject to rows (coeffs, relation, rhs); columns >= 0 unless marked free.

    Row coefficients are sparse dicts {column index: value}.
    """

    sense: str
    objective: list
    rows: list = field(default_factory=list)
    free: list = field(default_factory=list)
    col_names: list = field(default_factory=list)
    row_names: list = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        ncols = len(self.objective)
        self.objective = [Fraction(c) for c in self.objective]
        if not self.free:
            self.free = [False] * ncols
        if not self.col_names:
            self.col_names = [f"x{j}" for j in range(ncols)]

    @property
    def ncols(self) -> int:
        return len(self.objective)

    def add_row(self, coeffs, rel: str, rhs, name: str | None = None) -> int:
        if rel not in (LE, GE, EQ):
            raise ValueError(f"bad relation {rel!r}")
        if not isinstance(coeffs, dict):
            coeffs = {j: c for j, c in enumerate(coeffs) if c}
        row = {int(j): Fraction(c) for j, c in coeffs.items() if c}
        self.rows.append((row, rel, Fraction(rhs)))
        self.row_names.append(name or f"r{len(self.rows) - 1}")
        return len(self.rows) - 1


@dataclass
class LpSolution:
    status: str
    x: list | None = None
    y: list | None = None
    objective: Fraction | None = None
    pivots: int = 0


def _mpq(x) -> gmpy2.mpq:
    x = Fraction(x)
    return gmpy2.mpq(x.numerator, x.denominator)


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list):
        self.T = T
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, c: int):
        T = self.T
        prow = T[r] / T[r, c]
        T[r] = prow
        col = T[:, c]
        nz = [i for i in range(T.shape[0]) if i != r and col[i] != 0]
        if nz:
            T[nz] -= np.outer(col[nz], prow)
        self.basis[r - 1] = c
        self.pivots += 1

    def run(self, allowed: np.ndarray) -> str:
        """Maximize with objective row T[0] holding z_j - c_j; Bland's rule."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            obj = T[0, :-1]
            entering = -1
            for j in np.nonzero(allowed)[0]:
                if obj[j] < 0:
                    entering = int(j)
                    break
            if entering < 0:
                return "optimal"
            best = None
            for i in range(1, m + 1):
                a = T[i, entering]
                if a > 0:
                    ratio = T[i, -1] / a
                    key = (ratio, self.basis[i - 1])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], entering)


def solve(p: LpProblem, check: bool = True) -> LpSolution:
    m = len(p.rows)
    if p.ncols > MAX_COLUMNS or m > MAX_ROWS:
        raise BudgetExceeded(f"LP with {p.ncols} columns and {m} rows exceeds the simplex budget")
    # split free columns
    col_map = []  # (original column, sign)
    for j in range(p.ncols):
        col_map.append((j, 1))
        if p.free[j]:
            col_map.append((j, -1))
    nstruct = len(col_map)
    pos_of = {}
    for k, (j, s) in enumerate(col_map):
        pos_of.setdefault(j, []).append((k, s))

    sgn_obj = 1 if p.sense == "max" else -1
    rels, flips = [], []
    for row, rel, rhs in p.rows:
        flip = rhs < 0
        flips.append(flip)
        rels.append({LE: GE, GE: LE, EQ: EQ}[rel] if flip else rel)

    # column layout: structural | one identity column per row | surplus columns for >= rows
    n_surplus = sum(1 for r in rels if r == GE)
    ncols = nstruct + m + n_surplus
    zero = gmpy2.mpq(0)
    T = np.empty((m + 1, ncols + 1), dtype=object)
    T[:] = zero
    ident_col = nstruct
    surplus_col = nstruct + m
    artificial = np.zeros(ncols, dtype=bool)
    basis = []
    for i, (row, _, rhs) in enumerate(p.rows):
        s = -1 if flips[i] else 1
        for j, c in row.items():
            for k, sign in pos_of[j]:
                T[i + 1, k] = _mpq(s * sign * c)
        T[i + 1, -1] = _mpq(s * rhs)
        T[i + 1, ident_col + i] = gmpy2.mpq(1)
        basis.append(ident_col + i)
        if rels[i] != LE:
            artificial[ident_col + i] = True
        if rels[i] == GE:
            T[i + 1, surplus_col] = gmpy2.mpq(-1)
            surplus_col += 1

    tab = _Tableau(T, basis)
    # phase 1: maximize -sum(artificials)
    if artificial.any():
        cost = np.array([gmpy2.mpq(-1) if a else zero for a in artificial] + [zero], dtype=object)
        T[0] = -cost
        for i in range(m):
            if artificial[basis[i]]:
                T[0] = T[0] - T[i + 1]
        status = tab.run(np.ones(ncols, dtype=bool))
        assert status == "optimal"
        if T[0, -1] != 0:
            return LpSolution("infeasible", pivots=tab.pivots)
        # drive remaining artificials out of the basis
        for i in range(m):
            if artificial[basis[i]]:
                for j in range(ncols):
                    if not artificial[j] and T[i + 1, j] != 0:
                        tab.pivot(i + 1, j)
                        break
    # phase 2
    c = np.array([_mpq(sgn_obj * p.objective[j] * s) for j, s in col_map] + [zero] * (ncols - nstruct), dtype=object)
    cb = np.array([c[b] for b in basis], dtype=object)
    T[0, :-1] = (cb @ T[1:, :-1]) - c if m else -c
    T[0, -1] = cb @ T[1:, -1] if m else zero
    allowed = ~artificial
    # rows whose artificial is still basic are redundant; keep them frozen
    status = tab.run(allowed)
    if status == "unbounded":
        return LpSolution("unbounded", pivots=tab.pivots)

    xs = [zero] * ncols
    for i, b in enumerate(basis):
        xs[b] = T[i + 1, -1]
    x = [Fraction(0)] * p.ncols
    for k, (j, s) in enumerate(col_map):
        x[j] += s * _frac(xs[k])
    # duals of the max-form problem sit under the identity columns of the objective row
    y = []
    for i in range(m):
        yi = _frac(T[0, ident_col + i])
        if flips[i]:
            yi = -yi
        y.append(sgn_obj * yi)
    objective = sum((p.objective[j] * x[j] for j in range(p.ncols)), Fraction(0))
    sol = LpSolution("optimal", x, y, objective, tab.pivots)
    if check:
        verify_optimality(p, sol)
    return sol


def verify_optimality(p: LpProblem, sol: LpSolution) -> None:
    """Raise AssertionError unless x is primal feasible, y dual feasible, and the objectives agree."""
    x, y = sol.x, sol.y
    for j in range(p.ncols):
        assert p.free[j] or x[j] >= 0, f"column {j} negative"
    col_dual = [Fraction(0)] * p.ncols
    for i, (row, rel, rhs) in enumerate(p.rows):
        lhs = sum((c * x[j] for j, c in row.items()), Fraction(0))
        assert {LE: lhs <= rhs, GE: lhs >= rhs, EQ: lhs == rhs}[rel], f"row {p.row_names[i]} violated"
        yi = y[i]
        if p.sense == "max":
            assert {LE: yi >= 0, GE: yi <= 0, EQ: True}[rel], f"dual sign on row {i}"
        else:
            assert {LE: yi <= 0, GE: yi >= 0, EQ: True}[rel], f"dual sign on row {i}"
        for j, c in row.items():
            col_dual[j] += yi * c
    for j in range(p.ncols):
        cj = p.objective[j]
        if p.free[j]:
            assert col_dual[j] == cj, f"dual equality on free column {j}"
        elif p.sense == "max":
            assert col_dual[j] >= cj, f"dual column {j}"
        else:
            assert col_dual[j] <= cj, f"dual column {j}"
    dual_obj = sum((yi * rhs for yi, (_, _, rhs) in zip(y, p.rows)), Fraction(0))
    assert dual_obj == sol.objective, "primal and dual objectives differ"


# ------------------------------------------------------------ text format

def _fs(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def to_text(p: LpProblem) -> str:
    """Plain-text LP: one directive per line, rationals written p/q."""
    lines = ["lp 1", f"sense {p.sense}", f"cols {p.ncols}"]
    for j in range(p.ncols):
        lines.append(f"col {j} {p.col_names[j]} {'free' if p.free[j] else 'nonneg'}")
    lines.append("obj " + " ".join(f"{j}:{_fs(c)}" for j, c in enumerate(p.objective) if c))
    for name, (row, rel, rhs) in zip(p.row_names, p.rows):
        terms = " ".join(f"{j}:{_fs(c)}" for j, c in sorted(row.items()))
        lines.append(f"row {name} {rel} {_fs(rhs)} | {terms}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> LpProblem:
    sense, ncols, names, free, obj = "max", 0, [], [], []
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head == "sense":
            sense = rest.strip()
        elif head == "cols":
            ncols = int(rest)
            names = [f"x{j}" for j in range(ncols)]
            free = [False] * ncols
            obj = [Fraction(0)] * ncols
        elif head == "col":
            j, rest2 = rest.split(maxsplit=1)
            name, kind = rest2.rsplit(maxsplit=1)
            names[int(j)] = name
            free[int(j)] = kind == "free"
        elif head == "obj":
            for tok in rest.split():
                j, c = tok.split(":")
                obj[int(j)] = Fraction(c)
        elif head == "row":
            left, _, terms = rest.partition("|")
            name, rel, rhs = left.rsplit(maxsplit=2)
            coeffs = {}
            for tok in terms.split():
                j, c = tok.split(":")
                coeffs[int(j)] = Fraction(c)
            rows.append((name, coeffs, rel, Fraction(rhs)))
    p = LpProblem(sense, obj, free=free, col_names=names)
    for name, coeffs, rel, rhs in rows:
        p.add_row(coeffs, rel, rhs, name)
    return p


def solve_rows(sense: str, c: Sequence, rows: Sequence) -> LpSolution:
    """Convenience wrapper: rows given as (coeff list, relation, rhs)."""
    p = LpProblem(sense, list(c))
    for coeffs, rel, rhs in rows:
        p.add_row(coeffs, rel, rhs)
    return solve(p)
