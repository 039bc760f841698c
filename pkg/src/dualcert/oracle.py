"""Brute-force ground truth: code search, dense walk operators, naive certificate audits, dense LPs.

Nothing here uses the fast transforms, the GL orbit shortcut or the configuration machinery of
the main modules; audits recompute characters as explicit double sums.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import fq
from .errors import BudgetExceeded, UnsupportedField
from .valid import ValidSpec, code_valid, matrix_valid

AUDIT_MAX_POINTS = 2 ** 10
DENSE_LP_MAX_POINTS = 2 ** 10
OPERATOR_MAX_BITS = 16


# ------------------------------------------------------------------ subspaces

class SubspaceIter:
    """Iterate subspaces of F_q^n as RREF bases (dimension ascending)."""

    def __init__(self, n: int, q: int, dims=None):
        self.n, self.q = n, q
        self.dims = list(range(n + 1)) if dims is None else list(dims)

    def __iter__(self) -> Iterator[tuple]:
        return fq.iter_subspaces(self.n, self.q, self.dims)


def max_valid_code(spec: ValidSpec, ell: int = 1):
    """(best basis, |C|, |C|^l) over all valid subspaces; first found wins ties."""
    total = fq.subspace_count(spec.n, spec.q)
    if total > 2_000_000:
        raise BudgetExceeded(f"{total} subspaces to enumerate")
    best, size = (), 1
    for S in SubspaceIter(spec.n, spec.q):
        sz = spec.q ** len(S)
        if sz > size and code_valid(S, spec):
            best, size = S, sz
    return best, size, size ** ell


# ------------------------------------------------------------ dense helpers

def _points(ell, n, q):
    return [tuple(tuple(p[i * n:(i + 1) * n]) for i in range(ell)) for p in itertools.product(range(q), repeat=ell * n)]


def _col_config(X, q):
    ell = len(X)
    counts = [0] * (q ** ell)
    for j in range(len(X[0])):
        v = 0
        for i in range(ell):
            v = v * q + X[i][j]
        counts[v] += 1
    return tuple(counts)


def _sub(X, Y, q):
    return tuple(tuple((a - b) % q for a, b in zip(r, s)) for r, s in zip(X, Y))


def dense_operator_matrix(h, ell: int, n: int, q: int = 2) -> np.ndarray:
    """A_h(x, y) = 1[config(x - y) = h] as an integer matrix."""
    if ell * n * np.log2(q) > 10:
        raise BudgetExceeded("dense operator matrix limited to 2^10 points")
    pts = _points(ell, n, q)
    h = tuple(h)
    A = np.zeros((len(pts), len(pts)), dtype=object)
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            A[i, j] = int(_col_config(_sub(x, y, q), q) == h)
    return A


def dense_operator_power(h, m: int, ell: int, n: int, q: int = 2, psi=None) -> np.ndarray:
    """A_h^m as a matrix (l n <= 10), or its action on the dense vector ``psi`` (l n <= 16, q = 2)."""
    if psi is not None:
        if q != 2:
            raise UnsupportedField("dense operator action implemented for q = 2")
        return apply_dense_operator(h, psi, m, ell, n)
    A = dense_operator_matrix(h, ell, n, q)
    out = np.identity(A.shape[0], dtype=np.int64).astype(object)
    for _ in range(m):
        out = out.dot(A)
    return out


def apply_dense_operator(h, psi: np.ndarray, m: int, ell: int, n: int) -> np.ndarray:
    """A_h^m psi over F_2^{l x n} by explicit XOR shifts (no transforms)."""
    if ell * n > OPERATOR_MAX_BITS:
        raise BudgetExceeded("dense operator application limited to 2^16 points")
    P = 2 ** (ell * n)
    h = tuple(h)
    shifts = []
    for idx in range(P):
        bits = [(idx >> (ell * n - 1 - p)) & 1 for p in range(ell * n)]
        X = tuple(tuple(bits[i * n:(i + 1) * n]) for i in range(ell))
        if _col_config(X, 2) == h:
            shifts.append(idx)
    base = np.arange(P, dtype=np.int64)
    vec = np.array([int(v) for v in psi], dtype=object)
    for _ in range(m):
        nxt = np.zeros(P, dtype=object)
        nxt[:] = 0
        for d in shifts:
            nxt = nxt + vec[base ^ d]
        vec = nxt
    return vec


def dense_walk_count(g0, v, m: int, ell: int, n: int) -> int:
    """(A_v^m Lambda)(X) at a matrix X of configuration g0, with Lambda the class indicator of g0."""
    P = 2 ** (ell * n)
    lam = np.zeros(P, dtype=object)
    lam[:] = 0
    target = tuple(g0)
    rep = None
    for idx in range(P):
        bits = [(idx >> (ell * n - 1 - p)) & 1 for p in range(ell * n)]
        X = tuple(tuple(bits[i * n:(i + 1) * n]) for i in range(ell))
        if _col_config(X, 2) == target:
            lam[idx] = 1
            rep = idx if rep is None else rep
    hv = [0] * (2 ** ell)
    hv[0] = n - 1
    vi = 0
    for bit in v:
        vi = vi * 2 + int(bit)
    hv[vi] += 1
    out = apply_dense_operator(tuple(hv), lam, m, ell, n)
    return int(out[rep])


# -------------------------------------------------------------- naive audit

def _chi(Z, X, q):
    s = sum(z * x for r1, r2 in zip(Z, X) for z, x in zip(r1, r2)) % q
    if q == 2:
        return -1 if s else 1
    return complex(np.exp(2j * np.pi * s / q))


def _naive_partial(vals: dict, pts, k, q, n, ell):
    """F_k(f)(Y) = q^{-kn} sum over X agreeing with Y on rows k+1..l of f(X) conj chi(Y_{1..k}, X_{1..k})."""
    out = {}
    for Y in pts:
        acc = 0
        for X in pts:
            if X[k:] != Y[k:]:
                continue
            c = _chi(Y[:k], X[:k], q) if k else 1
            acc += vals[X] * (c if q == 2 else np.conj(c))
        out[Y] = acc / Fraction(q ** (k * n)) if q == 2 else acc / q ** (k * n)
    return out


def _matmul_rows(M, X, q):
    return tuple(tuple(sum(M[i][t] * X[t][j] for t in range(len(X))) % q for j in range(len(X[0])))
                 for i in range(len(M)))


def _all_gl(ell, q):
    out = []
    for flat in itertools.product(range(q), repeat=ell * ell):
        M = tuple(tuple(flat[i * ell:(i + 1) * ell]) for i in range(ell))
        if fq.rank(M, q) == ell:
            out.append(M)
    return out


def _report(failures, objective):
    from . import hierarchy as hz
    listed = [hz.Violation(c, w, None, "audit") for c, w in failures[:hz.MAX_LISTED_VIOLATIONS]]
    status = hz.FEASIBLE if not failures else hz.INFEASIBLE
    return hz.FeasibilityReport(not failures, listed, objective, status, len(failures), ["independent audit"])


def audit_certificate(cert, spec: ValidSpec | None = None):
    """Independent re-check by naive character sums, returned as a FeasibilityReport."""
    from . import hierarchy as hz
    spec = spec or cert.spec
    q, n, ell = spec.q, spec.n, cert.ell
    failures = []
    if cert.formulation == hz.MDUAL:
        return _audit_mdual(cert, spec)
    if q ** (ell * n) > AUDIT_MAX_POINTS:
        raise BudgetExceeded("audit limited to 2^10 points")
    if q != 2:
        raise UnsupportedField("the audit path is exact for q = 2 only")
    pts = _points(ell, n, q)
    zero = pts[0]
    valid_nz = [X for X in pts if X != zero and matrix_valid(X, spec)]

    def vals_of(f):
        return {X: f(X) for X in pts}

    if cert.formulation == hz.LPDUAL:
        g = vals_of(cert.payload["g"])
        beta = cert.payload.get("beta")
        b = vals_of(beta) if beta is not None else None
        ghat = _naive_partial(g, pts, ell, q, n, ell)
        if ghat[zero] != 1:
            failures.append(("normalization", zero))
        failures += [("fourier", Y) for Y in pts if ghat[Y] < 0]
        for X in valid_nz:
            neg = tuple(tuple((-x) % q for x in r) for r in X)
            lhs = g[X] + (b[X] - b[neg] if b else 0)
            if lhs > 0:
                failures.append(("validity", X))
        objective = g[zero]
    elif cert.formulation == hz.SYMMP:
        G = {X: Fraction(0) for X in pts}
        for k, gk in enumerate(cert.payload["g"], start=1):
            if gk is None:
                continue
            vals = vals_of(gk)
            Fk = _naive_partial(vals, pts, k, q, n, ell)
            failures += [(f"partial_fourier[k={k}]", Y) for Y in pts if Fk[Y] < 0]
            for X in pts:
                G[X] += vals[X]
        group = _all_gl(ell, q)
        for X in valid_nz:
            avg = sum((G[_matmul_rows(M, X, q)] for M in group), Fraction(0)) / len(group)
            if 1 + avg > 0:
                failures.append(("validity", X))
        objective = 1 + G[zero]
    elif cert.formulation == hz.PLPDUAL:
        total = {X: Fraction(0) for X in pts}
        for (k, M), h in cert.payload["h"].items():
            vals = vals_of(h)
            failures += [(f"nonnegativity[k={k}]", X) for X in pts if vals[X] < 0]
            Minv = fq.inverse(M, q)
            # F_{k,M}(h)(X) = q^{-ln} sum_Z h(Z) conj chi^{(k)}_{M^-1 X}(M^-1 Z)
            moved = {Z: _matmul_rows(Minv, Z, q) for Z in pts}
            for X in pts:
                Y = moved[X]
                acc = Fraction(0)
                for Z in pts:
                    W = moved[Z]
                    if W[k:] != Y[k:]:
                        continue
                    acc += vals[Z] * (_chi(Y[:k], W[:k], q) if k else 1)
                total[X] += acc * Fraction(q ** ((ell - k) * n), q ** (ell * n))
        beta = cert.payload.get("beta")
        b = vals_of(beta) if beta is not None else None
        for X in valid_nz:
            neg = tuple(tuple((-x) % q for x in r) for r in X)
            lhs = 1 + total[X] + (b[X] - b[neg] if b else 0)
            if lhs > 0:
                failures.append(("validity", X))
        objective = 1 + total[zero]
    else:
        raise ValueError(cert.formulation)
    return _report(failures, objective)


def _audit_mdual(cert, spec):
    from . import hierarchy as hz
    q, n, ell = spec.q, spec.n, cert.ell
    spaces = [(S, fq.span(S, q, n)) for S in SubspaceIter(n, q)]
    failures = []
    alpha = Fraction(cert.payload["alpha"])
    for S, setS in spaces:
        b = hz.mdual_beta(cert, S)
        c = hz.mdual_gamma(cert, S)
        if b < 0 or c < 0:
            failures.append(("nonnegativity", S))
    for S, setS in spaces:
        if not code_valid(S, spec):
            continue
        up = sum((hz.mdual_beta(cert, T) for T, setT in spaces if setS <= setT), Fraction(0))
        down = sum((hz.mdual_gamma(cert, T) for T, setT in spaces if setT <= setS), Fraction(0))
        size = len(setS) ** ell
        if size + size * up + down != alpha:
            failures.append(("equality-to-objective", S))
    return _report(failures, alpha)


# ---------------------------------------------------------------- dense LP

def build_dense_primal(spec: ValidSpec, ell: int):
    """The full primal LP over F_2^{l x n} with f(0) = 1 substituted out.

    Columns: f(X) for valid nonzero X. Rows: for each Z, sum_X (-1)^{<Z,X>} f(X) >= -1.
    The optimum equals 1 + the optimum of this LP.
    """
    from .simplex import GE, LpProblem
    q, n = spec.q, spec.n
    if q != 2:
        raise UnsupportedField("dense LP implemented for q = 2")
    if q ** (ell * n) > DENSE_LP_MAX_POINTS:
        raise BudgetExceeded("dense LP limited to 2^10 points")
    pts = _points(ell, n, q)
    zero = pts[0]
    cols = [X for X in pts if X != zero and matrix_valid(X, spec)]
    p = LpProblem("max", [1] * len(cols), col_names=[str(X) for X in cols])
    for Z in pts:
        row = {j: _chi(Z, X, q) for j, X in enumerate(cols)}
        p.add_row(row, GE, -1, name=f"fourier{Z}")
    return p, cols


def primal_optimum_dense(spec: ValidSpec, ell: int) -> Fraction:
    from .simplex import solve
    p, _ = build_dense_primal(spec, ell)
    if p.ncols == 0:
        return Fraction(1)
    sol = solve(p)
    if sol.status != "optimal":
        raise RuntimeError(f"dense LP status {sol.status}")
    return 1 + sol.objective
