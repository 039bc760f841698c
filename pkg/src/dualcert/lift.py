"""Lifting feasible dual solutions from level k to any level l divisible by k.

The lifted objective is the (l/k)-th power of the input objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import configs as cfg
from . import gridfunc as gf
from . import hierarchy as hz
from .errors import DivisibilityError, InfeasibleInput, PreconditionError, ShapeMismatch
from .gridfunc import GridFunction
from .valid import ValidSpec


@dataclass
class LevelKCertificate:
    """Level-k symmpLPdual data h_1..h_k (functions on F_q^{k x n})."""

    hs: list

    @property
    def k(self) -> int:
        return len(self.hs)

    @property
    def value(self) -> Fraction:
        return 1 + sum((h.at_zero() for h in self.hs if h is not None), Fraction(0))


def _as_level(cert) -> LevelKCertificate:
    if isinstance(cert, LevelKCertificate):
        return cert
    if isinstance(cert, hz.DualCertificate):
        if cert.formulation != hz.SYMMP:
            raise ValueError("expects a symmpLPdual certificate")
        return LevelKCertificate(list(cert.payload["g"]))
    if isinstance(cert, GridFunction):
        return LevelKCertificate([cert])
    return LevelKCertificate(list(cert))


def _verify_input(level: LevelKCertificate, spec: ValidSpec):
    cert = hz.DualCertificate(hz.SYMMP, spec, level.k, {"g": list(level.hs)})
    rep = hz.check_symmp(cert, spec)
    if not rep.feasible:
        raise InfeasibleInput(f"level-{level.k} input violates {rep.violation_count} constraints", rep)


def _zero_rows_mask(q, ell, n, first: int, last: int) -> np.ndarray:
    """Dense mask of X with rows first..last (1-based, inclusive) equal to zero."""
    idx = np.arange(q ** (ell * n), dtype=np.int64)
    if last < first:
        return np.ones(len(idx), dtype=bool)
    block = (idx // q ** ((ell - last) * n)) % q ** ((last - first + 1) * n)
    return block == 0


def lift_level1(h, ell: int, spec: ValidSpec, strict: bool = True, symmetric: bool | None = None) -> hz.DualCertificate:
    """g_l(X) = sum_{t=1}^{l} (1+h(0))^{l-t} h(X_1) 1[X_{t+1..l} = 0]; g_1 = ... = g_{l-1} = 0."""
    level = _as_level(h)
    if level.k != 1:
        raise ShapeMismatch("lift_level1 expects a level-1 function")
    h = level.hs[0]
    q, n = spec.q, spec.n
    if h.shape != (q, 1, n):
        raise ShapeMismatch("h must live on F_q^n")
    if ell > n:
        raise PreconditionError("the lift needs l <= n")
    if strict:
        _verify_input(level, spec)
    V = level.value
    symmetric = h.repr == "symmetric" if symmetric is None else symmetric
    if symmetric:
        def fn(X):
            tot = Fraction(0)
            for t in range(1, ell + 1):
                if all(not any(r) for r in X[t:]):
                    tot += V ** (ell - t)
            return tot * h((X[0],))
        g = GridFunction.from_config_callable(q, ell, n, lambda gcfg: fn(cfg.representative(gcfg, ell, q)))
    else:
        gf.check_dense_budget(q, ell, n)
        hd = h.to_dense().values
        idx = np.arange(q ** (ell * n), dtype=np.int64)
        hv = hd[idx // q ** ((ell - 1) * n)]
        coef = np.array([Fraction(0)] * len(idx), dtype=object)
        for t in range(1, ell + 1):
            coef[_zero_rows_mask(q, ell, n, t + 1, ell)] += V ** (ell - t)
        g = GridFunction(q, ell, n, hv * coef)
    gs = [None] * ell
    gs[ell - 1] = g
    return hz.DualCertificate(hz.SYMMP, spec, ell, {"g": gs})


def lift_general(cert, ell: int, spec: ValidSpec, strict: bool = True, symmetric: bool | None = None) -> hz.DualCertificate:
    """Level k -> level l (k | l).

    g_u = 0 for u <= l-k; otherwise
    g_u(X) = sum_{t=0}^{l/k-1} V^t h_{u-l+k}(X_{l-k+1..l}) 1[X_{1..kt} = 0].
    """
    level = _as_level(cert)
    k = level.k
    q, n = spec.q, spec.n
    if ell % k:
        raise DivisibilityError(f"k={k} does not divide l={ell}")
    if ell > n:
        raise PreconditionError("the lift needs l <= n")
    for h in level.hs:
        if h is not None and h.shape != (q, k, n):
            raise ShapeMismatch("level-k functions must live on F_q^{k x n}")
    if strict:
        _verify_input(level, spec)
    V = level.value
    reps = ell // k
    symmetric = all(h is None or h.repr == "symmetric" for h in level.hs) if symmetric is None else symmetric
    gs = [None] * ell
    for j, h in enumerate(level.hs, start=1):
        if h is None:
            continue
        u = ell - k + j
        if symmetric:
            def fn(X, h=h):
                tot = Fraction(0)
                for t in range(reps):
                    if all(not any(r) for r in X[: k * t]):
                        tot += V ** t
                return tot * h(X[ell - k:])
            g = GridFunction.from_config_callable(q, ell, n, lambda gcfg, fn=fn: fn(cfg.representative(gcfg, ell, q)))
        else:
            gf.check_dense_budget(q, ell, n)
            hd = h.to_dense().values
            idx = np.arange(q ** (ell * n), dtype=np.int64)
            hv = hd[idx % q ** (k * n)]
            coef = np.array([Fraction(0)] * len(idx), dtype=object)
            for t in range(reps):
                coef[_zero_rows_mask(q, ell, n, 1, k * t)] += V ** t
            g = GridFunction(q, ell, n, hv * coef)
        gs[u - 1] = g
    return hz.DualCertificate(hz.SYMMP, spec, ell, {"g": gs})


def compare_prop_vs_thm(h, ell: int, spec: ValidSpec, strict: bool = False) -> bool:
    """Both level-1 lifts agree after reversing the row order, and their objectives coincide."""
    a = lift_level1(h, ell, spec, strict=strict, symmetric=False)
    b = lift_general(h, ell, spec, strict=strict, symmetric=False)
    if a.objective() != b.objective():
        return False
    reversed_rows = list(range(ell - 1, -1, -1))
    ga = gf.reorder_rows(a.payload["g"][ell - 1], reversed_rows)
    gb = b.payload["g"][ell - 1]
    return all(x is None for x in a.payload["g"][:-1]) and all(x is None for x in b.payload["g"][:-1]) and ga.equals(gb)


def trivial_level(spec: ValidSpec, k: int) -> LevelKCertificate:
    """Level-k trivial certificate of value q^{kn} (only h_k nonzero)."""
    return LevelKCertificate(list(hz.trivial_symmp(spec, k).payload["g"]))
