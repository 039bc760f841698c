"""Closed-form subspace-lattice dual certificates certifying the optimum q^{lk} at levels l >= n."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from . import fq
from . import hierarchy as hz
from .errors import PreconditionError
from .valid import ValidSpec, code_valid, dim_at_most


@dataclass(frozen=True)
class BetaTildeVector:
    n: int
    ell: int
    k: int
    q: int
    values: tuple  # beta~_0 .. beta~_{k-1}

    def __getitem__(self, s: int) -> int:
        return self.values[s] if 0 <= s < self.k else 0

    @property
    def nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values)

    @property
    def negative_indices(self) -> list:
        return [s for s, v in enumerate(self.values) if v < 0]


def build_beta_tilde(n: int, ell: int, k: int, q: int, allow_low_level: bool = False) -> BetaTildeVector:
    """beta~_s = q^{l(k-s)} - 1 - sum_{i=s+1}^{k-1} binom(n-s, i-s)_q beta~_i, for s = k-1 down to 0.

    With l < n the values are still computed when ``allow_low_level`` is set (a warning is
    issued and some entries may be negative); otherwise PreconditionError is raised.
    """
    if not 0 <= k <= n:
        raise PreconditionError("need 0 <= k <= n")
    if ell < n:
        if not allow_low_level:
            raise PreconditionError(f"l={ell} < n={n}: non-negativity is not guaranteed")
        warnings.warn("level below n: beta~ may have negative entries", stacklevel=2)
    vals = [0] * k
    for s in range(k - 1, -1, -1):
        acc = q ** (ell * (k - s)) - 1
        for i in range(s + 1, k):
            acc -= fq.gaussian_binomial(n - s, i - s, q) * vals[i]
        vals[s] = acc
    return BetaTildeVector(n, ell, k, q, tuple(vals))


def step_identity_rhs(bt: BetaTildeVector, s: int) -> Fraction:
    """Right side of the two-step rewrite used in the non-negativity induction (s <= k-2)."""
    n, ell, k, q = bt.n, bt.ell, bt.k, bt.q
    qi = fq.q_int(n - s, q)
    out = Fraction(q ** (ell * (k - s))) * (1 - Fraction(qi, q ** ell)) + qi - 1
    for i in range(s + 2, k):
        out += (qi * fq.gaussian_binomial(n - s - 1, i - s - 1, q) - fq.gaussian_binomial(n - s, i - s, q)) * bt[i]
    return out


def build_completeness_cert(n: int, ell: int, k: int, q: int, spec: ValidSpec | None = None,
                            allow_low_level: bool = False) -> hz.DualCertificate:
    """alpha = q^{lk}, beta(T) = beta~_{dim T}, gamma = 0 (stored per dimension)."""
    bt = build_beta_tilde(n, ell, k, q, allow_low_level=allow_low_level)
    spec = spec or dim_at_most(k, n, q)
    beta = {s: Fraction(v) for s, v in enumerate(bt.values)}
    payload = {"alpha": Fraction(q ** (ell * k)), "beta": beta, "gamma": {}, "by_dim": True}
    return hz.DualCertificate(hz.MDUAL, spec, ell, payload)


def max_valid_dimension(spec: ValidSpec) -> int:
    best = 0
    for S in fq.iter_subspaces(spec.n, spec.q):
        if len(S) > best and code_valid(S, spec):
            best = len(S)
    return best


@dataclass
class CompletenessGap:
    dual_objective: Fraction
    oracle_value: int
    equal: bool
    k: int
    feasible: bool


def completeness_gap(n: int, ell: int, spec: ValidSpec) -> CompletenessGap:
    from .oracle import max_valid_code
    k = max_valid_dimension(spec)
    cert = build_completeness_cert(n, ell, k, spec.q, spec)
    rep = hz.check_mdual(cert, spec)
    _, _, best = max_valid_code(spec, ell)
    obj = cert.objective()
    return CompletenessGap(obj, best, obj == best, k, rep.feasible)
