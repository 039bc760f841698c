"""Valid-code families and the matrices whose row span is valid."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

from . import configs as cfg
from . import fq
from .errors import UnsupportedField
from .gridfunc import check_dense_budget


@dataclass(frozen=True)
class DistanceAtLeast:
    d: int


@dataclass(frozen=True)
class EpsilonBalanced:
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        if not 0 < self.eps < 1 and self.eps != 1:
            raise ValueError("eps must lie in (0, 1]")


@dataclass(frozen=True)
class DimAtMost:
    k: int


Variant = Union[DistanceAtLeast, EpsilonBalanced, DimAtMost]


@dataclass(frozen=True)
class ValidSpec:
    variant: Variant
    n: int
    q: int = 2

    def __post_init__(self):
        if isinstance(self.variant, EpsilonBalanced) and self.q != 2:
            raise UnsupportedField("epsilon-balanced codes are defined over F_2 only")

    # ----------------------------------------------------------- weights
    def weight_ok(self, w: int) -> bool:
        """Condition on the weight of a nonzero vector."""
        v = self.variant
        if isinstance(v, DistanceAtLeast):
            return w >= v.d
        if isinstance(v, EpsilonBalanced):
            lo = (1 - v.eps) * self.n / 2
            hi = (1 + v.eps) * self.n / 2
            return lo <= w <= hi
        return True

    def subspace_closed(self) -> bool:
        return True

    def to_json(self) -> dict:
        v = self.variant
        base = {"n": self.n, "q": self.q}
        if isinstance(v, DistanceAtLeast):
            return {"variant": "distance", "d": v.d, **base}
        if isinstance(v, EpsilonBalanced):
            return {"variant": "balanced", "eps": f"{v.eps.numerator}/{v.eps.denominator}", **base}
        return {"variant": "dim", "k": v.k, **base}

    @staticmethod
    def from_json(obj: dict) -> "ValidSpec":
        kind = obj["variant"]
        if kind == "distance":
            var = DistanceAtLeast(int(obj["d"]))
        elif kind == "balanced":
            var = EpsilonBalanced(Fraction(obj["eps"]))
        elif kind == "dim":
            var = DimAtMost(int(obj["k"]))
        else:
            raise ValueError(f"unknown spec variant {kind!r}")
        return ValidSpec(var, int(obj["n"]), int(obj.get("q", 2)))

    def __str__(self):
        v = self.variant
        if isinstance(v, DistanceAtLeast):
            return f"distance>={v.d}"
        if isinstance(v, EpsilonBalanced):
            return f"balanced(eps={v.eps})"
        return f"dim<={v.k}"


def distance(d: int, n: int, q: int = 2) -> ValidSpec:
    return ValidSpec(DistanceAtLeast(d), n, q)


def balanced(eps, n: int) -> ValidSpec:
    return ValidSpec(EpsilonBalanced(Fraction(eps)), n, 2)


def dim_at_most(k: int, n: int, q: int = 2) -> ValidSpec:
    return ValidSpec(DimAtMost(k), n, q)


def parse_spec(text: str, n: int, q: int = 2) -> ValidSpec:
    """Parse 'distance:3', 'balanced:1/2' or 'dim:2'."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("distance", "d"):
        return distance(int(arg), n, q)
    if kind in ("balanced", "eps"):
        return balanced(Fraction(arg), n)
    if kind in ("dim", "dimatmost"):
        return dim_at_most(int(arg), n, q)
    raise ValueError(f"cannot parse spec {text!r}")


# ---------------------------------------------------------------- predicates

def vector_valid(x: Sequence[int], spec: ValidSpec) -> bool:
    if len(x) != spec.n:
        raise ValueError("vector length does not match spec.n")
    w = fq.weight(x)
    return w == 0 or spec.weight_ok(w)


def matrix_valid(X, spec: ValidSpec) -> bool:
    X = fq.as_mat(X)
    if isinstance(spec.variant, DimAtMost):
        return fq.rank(X, spec.q) <= spec.variant.k
    ell = len(X)
    for u in itertools.product(range(spec.q), repeat=ell):
        if any(u) and not vector_valid(fq.combine(u, X, spec.q), spec):
            return False
    return True


def code_valid(basis, spec: ValidSpec) -> bool:
    """Validity of the subspace spanned by the rows of `basis`."""
    basis = fq.as_mat(basis)
    if not basis:
        return True
    return matrix_valid(basis, spec)


@lru_cache(maxsize=32)
def valid_mask(spec: ValidSpec, ell: int) -> np.ndarray:
    """Boolean array over dense indices: True where the matrix is valid."""
    q, n = spec.q, spec.n
    check_dense_budget(q, ell, n)
    digits = cfg.dense_digits(ell, n, q)
    P = digits.shape[0]
    if fq._is_prime(q):
        def combo(u):
            return np.einsum("i,pin->pn", np.array(u, dtype=np.int64), digits) % q
    else:
        F = fq.field(q)

        def combo(u):
            acc = np.zeros((P, n), dtype=np.int64)
            for i, a in enumerate(u):
                acc = F.add[acc, F.mul[a, digits[:, i, :]]]
            return acc
    mask = np.ones(P, dtype=bool)
    zero_count = np.zeros(P, dtype=np.int64)
    for u in itertools.product(range(q), repeat=ell):
        w = np.count_nonzero(combo(u), axis=1)
        zero_count += w == 0
        if any(u) and not isinstance(spec.variant, DimAtMost):
            ok = np.array([spec.weight_ok(int(x)) for x in range(n + 1)])
            mask &= (w == 0) | ok[w]
    if isinstance(spec.variant, DimAtMost):
        # q^(l - rank) vectors u satisfy uX = 0
        rank = ell - np.round(np.log(zero_count) / np.log(q)).astype(np.int64)
        mask = rank <= spec.variant.k
    mask.setflags(write=False)
    return mask


def enumerate_valid_matrices(spec: ValidSpec, ell: int) -> Iterator[tuple]:
    from .gridfunc import matrix_at
    mask = valid_mask(spec, ell)
    for idx in np.nonzero(mask)[0]:
        yield matrix_at(int(idx), ell, spec.n, spec.q)


def config_valid(g, spec: ValidSpec, ell: int) -> bool:
    """Validity of any matrix with configuration g (validity is column-permutation invariant)."""
    return matrix_valid(cfg.representative(tuple(g), ell, spec.q), spec)
