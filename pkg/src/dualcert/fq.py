"""Finite fields, matrices over them, GL enumeration and q-combinatorics.

Field elements are plain ints in ``range(q)``. For prime ``q`` the encoding is
the residue; for ``q = 4`` an element ``a1*2 + a0`` stands for ``a1*x + a0``
in F_2[x]/(x^2 + x + 1). Matrices are tuples of row tuples (immutable and
hashable); row/column numbering in user-facing helpers is 1-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, UnsupportedField

Mat = tuple  # tuple[tuple[int, ...], ...]

GL_ENUM_MAX_BITS = 25
GL_ENUM_MAX_ELEMENTS = 1_000_000


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % p for p in range(2, math.isqrt(q) + 1))


class Field:
    """Arithmetic tables for F_q (prime q, or q = 4)."""

    def __init__(self, q: int):
        if _is_prime(q):
            add = np.add.outer(np.arange(q), np.arange(q)) % q
            mul = np.multiply.outer(np.arange(q), np.arange(q)) % q
        elif q == 4:
            add = np.bitwise_xor.outer(np.arange(4), np.arange(4))
            mul = np.zeros((4, 4), dtype=np.int64)
            for a in range(4):
                for b in range(4):
                    mul[a, b] = _gf4_mul(a, b)
        else:
            raise UnsupportedField(f"q={q}: only prime q and q=4 are supported")
        self.q = q
        self.prime = _is_prime(q)
        self.char = q if self.prime else 2
        self.add = add.astype(np.int64)
        self.mul = mul.astype(np.int64)
        self.neg = np.array([int(np.where(self.add[a] == 0)[0][0]) for a in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.where(self.mul[a] == 1)[0][0])
        self.inv = inv
        self.sub = self.add[:, self.neg]  # sub[a, b] = a - b

    def __repr__(self):
        return f"Field({self.q})"


def _gf4_mul(a: int, b: int) -> int:
    # carry-less product reduced by x^2 + x + 1
    p = 0
    for i in range(2):
        if (b >> i) & 1:
            p ^= a << i
    if p & 4:
        p ^= 0b111
    return p


@lru_cache(maxsize=None)
def field(q: int) -> Field:
    return Field(q)


# ---------------------------------------------------------------- q-numbers

def q_int(n: int, q: int):
    """Geometric sum [n]_q = 1 + q + ... + q^(n-1), extended to n <= 0."""
    if n >= 0:
        return n if q == 1 else sum(q ** j for j in range(n))
    # [n]_q = -sum_{j=n}^{-1} q^j
    return -sum(Fraction(1, q ** -j) for j in range(n, 0))


def q_falling(n: int, k: int, q: int):
    """(n)_{k,q} = prod_{j=0}^{k-1} [n-j]_q, with the reciprocal convention for k < 0."""
    if k >= 0:
        out = 1
        for j in range(k):
            out *= q_int(n - j, q)
        return out
    out = Fraction(1)
    for j in range(k, 0):
        out /= q_int(n - j, q)
    return out


def q_factorial(k: int, q: int):
    return q_falling(k, k, q)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n (ordinary binomial when q = 1)."""
    if k < 0:
        return 0
    val = Fraction(q_falling(n, k, q)) / Fraction(q_factorial(k, q))
    assert val.denominator == 1
    return int(val)


def gl_order(ell: int, q: int) -> int:
    """|GL_ell(F_q)| = (q-1)^ell * q^binom(ell,2) * ell!_q."""
    return (q - 1) ** ell * q ** math.comb(ell, 2) * q_factorial(ell, q)


# ------------------------------------------------------------------ matrices

def as_mat(rows: Sequence[Sequence[int]]) -> Mat:
    return tuple(tuple(int(x) for x in r) for r in rows)


def zeros(rows: int, cols: int) -> Mat:
    return tuple((0,) * cols for _ in range(rows))


def identity(ell: int) -> Mat:
    return tuple(tuple(int(i == j) for j in range(ell)) for i in range(ell))


def matmul(A: Mat, B: Mat, q: int) -> Mat:
    F = field(q)
    inner = len(B)
    cols = len(B[0]) if inner else 0
    out = []
    for row in A:
        acc = [0] * cols
        for k in range(inner):
            a = row[k]
            if a:
                brow = B[k]
                for j in range(cols):
                    acc[j] = int(F.add[acc[j], F.mul[a, brow[j]]])
        out.append(tuple(acc))
    return tuple(out)


def rows(X: Mat, i: int, j: int) -> Mat:
    """Rows i..j of X, 1-based and inclusive (empty when j < i)."""
    return tuple(X[i - 1:j])


def rref(X: Mat, q: int) -> Mat:
    """Reduced row echelon form with zero rows dropped; canonical for the row space."""
    F = field(q)
    M = [list(r) for r in X]
    n = len(M[0]) if M else 0
    out: list[list[int]] = []
    for c in range(n):
        piv = next((i for i, r in enumerate(M) if r[c]), None)
        if piv is None:
            continue
        r = M.pop(piv)
        s = int(F.inv[r[c]])
        r = [int(F.mul[s, x]) for x in r]
        for lst in (M, out):
            for other in lst:
                f = other[c]
                if f:
                    for j in range(n):
                        other[j] = int(F.sub[other[j], F.mul[f, r[j]]])
        out.append(r)
    return tuple(tuple(r) for r in out)


def rank(X: Mat, q: int) -> int:
    if not X:
        return 0
    return len(rref(X, q))


def det_nonzero(M: Mat, q: int) -> bool:
    return rank(M, q) == len(M)


def inverse(M: Mat, q: int) -> Mat:
    F = field(q)
    ell = len(M)
    aug = [list(M[i]) + [int(i == j) for j in range(ell)] for i in range(ell)]
    for c in range(ell):
        piv = next((i for i in range(c, ell) if aug[i][c]), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        s = int(F.inv[aug[c][c]])
        aug[c] = [int(F.mul[s, x]) for x in aug[c]]
        for i in range(ell):
            f = aug[i][c]
            if i != c and f:
                aug[i] = [int(F.sub[a, F.mul[f, b]]) for a, b in zip(aug[i], aug[c])]
    return tuple(tuple(r[ell:]) for r in aug)


def span(X: Mat, q: int, n: int | None = None) -> frozenset:
    """All F_q-combinations of the rows of X, as a set of row tuples (pass n for an empty X)."""
    n = len(X[0]) if X else (n or 0)
    out = set()
    for coeffs in itertools.product(range(q), repeat=len(X)):
        out.add(combine(coeffs, X, q) if X else (0,) * n)
    return frozenset(out)


def combine(coeffs: Sequence[int], X: Mat, q: int) -> tuple:
    """The row vector u X for coefficient vector u."""
    F = field(q)
    n = len(X[0])
    acc = [0] * n
    for a, row in zip(coeffs, X):
        if a:
            for j in range(n):
                acc[j] = int(F.add[acc[j], F.mul[a, row[j]]])
    return tuple(acc)


def weight(x: Sequence[int]) -> int:
    return sum(1 for v in x if v)


# ----------------------------------------------------------------- GL groups

@dataclass(frozen=True)
class GLGroup:
    ell: int
    q: int
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def _vectors(length: int, q: int) -> Iterator[tuple]:
    return itertools.product(range(q), repeat=length)


@lru_cache(maxsize=16)
def enumerate_gl(ell: int, q: int) -> GLGroup:
    """All invertible ell x ell matrices, lexicographic in their flattened entries."""
    if ell * ell * math.log2(q) > GL_ENUM_MAX_BITS or gl_order(ell, q) > GL_ENUM_MAX_ELEMENTS:
        raise BudgetExceeded(f"GL_{ell}(F_{q}) has {gl_order(ell, q)} elements")
    vecs = [v for v in _vectors(ell, q)]
    out: list[Mat] = []

    def extend(prefix: list[tuple], spanned: frozenset):
        if len(prefix) == ell:
            out.append(tuple(prefix))
            return
        for v in vecs:
            if v not in spanned:
                new_rows = prefix + [v]
                extend(new_rows, span(tuple(new_rows), q))

    extend([], frozenset({(0,) * ell}))
    return GLGroup(ell, q, tuple(out))


def count_m_qst(X: Mat, s: int, t: int, q: int) -> int:
    """|{M in GL : (MX)_{1..s} = 0 and (MX)_{t+1..ell} = 0}| in closed form."""
    ell = len(X)
    if not 0 <= s <= t <= ell:
        raise ValueError("need 0 <= s <= t <= ell")
    z = s + ell - t
    r = rank(X, q)
    val = (q - 1) ** ell * q ** math.comb(ell, 2) * q_falling(ell - z, r, q) * q_factorial(ell - r, q)
    return int(val)


def enumerate_m_qst(X: Mat, s: int, t: int, q: int, group: GLGroup | None = None) -> list:
    ell = len(X)
    if not 0 <= s <= t <= ell:
        raise ValueError("need 0 <= s <= t <= ell")
    group = group or enumerate_gl(ell, q)
    out = []
    for M in group:
        MX = matmul(M, X, q)
        if all(not any(r) for r in MX[:s]) and all(not any(r) for r in MX[t:]):
            out.append(M)
    return out


# ----------------------------------------------------------------- subspaces

def iter_subspaces(n: int, q: int, dims: Iterator[int] | Sequence[int] | None = None) -> Iterator[Mat]:
    """Every subspace of F_q^n as its RREF basis, by dimension then pivot set.

    Duplicate free; the count in dimension k equals gaussian_binomial(n, k, q).
    """
    dims = range(n + 1) if dims is None else dims
    for k in dims:
        for pivots in itertools.combinations(range(n), k):
            # free positions: row i, column c > pivots[i], c not a pivot column
            free = [(i, c) for i in range(k) for c in range(pivots[i] + 1, n) if c not in pivots]
            for vals in itertools.product(range(q), repeat=len(free)):
                M = [[0] * n for _ in range(k)]
                for i, p in enumerate(pivots):
                    M[i][p] = 1
                for (i, c), v in zip(free, vals):
                    M[i][c] = v
                yield tuple(tuple(r) for r in M)


def subspace_count(n: int, q: int) -> int:
    return sum(gaussian_binomial(n, k, q) for k in range(n + 1))


def is_subspace_of(S: Mat, T: Mat, q: int) -> bool:
    """True when span(S) is contained in span(T) (both given by bases)."""
    if not S:
        return True
    return rank(tuple(T) + tuple(S), q) == rank(T, q)
