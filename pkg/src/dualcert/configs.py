"""Column-multiplicity configurations of matrices in F_q^{l x n}.

A configuration is stored as a tuple of ``q**l`` counts, one per possible column
value ``u``. Column values are indexed like the dense grid: row 1 is the most
significant digit, so for ``q = 2`` and ``l = 2`` the order is 00, 01, 10, 11
(written as (row1, row2)).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

Configuration = tuple  # tuple[int, ...] of length q**l


def column_value_index(col: Sequence[int], q: int) -> int:
    idx = 0
    for x in col:
        idx = idx * q + int(x)
    return idx


def column_value(idx: int, ell: int, q: int) -> tuple:
    out = []
    for _ in range(ell):
        out.append(idx % q)
        idx //= q
    return tuple(reversed(out))


def config_of(X, q: int = 2) -> Configuration:
    """Column multiplicities of the matrix X (a sequence of rows)."""
    ell = len(X)
    n = len(X[0])
    counts = [0] * (q ** ell)
    for j in range(n):
        counts[column_value_index([X[i][j] for i in range(ell)], q)] += 1
    return tuple(counts)


def zero_config(ell: int, n: int, q: int = 2) -> Configuration:
    return (n,) + (0,) * (q ** ell - 1)


def class_size(g: Configuration) -> int:
    """Number of matrices with configuration g: the multinomial n! / prod g(u)!."""
    n = sum(g)
    out = math.factorial(n)
    for c in g:
        out //= math.factorial(c)
    return out


def _compositions(n: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=64)
def all_configs(ell: int, n: int, q: int = 2) -> tuple:
    """Every configuration of total mass n, starting with the zero-matrix configuration."""
    return tuple(_compositions(n, q ** ell))


def num_configs(ell: int, n: int, q: int = 2) -> int:
    return math.comb(n + q ** ell - 1, q ** ell - 1)


@lru_cache(maxsize=64)
def config_position(ell: int, n: int, q: int = 2) -> dict:
    return {g: i for i, g in enumerate(all_configs(ell, n, q))}


def negate(g: Configuration, ell: int, q: int) -> Configuration:
    """Configuration of -X given the configuration of X."""
    if q == 2:
        return tuple(g)
    out = [0] * len(g)
    for idx, c in enumerate(g):
        u = column_value(idx, ell, q)
        out[column_value_index([(-x) % q for x in u], q)] += c
    return tuple(out)


def dense_digits(ell: int, n: int, q: int) -> np.ndarray:
    """Entries of every matrix in dense index order, shape (q**(l*n), l, n)."""
    N = ell * n
    idx = np.arange(q ** N, dtype=np.int64)
    digits = np.empty((q ** N, N), dtype=np.int64)
    for pos in range(N - 1, -1, -1):
        digits[:, pos] = idx % q
        idx //= q
    return digits.reshape(q ** N, ell, n)


@lru_cache(maxsize=32)
def dense_config_index(ell: int, n: int, q: int = 2) -> np.ndarray:
    """For every dense index, the position of its configuration in all_configs."""
    digits = dense_digits(ell, n, q)
    weights = q ** np.arange(ell - 1, -1, -1, dtype=np.int64)
    colvals = np.einsum("pin,i->pn", digits, weights)  # (P, n)
    counts = np.zeros((digits.shape[0], q ** ell), dtype=np.int64)
    for j in range(n):
        counts[np.arange(digits.shape[0]), colvals[:, j]] += 1
    pos = config_position(ell, n, q)
    uniq, inverse = np.unique(counts, axis=0, return_inverse=True)
    lookup = np.array([pos[tuple(int(x) for x in row)] for row in uniq], dtype=np.int64)
    out = lookup[inverse.reshape(-1)]
    out.setflags(write=False)
    return out


def representative(g: Configuration, ell: int, q: int = 2) -> tuple:
    """A matrix (tuple of rows) whose configuration is g; columns in increasing value order."""
    cols = []
    for idx, c in enumerate(g):
        cols.extend([column_value(idx, ell, q)] * c)
    return tuple(tuple(col[i] for col in cols) for i in range(ell))
