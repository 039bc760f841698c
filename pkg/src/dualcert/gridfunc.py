"""Functions on F_q^{l x n}: storage, Fourier transforms, convolution and group actions.

Dense values live in a flat array indexed by the matrix entries read row by row,
with entry (1, 1) the most significant base-q digit. Exact values are
``Fraction`` objects in an ``object`` array. For odd prime q the transforms
produce ``complex128`` arrays; those are compared with ``COMPLEX_TOL``.

A function that is constant on column-permutation orbits can instead be stored
"symmetric": one value per configuration, in ``configs.all_configs`` order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import configs as cfg
from . import fq
from .errors import BudgetExceeded, ComplexLeak, ShapeMismatch, UnsupportedField

DENSE_MAX_BITS = 24
COMPLEX_TOL = 1e-9


def set_dense_budget(bits: int) -> None:
    global DENSE_MAX_BITS
    DENSE_MAX_BITS = int(bits)


def check_dense_budget(q: int, ell: int, n: int) -> None:
    if ell * n * math.log2(q) > DENSE_MAX_BITS + 1e-12:
        raise BudgetExceeded(f"dense grid q^(l*n) = {q}^{ell * n} exceeds 2^{DENSE_MAX_BITS}")


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def _frac_array(values) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        arr[i] = _frac(v)
    return arr


def to_scaled(values: np.ndarray):
    """Write a Fraction array as (integer array, common denominator)."""
    den = 1
    for v in values:
        d = v.denominator
        if den % d:
            den = den * d // math.gcd(den, d)
    ints = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        ints[i] = v.numerator * (den // v.denominator)
    return ints, den


def from_scaled(ints: np.ndarray, den: int) -> np.ndarray:
    out = np.empty(len(ints), dtype=object)
    for i, v in enumerate(ints):
        out[i] = Fraction(int(v), den)
    return out


def _maybe_int64(ints: np.ndarray, growth_bits: int) -> np.ndarray:
    if len(ints) == 0:
        return ints
    big = max(abs(int(x)) for x in ints)
    if big.bit_length() + growth_bits < 62:
        return ints.astype(np.int64)
    return ints


def wht_int(ints: np.ndarray, total_axes: int, axes: int) -> np.ndarray:
    """Unnormalized +-1 transform of a flat length-2**total_axes array over its first `axes` bits."""
    arr = _maybe_int64(ints, axes)
    for ax in range(axes):
        view = arr.reshape(2 ** ax, 2, 2 ** (total_axes - ax - 1))
        a0 = view[:, 0, :]
        a1 = view[:, 1, :]
        arr = np.stack([a0 + a1, a0 - a1], axis=1).reshape(-1)
    if arr.dtype != object:
        arr = arr.astype(object)
        arr = np.array([int(x) for x in arr], dtype=object)
    return arr


class GridFunction:
    """A function F_q^{l x n} -> Q (or C), dense or configuration-indexed."""

    __slots__ = ("q", "ell", "n", "repr", "values")

    def __init__(self, q: int, ell: int, n: int, values, repr: str = "dense"):
        self.q, self.ell, self.n, self.repr = int(q), int(ell), int(n), repr
        if repr == "dense":
            if isinstance(values, np.ndarray) and values.dtype == np.complex128:
                vals = values.reshape(-1)
            elif isinstance(values, np.ndarray) and values.dtype == object and all(
                    isinstance(v, Fraction) for v in values.reshape(-1)):
                vals = values.reshape(-1)
            else:
                vals = _frac_array(list(np.asarray(values, dtype=object).reshape(-1)))
            if len(vals) != q ** (ell * n):
                raise ShapeMismatch(f"dense length {len(vals)} != {q}^{ell * n}")
        elif repr == "symmetric":
            vals = _frac_array(list(values))
            if len(vals) != cfg.num_configs(ell, n, q):
                raise ShapeMismatch("symmetric value count does not match the configuration count")
        else:
            raise ValueError(f"unknown representation {repr!r}")
        self.values = vals

    # ---------------------------------------------------------- constructors
    @classmethod
    def zeros(cls, q, ell, n, repr="dense"):
        size = q ** (ell * n) if repr == "dense" else cfg.num_configs(ell, n, q)
        if repr == "dense":
            check_dense_budget(q, ell, n)
        return cls(q, ell, n, np.array([Fraction(0)] * size, dtype=object), repr)

    @classmethod
    def constant(cls, q, ell, n, c, repr="dense"):
        size = q ** (ell * n) if repr == "dense" else cfg.num_configs(ell, n, q)
        if repr == "dense":
            check_dense_budget(q, ell, n)
        return cls(q, ell, n, np.array([_frac(c)] * size, dtype=object), repr)

    @classmethod
    def delta(cls, q, ell, n, X=None, value=1):
        """value * indicator of the single matrix X (default the zero matrix)."""
        f = cls.zeros(q, ell, n)
        idx = 0 if X is None else index_of(X, q)
        f.values[idx] = _frac(value)
        return f

    @classmethod
    def from_callable(cls, q, ell, n, fn: Callable):
        check_dense_budget(q, ell, n)
        digits = cfg.dense_digits(ell, n, q)
        vals = [fn(tuple(tuple(int(x) for x in row) for row in d)) for d in digits]
        return cls(q, ell, n, vals)

    @classmethod
    def from_config_callable(cls, q, ell, n, fn: Callable):
        return cls(q, ell, n, [fn(g) for g in cfg.all_configs(ell, n, q)], "symmetric")

    # -------------------------------------------------------------- basics
    @property
    def shape(self):
        return (self.q, self.ell, self.n)

    @property
    def is_complex(self) -> bool:
        return self.values.dtype == np.complex128

    def copy(self):
        return GridFunction(self.q, self.ell, self.n, self.values.copy(), self.repr)

    def to_dense(self) -> "GridFunction":
        if self.repr == "dense":
            return self
        check_dense_budget(self.q, self.ell, self.n)
        ci = cfg.dense_config_index(self.ell, self.n, self.q)
        return GridFunction(self.q, self.ell, self.n, self.values[ci], "dense")

    def to_symmetric(self) -> "GridFunction":
        """Collapse to one value per configuration; raises if not column-permutation invariant."""
        if self.repr == "symmetric":
            return self
        if self.is_complex:
            raise ComplexLeak("symmetric storage holds exact values only")
        ci = cfg.dense_config_index(self.ell, self.n, self.q)
        out = [None] * cfg.num_configs(self.ell, self.n, self.q)
        for i, c in enumerate(ci):
            v = self.values[i]
            if out[c] is None:
                out[c] = v
            elif out[c] != v:
                raise ValueError("function is not constant on column-permutation orbits")
        return GridFunction(self.q, self.ell, self.n, out, "symmetric")

    def is_symmetric(self) -> bool:
        try:
            self.to_symmetric()
            return True
        except ValueError:
            return False

    def __call__(self, X):
        if self.repr == "symmetric":
            return self.values[cfg.config_position(self.ell, self.n, self.q)[cfg.config_of(X, self.q)]]
        return self.values[index_of(X, self.q)]

    def at_config(self, g):
        if self.repr == "symmetric":
            return self.values[cfg.config_position(self.ell, self.n, self.q)[tuple(g)]]
        return self(cfg.representative(tuple(g), self.ell, self.q))

    def at_zero(self):
        return self.values[0]

    def _check(self, other: "GridFunction"):
        if self.shape != other.shape:
            raise ShapeMismatch(f"shapes {self.shape} and {other.shape} differ")

    def _align(self, other):
        self._check(other)
        if self.repr == other.repr:
            return self, other
        return self.to_dense(), other.to_dense()

    def __add__(self, other):
        if not isinstance(other, GridFunction):
            return GridFunction(self.q, self.ell, self.n, self.values + _scalar(other, self), self.repr)
        a, b = self._align(other)
        return GridFunction(a.q, a.ell, a.n, a.values + b.values, a.repr)

    __radd__ = __add__

    def __neg__(self):
        return GridFunction(self.q, self.ell, self.n, -self.values, self.repr)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GridFunction):
            return GridFunction(self.q, self.ell, self.n, self.values * _scalar(other, self), self.repr)
        a, b = self._align(other)
        return GridFunction(a.q, a.ell, a.n, a.values * b.values, a.repr)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / _scalar(c, self) if self.is_complex else Fraction(1) / _frac(c))

    def equals(self, other: "GridFunction", tol: float = 0.0) -> bool:
        a, b = self._align(other)
        if a.is_complex or b.is_complex:
            return bool(np.all(np.abs(a.values.astype(complex) - b.values.astype(complex)) <= max(tol, COMPLEX_TOL)))
        return bool(np.all(a.values == b.values))

    def min(self):
        if self.is_complex:
            raise ComplexLeak("min of complex values")
        return min(self.values)

    def sum(self):
        """Sum over every matrix (class sizes are applied for symmetric storage)."""
        if self.repr == "symmetric":
            return sum((cfg.class_size(g) * v for g, v in zip(cfg.all_configs(self.ell, self.n, self.q), self.values)),
                       Fraction(0))
        return self.values.sum()

    def rational(self) -> "GridFunction":
        """Exact copy; raises ComplexLeak for complex data."""
        if self.is_complex:
            raise ComplexLeak("requested an exact rational function from complex data")
        return self

    def __repr__(self):
        return f"GridFunction(q={self.q}, l={self.ell}, n={self.n}, repr={self.repr!r})"


def _scalar(c, f: GridFunction):
    if f.is_complex:
        return complex(c)
    return _frac(c)


# ------------------------------------------------------------------ indexing

def index_of(X, q: int) -> int:
    idx = 0
    for row in X:
        for x in row:
            idx = idx * q + int(x)
    return idx


def matrix_at(idx: int, ell: int, n: int, q: int) -> tuple:
    flat = []
    for _ in range(ell * n):
        flat.append(idx % q)
        idx //= q
    flat.reverse()
    return tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(ell))


def _weights(ell: int, n: int, q: int) -> np.ndarray:
    return (q ** np.arange(ell * n - 1, -1, -1, dtype=np.int64)).reshape(ell, n)


@lru_cache(maxsize=4096)
def gl_index_map(M: tuple, n: int, q: int) -> np.ndarray:
    """perm[i] = index of M * X_i over all dense indices i (prime q)."""
    ell = len(M)
    if not fq._is_prime(q):
        raise UnsupportedField("dense group actions need prime q")
    check_dense_budget(q, ell, n)
    digits = cfg.dense_digits(ell, n, q)
    Mx = np.einsum("ij,pjn->pin", np.array(M, dtype=np.int64), digits) % q
    perm = np.einsum("pin,in->p", Mx, _weights(ell, n, q))
    perm.setflags(write=False)
    return perm


# ---------------------------------------------------------------- transforms

def _require_prime(q):
    if not fq._is_prime(q):
        raise UnsupportedField("Fourier transforms are implemented for prime q only")


def _transform_first_axes(f: GridFunction, axes: int, inverse: bool = False) -> GridFunction:
    """Character transform over the first `axes` entries (normalized forward, plain inverse)."""
    _require_prime(f.q)
    sym = f.repr == "symmetric"
    d = f.to_dense()
    N = f.ell * f.n
    if f.q == 2 and not d.is_complex:
        ints, den = to_scaled(d.values)
        out = wht_int(ints, N, axes)
        scale = den if inverse else den * 2 ** axes
        res = GridFunction(2, f.ell, f.n, from_scaled(out, scale))
    else:
        arr = d.values.astype(np.complex128).reshape((f.q,) * N) if N else d.values.astype(np.complex128)
        ax = tuple(range(axes))
        if axes:
            if inverse:
                arr = np.fft.ifftn(arr, axes=ax) * f.q ** axes
            else:
                arr = np.fft.fftn(arr, axes=ax) / f.q ** axes
        res = GridFunction(f.q, f.ell, f.n, np.ascontiguousarray(arr).reshape(-1).astype(np.complex128))
    if sym and not res.is_complex and f.q == 2 and axes == N:
        return res.to_symmetric()
    return res


def fourier(f: GridFunction) -> GridFunction:
    """hat f(Z) = q^{-l n} sum_X f(X) conj(chi_Z(X))."""
    return _transform_first_axes(f, f.ell * f.n)


def inverse_fourier(F: GridFunction) -> GridFunction:
    """f(X) = sum_Z F(Z) chi_Z(X)."""
    return _transform_first_axes(F, F.ell * F.n, inverse=True)


def partial_fourier(f: GridFunction, k: int, M=None) -> GridFunction:
    """F_{k,M}(f) = F_k(f.M).M^{-1}; F_k transforms rows 1..k and keeps rows k+1..l pointwise."""
    if not 0 <= k <= f.ell:
        raise ValueError("need 0 <= k <= l")
    if M is not None and M != fq.identity(f.ell):
        inner = partial_fourier(act_gl(f.to_dense(), M), k)
        return act_gl(inner, fq.inverse(M, f.q))
    return _transform_first_axes(f, k * f.n)


def convolve(a: GridFunction, b: GridFunction, normalized: bool = False) -> GridFunction:
    """(a*b)(X) = sum_W a(W) b(X - W); divided by q^{l n} when `normalized`."""
    a._check(b)
    _require_prime(a.q)
    sym = a.repr == "symmetric" and b.repr == "symmetric"
    A, B = a.to_dense(), b.to_dense()
    q, N = a.q, a.ell * a.n
    if q == 2 and not (A.is_complex or B.is_complex):
        ia, da = to_scaled(A.values)
        ib, db = to_scaled(B.values)
        prod = wht_int(ia, N, N) * wht_int(ib, N, N)
        out = wht_int(prod, N, N)
        den = da * db * 2 ** N * (2 ** N if normalized else 1)
        res = GridFunction(2, a.ell, a.n, from_scaled(out, den))
        return res.to_symmetric() if sym else res
    shape = (q,) * N
    fa = np.fft.fftn(A.values.astype(np.complex128).reshape(shape))
    fb = np.fft.fftn(B.values.astype(np.complex128).reshape(shape))
    arr = np.fft.ifftn(fa * fb).reshape(-1)
    if normalized:
        arr = arr / q ** N
    return GridFunction(q, a.ell, a.n, arr.astype(np.complex128))


# -------------------------------------------------------------------- actions

def act_gl(f: GridFunction, M) -> GridFunction:
    """(f.M)(X) = f(M X)."""
    M = fq.as_mat(M)
    if len(M) != f.ell:
        raise ShapeMismatch("matrix order does not match l")
    if f.repr == "symmetric":
        # column values transform as u -> M u, so configurations map to configurations
        pos = cfg.config_position(f.ell, f.n, f.q)
        colmap = []
        for idx in range(f.q ** f.ell):
            u = cfg.column_value(idx, f.ell, f.q)
            Mu = fq.matmul(M, tuple((x,) for x in u), f.q)
            colmap.append(cfg.column_value_index([r[0] for r in Mu], f.q))
        out = []
        for g in cfg.all_configs(f.ell, f.n, f.q):
            h = [0] * len(g)
            for idx, c in enumerate(g):
                h[colmap[idx]] += c
            out.append(f.values[pos[tuple(h)]])
        return GridFunction(f.q, f.ell, f.n, out, "symmetric")
    perm = gl_index_map(M, f.n, f.q)
    return GridFunction(f.q, f.ell, f.n, f.values[perm], "dense")


def act_translate(f: GridFunction, z: Sequence[int]) -> GridFunction:
    """(f.z)(X) = f(z.X), where z is added to every row of X."""
    if len(z) != f.n:
        raise ShapeMismatch("translation vector has the wrong length")
    d = f.to_dense()
    digits = cfg.dense_digits(f.ell, f.n, f.q)
    moved = (digits + np.array(z, dtype=np.int64)[None, None, :]) % f.q
    perm = np.einsum("pin,in->p", moved, _weights(f.ell, f.n, f.q))
    return GridFunction(f.q, f.ell, f.n, d.values[perm], "dense")


def act_permute(f: GridFunction, sigma: Sequence[int]) -> GridFunction:
    """(f.sigma)(X) = f(sigma.X) with (sigma.X)_{ij} = X_{i, sigma(j)} (0-based sigma)."""
    if sorted(sigma) != list(range(f.n)):
        raise ShapeMismatch("sigma is not a permutation of the columns")
    if f.repr == "symmetric":
        return f
    digits = cfg.dense_digits(f.ell, f.n, f.q)
    moved = digits[:, :, list(sigma)]
    perm = np.einsum("pin,in->p", moved, _weights(f.ell, f.n, f.q))
    return GridFunction(f.q, f.ell, f.n, f.values[perm], "dense")


def reorder_rows(f: GridFunction, order: Sequence[int]) -> GridFunction:
    """(f.P)(X) = f(P X) where row i of P X is row order[i] of X (0-based)."""
    P = tuple(tuple(int(j == order[i]) for j in range(f.ell)) for i in range(f.ell))
    return act_gl(f, P)


# ------------------------------------------------------------------ JSON I/O

def frac_str(x) -> str:
    x = _frac(x)
    return f"{x.numerator}/{x.denominator}"


def to_json(f: GridFunction) -> dict:
    if f.is_complex:
        raise ComplexLeak("complex functions are not serialized")
    return {"q": f.q, "l": f.ell, "n": f.n, "repr": f.repr, "values": [frac_str(v) for v in f.values]}


def from_json(obj: dict) -> GridFunction:
    return GridFunction(obj["q"], obj["l"], obj["n"], [Fraction(v) for v in obj["values"]], obj.get("repr", "dense"))
