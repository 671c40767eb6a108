"""Real Clifford algebras Cl(p, q) over an orthonormal basis.

Basis blades are encoded as bitmasks: bit ``i`` set means the basis vector
``e_i`` takes part in the blade, factors kept in ascending index order.
Indices ``0..p-1`` square to +1 and ``p..n-1`` square to -1, so ``Cl(1, 3)``
gives the spacetime frame with gamma_0^2 = +1 and gamma_k^2 = -1.

Two representations live side by side:

* :class:`Multivector` -- an immutable sparse map ``mask -> float``. Arithmetic
  is done blade by blade and never drops a term.
* :class:`Algebra` -- dense, batched numpy kernels over arrays whose last axis
  has length ``2**n``. Used by the field and solver code.

Both are driven by :func:`blade_product`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from numbers import Real
from typing import Iterable, Mapping

import numpy as np

MAX_DIMENSION = 12
FLAT_PRODUCT_MAX_DIM = 64


class SignatureMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    p: int
    q: int = 0

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("p and q must be non-negative")
        if not 1 <= self.p + self.q <= MAX_DIMENSION:
            raise ValueError(f"dimension must lie in 1..{MAX_DIMENSION}, got {self.p + self.q}")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def dim(self) -> int:
        return 1 << self.n

    def square(self, i: int) -> int:
        """Quadratic form value of basis vector ``i``."""
        if not 0 <= i < self.n:
            raise IndexError(i)
        return 1 if i < self.p else -1

    @property
    def is_spacetime(self) -> bool:
        return self.p == 1 and self.q == 3


def grade_of(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=None)
def _blade_product(a: int, b: int, p: int, n: int) -> tuple[int, int]:
    swaps = 0
    x = a >> 1
    while x:
        swaps += grade_of(x & b)
        x >>= 1
    sign = -1 if swaps & 1 else 1
    # repeated indices at or above p square to -1
    negative = grade_of((a & b) >> p)
    if negative & 1:
        sign = -sign
    return a ^ b, sign


def blade_product(a: int, b: int, sig: Signature) -> tuple[int, int]:
    """Product of two canonical basis blades.

    Returns ``(mask, sign)`` with ``e_a e_b = sign * e_mask``. The sign is never
    zero because the quadratic form is non-degenerate.
    """
    limit = sig.dim
    if not (0 <= a < limit and 0 <= b < limit):
        raise ValueError(f"blade masks {a}, {b} out of range for {sig}")
    return _blade_product(a, b, sig.p, sig.n)


def reverse_sign(mask: int) -> int:
    r = grade_of(mask)
    return -1 if (r * (r - 1) // 2) & 1 else 1


def _coerce_scalar(value) -> float:
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not scalars")
    return float(value)


class Multivector:
    """Immutable sparse multivector.

    Coefficients are stored as ``{mask: float}``. Entries produced by
    arithmetic are kept even when they cancel to exactly zero; use
    :meth:`prune` to drop small terms explicitly.
    """

    __slots__ = ("sig", "_c")

    def __init__(self, sig: Signature, coeffs: Mapping[int, float] | None = None):
        self.sig = sig
        c = {}
        if coeffs:
            for mask, value in coeffs.items():
                mask = int(mask)
                if not 0 <= mask < sig.dim:
                    raise ValueError(f"blade mask {mask} out of range for {sig}")
                c[mask] = c.get(mask, 0.0) + float(value)
        self._c = c

    # -- construction -----------------------------------------------------
    @classmethod
    def scalar(cls, sig: Signature, value: float = 1.0) -> "Multivector":
        return cls(sig, {0: value})

    @classmethod
    def basis_vector(cls, sig: Signature, i: int, coeff: float = 1.0) -> "Multivector":
        sig.square(i)
        return cls(sig, {1 << i: coeff})

    @classmethod
    def blade(cls, sig: Signature, *indices: int) -> "Multivector":
        """Product ``e_i e_j ...`` of basis vectors in the given order."""
        out = cls.scalar(sig)
        for i in indices:
            out = out * cls.basis_vector(sig, i)
        return out

    @classmethod
    def vector(cls, sig: Signature, components: Iterable[float]) -> "Multivector":
        comps = list(components)
        if len(comps) != sig.n:
            raise ValueError(f"expected {sig.n} components")
        return cls(sig, {1 << i: v for i, v in enumerate(comps)})

    @classmethod
    def from_array(cls, sig: Signature, arr) -> "Multivector":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (sig.dim,):
            raise ValueError(f"expected shape ({sig.dim},), got {arr.shape}")
        return cls(sig, {m: v for m, v in enumerate(arr) if v != 0.0})

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.sig.dim)
        for m, v in self._c.items():
            out[m] = v
        return out

    # -- access -----------------------------------------------------------
    @property
    def coeffs(self) -> dict[int, float]:
        return dict(self._c)

    def __getitem__(self, mask: int) -> float:
        return self._c.get(mask, 0.0)

    def terms(self):
        return sorted(self._c.items(), key=lambda kv: (grade_of(kv[0]), kv[0]))

    def grades(self) -> set[int]:
        return {grade_of(m) for m, v in self._c.items() if v != 0.0}

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return math.sqrt(sum(v * v for v in self._c.values()))

    def prune(self, threshold: float = 0.0) -> "Multivector":
        return Multivector(self.sig, {m: v for m, v in self._c.items() if abs(v) > threshold})

    def _check(self, other: "Multivector"):
        if other.sig != self.sig:
            raise SignatureMismatch(f"{self.sig} vs {other.sig}")

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            c = dict(self._c)
            for m, v in other._c.items():
                c[m] = c.get(m, 0.0) + v
            return Multivector(self.sig, c)
        if isinstance(other, Real):
            c = dict(self._c)
            c[0] = c.get(0, 0.0) + _coerce_scalar(other)
            return Multivector(self.sig, c)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.sig, {m: -v for m, v in self._c.items()})

    def __sub__(self, other):
        if isinstance(other, (Multivector, Real)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Real):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, Real):
            s = _coerce_scalar(other)
            return Multivector(self.sig, {m: s * v for m, v in self._c.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Real):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Real):
            return self * (1.0 / _coerce_scalar(other))
        return NotImplemented

    def __xor__(self, other):
        if isinstance(other, Multivector):
            return outer(self, other)
        return NotImplemented

    def __invert__(self):
        return reverse(self)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        if other.sig != self.sig:
            return False
        keys = set(self._c) | set(other._c)
        return all(self[k] == other[k] for k in keys)

    __hash__ = None

    def allclose(self, other: "Multivector", atol: float = 1e-12) -> bool:
        self._check(other)
        return (self - other).norm() <= atol

    def __repr__(self):
        return render(self)

    # convenience
    def grade(self, r: int) -> "Multivector":
        return grade_project(self, r)

    def scalar_part(self) -> float:
        return scalar_part(self)


def render(A: Multivector) -> str:
    """Debug text form, terms sorted by (grade, mask).

    Spacetime blades print as ``γ0γ1...`` (0-based, matching gamma_0..gamma_3);
    every other signature prints ``e1e2...`` (1-based).
    """
    parts = []
    for mask, v in A.terms():
        if v == 0.0:
            continue
        idx = [i for i in range(A.sig.n) if mask >> i & 1]
        if A.sig.is_spacetime:
            name = "".join(f"γ{i}" for i in idx)
        else:
            name = "".join(f"e{i + 1}" for i in idx)
        mag = abs(v)
        if not name:
            body = repr(mag)
        elif mag == 1.0:
            body = name
        else:
            body = f"{mag!r}*{name}"
        if not parts:
            parts.append(body if v > 0 else f"-{body}")
        else:
            parts.append(("+ " if v > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def geometric_product(A: Multivector, B: Multivector) -> Multivector:
    A._check(B)
    sig = A.sig
    out: dict[int, float] = {}
    for ma, va in A._c.items():
        for mb, vb in B._c.items():
            m, s = _blade_product(ma, mb, sig.p, sig.n)
            out[m] = out.get(m, 0.0) + s * va * vb
    return Multivector(sig, out)


def grade_project(A: Multivector, r: int) -> Multivector:
    return Multivector(A.sig, {m: v for m, v in A._c.items() if grade_of(m) == r})


def scalar_part(A: Multivector) -> float:
    return A[0]


def even_part(A: Multivector) -> Multivector:
    return Multivector(A.sig, {m: v for m, v in A._c.items() if grade_of(m) % 2 == 0})


def is_even(A: Multivector, atol: float = 0.0) -> bool:
    return all(abs(v) <= atol for m, v in A._c.items() if grade_of(m) % 2)


def reverse(A: Multivector) -> Multivector:
    return Multivector(A.sig, {m: reverse_sign(m) * v for m, v in A._c.items()})


def outer(A: Multivector, B: Multivector) -> Multivector:
    """Wedge product: grade-(r+s) part of each pair of homogeneous pieces."""
    A._check(B)
    sig = A.sig
    out: dict[int, float] = {}
    for ma, va in A._c.items():
        for mb, vb in B._c.items():
            if ma & mb:
                continue
            m, s = _blade_product(ma, mb, sig.p, sig.n)
            out[m] = out.get(m, 0.0) + s * va * vb
    return Multivector(sig, out)


def _require_vector(a: Multivector, name: str):
    if any(grade_of(m) != 1 and v != 0.0 for m, v in a._c.items()):
        raise ValueError(f"{name} must be a grade-1 vector")


def inner(a: Multivector, b: Multivector) -> float:
    """Symmetric part ``(ab + ba)/2`` of two vectors, returned as a float."""
    _require_vector(a, "a")
    _require_vector(b, "b")
    a._check(b)
    return 0.5 * scalar_part(a * b + b * a)


def commutator(A: Multivector, B: Multivector) -> Multivector:
    return A * B - B * A


def pseudoscalar(sig: Signature) -> Multivector:
    return Multivector(sig, {sig.dim - 1: 1.0})


def basis_blades(sig: Signature, grade: int | None = None) -> list[int]:
    masks = range(sig.dim)
    if grade is None:
        return list(masks)
    return [m for m in masks if grade_of(m) == grade]


def even_blades(sig: Signature) -> list[int]:
    return [m for m in range(sig.dim) if grade_of(m) % 2 == 0]


# -- dense batched kernels --------------------------------------------------

@lru_cache(maxsize=None)
def _dense_tables(p: int, q: int):
    n = p + q
    dim = 1 << n
    i = np.arange(dim)[:, None]
    k = np.arange(dim)[None, :]
    j = i ^ k  # right factor that sends row blade i to output blade k
    swaps = np.zeros((dim, dim), dtype=np.int64)
    for shift in range(1, n):
        swaps += np.bitwise_count((i >> shift) & j)
    negative = np.bitwise_count((i & j) >> p)
    sign = np.where((swaps + negative) & 1, -1.0, 1.0)
    masks = np.arange(dim)
    grades = np.bitwise_count(masks).astype(np.int64)
    rev = np.where((grades * (grades - 1) // 2) & 1, -1.0, 1.0)
    return np.ascontiguousarray(j), sign, grades, rev


class Algebra:
    """Dense batched arithmetic for one signature.

    Arrays carry the ``2**n`` blade coefficients on their last axis, indexed by
    blade mask; any leading axes broadcast.
    """

    def __init__(self, p: int, q: int = 0):
        self.sig = Signature(p, q)
        self.n = self.sig.n
        self.dim = self.sig.dim
        self._right, self._sign, self.grades, self._rev = _dense_tables(p, q)
        self.even_masks = np.flatnonzero(self.grades % 2 == 0)
        self.pseudoscalar_mask = self.dim - 1
        self._flat = None
        if self.dim <= FLAT_PRODUCT_MAX_DIM:
            # (i, j) pair -> output blade i ^ j, as one dense matmul
            flat = np.zeros((self.dim, self.dim, self.dim))
            i = np.arange(self.dim)[:, None]
            k = np.arange(self.dim)[None, :]
            flat[i, self._right, k] = self._sign
            self._flat = flat.reshape(self.dim * self.dim, self.dim)
        self._blades: dict[tuple[int, ...], np.ndarray] = {}

    def __repr__(self):
        return f"Algebra({self.sig.p}, {self.sig.q})"

    def __eq__(self, other):
        return isinstance(other, Algebra) and other.sig == self.sig

    def __hash__(self):
        return hash(self.sig)

    def gp(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (self.dim,)
        if self._flat is not None:
            pairs = a[..., :, None] * b[..., None, :]
            pairs = pairs.reshape(pairs.shape[:-2] + (self.dim * self.dim,))
            return pairs @ self._flat
        out = np.zeros(shape)
        for i in range(self.dim):
            ai = a[..., i]
            if not np.any(ai):
                continue
            out += ai[..., None] * (self._sign[i] * b[..., self._right[i]])
        return out

    def product(self, *factors) -> np.ndarray:
        out = factors[0]
        for f in factors[1:]:
            out = self.gp(out, f)
        return np.asarray(out, dtype=float)

    def reverse(self, a) -> np.ndarray:
        return np.asarray(a, dtype=float) * self._rev

    def grade(self, a, r: int) -> np.ndarray:
        return np.where(self.grades == r, np.asarray(a, dtype=float), 0.0)

    def scalar(self, a) -> np.ndarray:
        return np.asarray(a)[..., 0]

    def commutator(self, a, b) -> np.ndarray:
        return self.gp(a, b) - self.gp(b, a)

    def blade(self, *indices: int) -> np.ndarray:
        """Product of basis vectors in the given order (a fresh array)."""
        cached = self._blades.get(indices)
        if cached is None:
            mask, sign = 0, 1
            for i in indices:
                if not 0 <= i < self.n:
                    raise IndexError(i)
                mask, s = _blade_product(mask, 1 << i, self.sig.p, self.n)
                sign *= s
            cached = np.zeros(self.dim)
            cached[mask] = sign
            self._blades[indices] = cached
        return cached.copy()

    def vector(self, components) -> np.ndarray:
        comps = np.asarray(components, dtype=float)
        out = np.zeros(comps.shape[:-1] + (self.dim,))
        for i in range(self.n):
            out[..., 1 << i] = comps[..., i]
        return out

    def vector_components(self, a) -> np.ndarray:
        a = np.asarray(a)
        return np.stack([a[..., 1 << i] for i in range(self.n)], axis=-1)

    def scalar_mv(self, value=1.0) -> np.ndarray:
        out = np.zeros(self.dim)
        out[0] = value
        return out

    def to_mv(self, a) -> Multivector:
        return Multivector.from_array(self.sig, a)

    def from_mv(self, A: Multivector) -> np.ndarray:
        if A.sig != self.sig:
            raise SignatureMismatch(f"{A.sig} vs {self.sig}")
        return A.to_array()

    def norm(self, a) -> np.ndarray:
        return np.sqrt(np.sum(np.asarray(a) ** 2, axis=-1))


@lru_cache(maxsize=None)
def algebra(p: int, q: int = 0) -> Algebra:
    return Algebra(p, q)


STA_SIGNATURE = Signature(1, 3)
SPACE_SIGNATURE = Signature(3, 0)
PLANE_SIGNATURE = Signature(2, 0)
