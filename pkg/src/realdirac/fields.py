"""Multivector-valued fields on spacetime.

Two backends share one duck-typed surface (``value``, ``grad``, ``hess``):

* :class:`ClosedFormField` carries exact value, gradient and Hessian
  evaluators and is evaluated at explicit points ``x`` of shape ``(..., 4)``
  with ``x = (t, x, y, z)``.
* :class:`LatticeField` stores samples on a periodic 4D grid and takes
  derivatives with fourth-order central differences.

Array conventions: values ``(..., D)``, gradients ``(..., 4, D)`` with the
derivative index first, Hessians ``(..., 4, 4, D)``. ``D`` is the blade count
of the algebra (16 for spacetime).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .clifford import Algebra, algebra
from .rotors import exp_array

STA = algebra(1, 3)
ETA = np.diag([1.0, -1.0, -1.0, -1.0])


class DomainMismatch(ValueError):
    pass


class StencilTooSmall(ValueError):
    pass


class DerivativeUnavailable(NotImplementedError):
    pass


# -- scalar functions ---------------------------------------------------------

class ScalarFunction:
    """Real function on spacetime with exact first and second derivatives."""

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def hess(self, x):
        raise NotImplementedError

    def __add__(self, other):
        return ScalarSum((self, other))

    def __mul__(self, c):
        return Scaled(self, float(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class Polynomial(ScalarFunction):
    """``c0 + c1 . x + x^T c2 x`` with symmetric ``c2``."""

    c0: float = 0.0
    c1: np.ndarray = field(default_factory=lambda: np.zeros(4))
    c2: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))

    def __post_init__(self):
        c1 = np.asarray(self.c1, dtype=float)
        c2 = np.asarray(self.c2, dtype=float)
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", 0.5 * (c2 + c2.T))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.c0 + x @ self.c1 + np.einsum("...i,ij,...j->...", x, self.c2, x)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return self.c1 + 2.0 * x @ self.c2

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(2.0 * self.c2, x.shape[:-1] + (4, 4)).copy()


def linear(c1, c0: float = 0.0) -> Polynomial:
    return Polynomial(c0, np.asarray(c1, dtype=float))


def constant(c: float) -> Polynomial:
    return Polynomial(float(c))


@dataclass(frozen=True)
class Cosine(ScalarFunction):
    """``amp * cos(k . x + phase)``; ``k . x`` is the plain sum ``k_mu x^mu``."""

    amp: float
    k: np.ndarray
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k", np.asarray(self.k, dtype=float))

    def _arg(self, x):
        return np.asarray(x, dtype=float) @ self.k + self.phase

    def value(self, x):
        return self.amp * np.cos(self._arg(x))

    def grad(self, x):
        return (-self.amp * np.sin(self._arg(x)))[..., None] * self.k

    def hess(self, x):
        return (-self.amp * np.cos(self._arg(x)))[..., None, None] * np.outer(self.k, self.k)


def sine(amp: float, k, phase: float = 0.0) -> Cosine:
    return Cosine(amp, k, phase - np.pi / 2)


@dataclass(frozen=True)
class ScalarSum(ScalarFunction):
    terms: tuple

    def value(self, x):
        return sum(t.value(x) for t in self.terms)

    def grad(self, x):
        return sum(t.grad(x) for t in self.terms)

    def hess(self, x):
        return sum(t.hess(x) for t in self.terms)


@dataclass(frozen=True)
class Scaled(ScalarFunction):
    inner: ScalarFunction
    c: float

    def value(self, x):
        return self.c * self.inner.value(x)

    def grad(self, x):
        return self.c * self.inner.grad(x)

    def hess(self, x):
        return self.c * self.inner.hess(x)


# -- closed-form multivector fields ------------------------------------------

def _gp_grad(alg: Algebra, F, dF, G, dG):
    return alg.gp(dF, G[..., None, :]) + alg.gp(F[..., None, :], dG)


class ClosedFormField:
    """Multivector field with exact derivative evaluators.

    Built from constants, scalar-function combinations and exponentials, and
    closed under addition and the geometric product (derivatives follow the
    Leibniz rule). Instances are immutable.
    """

    def __init__(self, alg: Algebra, value: Callable, grad: Callable, hess: Callable | None = None):
        self.alg = alg
        self._value = self._memo(value)
        self._grad = self._memo(grad)
        self._hess = None if hess is None else self._memo(hess)

    @staticmethod
    def _memo(fn: Callable) -> Callable:
        # Product trees evaluate shared subfields many times at the same
        # points; keep the last result and hand out copies.
        last = [None, None]

        def wrapped(x):
            key = (x.shape, x.tobytes())
            if last[0] != key:
                last[1] = fn(x)
                last[0] = key
            return last[1].copy()

        return wrapped

    def value(self, x) -> np.ndarray:
        return self._value(np.asarray(x, dtype=float))

    def grad(self, x) -> np.ndarray:
        return self._grad(np.asarray(x, dtype=float))

    def hess(self, x) -> np.ndarray:
        if self._hess is None:
            raise DerivativeUnavailable("second derivatives not available for this field")
        return self._hess(np.asarray(x, dtype=float))

    @property
    def has_hess(self) -> bool:
        return self._hess is not None

    # constructors
    @classmethod
    def constant(cls, alg: Algebra, mv) -> "ClosedFormField":
        mv = np.asarray(mv, dtype=float)
        if mv.shape != (alg.dim,):
            raise ValueError(f"expected shape ({alg.dim},)")
        return cls(
            alg,
            lambda x: np.broadcast_to(mv, x.shape[:-1] + (alg.dim,)).copy(),
            lambda x: np.zeros(x.shape[:-1] + (4, alg.dim)),
            lambda x: np.zeros(x.shape[:-1] + (4, 4, alg.dim)),
        )

    @classmethod
    def zero(cls, alg: Algebra = STA) -> "ClosedFormField":
        return cls.constant(alg, np.zeros(alg.dim))

    @classmethod
    def combination(cls, alg: Algebra, terms: Sequence[tuple[ScalarFunction, np.ndarray]]):
        """``sum_i f_i(x) E_i`` for scalar functions ``f_i`` and constant multivectors ``E_i``."""
        fs = [f for f, _ in terms]
        Es = np.array([np.asarray(E, dtype=float) for _, E in terms]).reshape(len(terms), alg.dim)

        def value(x):
            out = np.zeros(x.shape[:-1] + (alg.dim,))
            for f, E in zip(fs, Es):
                out += f.value(x)[..., None] * E
            return out

        def grad(x):
            out = np.zeros(x.shape[:-1] + (4, alg.dim))
            for f, E in zip(fs, Es):
                out += f.grad(x)[..., None] * E
            return out

        def hess(x):
            out = np.zeros(x.shape[:-1] + (4, 4, alg.dim))
            for f, E in zip(fs, Es):
                out += f.hess(x)[..., None] * E
            return out

        return cls(alg, value, grad, hess)

    @classmethod
    def exp_scaled(cls, alg: Algebra, f: ScalarFunction, B) -> "ClosedFormField":
        """``exp(f(x) B)`` for a constant multivector ``B``."""
        B = np.asarray(B, dtype=float)
        BB = alg.gp(B, B)

        def value(x):
            return exp_array(alg, f.value(x)[..., None] * B)

        def grad(x):
            E = value(x)
            return f.grad(x)[..., None] * alg.gp(B, E)[..., None, :]

        def hess(x):
            E = value(x)
            df = f.grad(x)
            term1 = f.hess(x)[..., None] * alg.gp(B, E)[..., None, None, :]
            term2 = (df[..., :, None] * df[..., None, :])[..., None] * alg.gp(BB, E)[..., None, None, :]
            return term1 + term2

        return cls(alg, value, grad, hess)

    # algebra
    def _lift(self, other) -> "ClosedFormField":
        if isinstance(other, ClosedFormField):
            if other.alg != self.alg:
                raise DomainMismatch("fields belong to different algebras")
            return other
        arr = np.asarray(other, dtype=float)
        if arr.ndim == 0:
            arr = self.alg.scalar_mv(float(arr))
        return ClosedFormField.constant(self.alg, arr)

    def __add__(self, other):
        o = self._lift(other)
        hess = None
        if self.has_hess and o.has_hess:
            hess = lambda x: self._hess(x) + o._hess(x)
        return ClosedFormField(self.alg, lambda x: self._value(x) + o._value(x),
                               lambda x: self._grad(x) + o._grad(x), hess)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            c = float(other)
            hess = (lambda x: c * self._hess(x)) if self.has_hess else None
            return ClosedFormField(self.alg, lambda x: c * self._value(x),
                                   lambda x: c * self._grad(x), hess)
        o = self._lift(other)
        return _product(self, o)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return _product(self._lift(other), self)

    def reverse(self) -> "ClosedFormField":
        alg = self.alg
        hess = (lambda x: alg.reverse(self._hess(x))) if self.has_hess else None
        return ClosedFormField(alg, lambda x: alg.reverse(self._value(x)),
                               lambda x: alg.reverse(self._grad(x)), hess)

    def partial(self, mu: int) -> "ClosedFormField":
        """Field ``d_mu F``; its own Hessian is not available."""
        if not self.has_hess:
            raise DerivativeUnavailable("need second derivatives to differentiate a derivative field")
        return ClosedFormField(self.alg, lambda x: self._grad(x)[..., mu, :],
                               lambda x: self._hess(x)[..., :, mu, :], None)

    def check_derivatives(self, points, h: float = 1e-5, rtol: float = 1e-6) -> float:
        """Largest relative mismatch between ``grad`` and central differences at ``points``."""
        points = np.asarray(points, dtype=float)
        g = self.grad(points)
        worst = 0.0
        for mu in range(4):
            e = np.zeros(4)
            e[mu] = h
            fd = (self.value(points + e) - self.value(points - e)) / (2 * h)
            scale = max(1.0, float(np.max(np.abs(g[..., mu, :]))))
            worst = max(worst, float(np.max(np.abs(fd - g[..., mu, :]))) / scale)
        if worst > rtol:
            raise ValueError(f"derivative evaluator disagrees with finite differences ({worst:.3g})")
        return worst


def _product(F: ClosedFormField, G: ClosedFormField) -> ClosedFormField:
    alg = F.alg

    def value(x):
        return alg.gp(F._value(x), G._value(x))

    def grad(x):
        return _gp_grad(alg, F._value(x), F._grad(x), G._value(x), G._grad(x))

    hess = None
    if F.has_hess and G.has_hess:
        def hess(x):
            Fv, Fg, Fh = F._value(x), F._grad(x), F._hess(x)
            Gv, Gg, Gh = G._value(x), G._grad(x), G._hess(x)
            cross = alg.gp(Fg[..., :, None, :], Gg[..., None, :, :])
            return (alg.gp(Fh, Gv[..., None, None, :]) + cross + np.swapaxes(cross, -2, -3)
                    + alg.gp(Fv[..., None, None, :], Gh))

    return ClosedFormField(alg, value, grad, hess)


# -- lattice fields -----------------------------------------------------------

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_OFFSETS = (-2, -1, 0, 1, 2)


def periodic_derivative(values: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    """Fourth-order central difference along a periodic axis."""
    n = values.shape[axis]
    if n == 1:
        return np.zeros_like(values)
    if n < 5:
        raise StencilTooSmall(f"axis {axis} has {n} points; the 5-point stencil needs at least 5")
    out = np.zeros_like(values)
    for c, off in zip(_D1, _OFFSETS):
        if c:
            # roll by -off brings sample j+off to position j
            out += c * np.roll(values, -off, axis=axis)
    return out / spacing


class LatticeField:
    """Samples on a periodic 4D grid ``(Nt, Nx, Ny, Nz)``.

    An axis of extent 1 is a homogeneous direction: derivatives along it
    vanish. Extents 2..4 are rejected because the stencil does not fit.
    """

    def __init__(self, alg: Algebra, values, spacing, origin=(0.0, 0.0, 0.0, 0.0)):
        values = np.asarray(values, dtype=float)
        if values.ndim != 5 or values.shape[-1] != alg.dim:
            raise ValueError(f"expected values of shape (Nt, Nx, Ny, Nz, {alg.dim})")
        for axis, n in enumerate(values.shape[:4]):
            if 1 < n < 5:
                raise StencilTooSmall(f"axis {axis} has {n} points; need 1 or at least 5")
        self.alg = alg
        self.values = values
        self.spacing = np.asarray(spacing, dtype=float)
        self.origin = np.asarray(origin, dtype=float)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[:4]

    @property
    def extents(self) -> np.ndarray:
        return self.spacing * np.array(self.shape)

    def points(self) -> np.ndarray:
        axes = [self.origin[i] + self.spacing[i] * np.arange(n) for i, n in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @classmethod
    def sample(cls, f: ClosedFormField, shape, spacing, origin=(0.0, 0.0, 0.0, 0.0)) -> "LatticeField":
        proto = cls(f.alg, np.zeros(tuple(shape) + (f.alg.dim,)), spacing, origin)
        return cls(f.alg, f.value(proto.points()), spacing, origin)

    def same_domain(self, other: "LatticeField") -> bool:
        return (self.shape == other.shape and np.allclose(self.spacing, other.spacing)
                and np.allclose(self.origin, other.origin))

    def _check_x(self, x):
        if x is not None:
            raise DomainMismatch("lattice fields are evaluated on their own grid; pass x=None")

    def value(self, x=None) -> np.ndarray:
        self._check_x(x)
        return self.values

    def grad(self, x=None) -> np.ndarray:
        self._check_x(x)
        return np.stack([periodic_derivative(self.values, mu, self.spacing[mu]) for mu in range(4)], axis=-2)

    def hess(self, x=None) -> np.ndarray:
        g = self.grad()
        rows = []
        for mu in range(4):
            rows.append(np.stack([periodic_derivative(g[..., nu, :], mu, self.spacing[mu])
                                  for nu in range(4)], axis=-2))
        return np.stack(rows, axis=-3)


# -- gauge fields and frames -------------------------------------------------

class GaugeField:
    """Four bivector-valued fields, one per spacetime index mu."""

    def __init__(self, components: Sequence):
        components = tuple(components)
        if len(components) != 4:
            raise ValueError("a gauge field has exactly four components")
        self.components = components
        self.alg = components[0].alg

    def __getitem__(self, mu):
        return self.components[mu]

    @classmethod
    def zero(cls, alg: Algebra = STA) -> "GaugeField":
        return cls([ClosedFormField.zero(alg)] * 4)

    @classmethod
    def constant(cls, bivectors, alg: Algebra = STA) -> "GaugeField":
        return cls([ClosedFormField.constant(alg, b) for b in bivectors])

    @property
    def is_lattice(self) -> bool:
        return isinstance(self.components[0], LatticeField)

    def value(self, x=None) -> np.ndarray:
        """``(..., 4, D)``: component mu on axis -2."""
        return np.stack([c.value(x) for c in self.components], axis=-2)

    def grad(self, x=None) -> np.ndarray:
        """``(..., 4, 4, D)`` indexed ``[..., nu, mu, :] = d_nu A_mu``."""
        return np.stack([c.grad(x) for c in self.components], axis=-2)

    def hess(self, x=None) -> np.ndarray:
        """``(..., 4, 4, 4, D)`` indexed ``[..., l, n, mu, :] = d_l d_n A_mu``."""
        return np.stack([c.hess(x) for c in self.components], axis=-2)

    def grade_impurity(self, x=None) -> float:
        v = self.value(x)
        return float(np.max(np.abs(np.where(self.alg.grades == 2, 0.0, v)), initial=0.0))


BIVECTOR_MASKS = (3, 5, 6, 9, 10, 12)
SPINOR_MASKS = (0, 3, 5, 6, 9, 10, 12, 15)


@lru_cache(maxsize=None)
def _component_table(alg: Algebra):
    # <B gamma^a gamma^b> = sign * B[mask] with gamma^a gamma^b = s e_mask
    masks = np.zeros((4, 4), dtype=int)
    signs = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            gab = ETA[a, a] * ETA[b, b] * alg.blade(a, b)
            mask = int(np.flatnonzero(gab)[0])
            e = np.zeros(alg.dim)
            e[mask] = 1.0
            masks[a, b] = mask
            signs[a, b] = gab[mask] * alg.gp(e, e)[0]
    return masks, signs


def bivector_components(alg: Algebra, B) -> np.ndarray:
    """``B^{ab} = <B gamma^a gamma^b>`` for a, b in 0..3 as a ``(..., 4, 4)`` array.

    Reconstruction: ``B = 1/2 B^{ab} gamma_b gamma_a``.
    """
    B = np.asarray(B, dtype=float)
    masks, signs = _component_table(alg)
    return B[..., masks] * signs


def bivector_from_components(alg: Algebra, comps) -> np.ndarray:
    comps = np.asarray(comps, dtype=float)
    out = np.zeros(comps.shape[:-2] + (alg.dim,))
    for a in range(4):
        for b in range(4):
            if a != b:
                out += 0.5 * comps[..., a, b, None] * alg.blade(b, a)
    return out


class Tetrad:
    """Frame components ``e_a^mu(x)`` as a ``(..., 4, 4)`` array indexed ``[a, mu]``."""

    def __init__(self, fn: Callable):
        self._fn = fn

    def at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self._fn(x), x.shape[:-1] + (4, 4))

    @classmethod
    def identity(cls) -> "Tetrad":
        return cls(lambda x: np.eye(4))

    @classmethod
    def constant(cls, e) -> "Tetrad":
        e = np.asarray(e, dtype=float)
        return cls(lambda x: e)

    def inverse_metric(self, x) -> np.ndarray:
        """``g^{mu nu} = e_a^mu eta^{ab} e_b^nu``."""
        e = self.at(x)
        return np.einsum("...am,ab,...bn->...mn", e, ETA, e)

    def metric(self, x) -> np.ndarray:
        return np.linalg.inv(self.inverse_metric(x))

    def orthonormality_error(self, x) -> float:
        e = self.at(x)
        g = self.metric(x)
        eta = np.einsum("...mn,...am,...bn->...ab", g, e, e)
        return float(np.max(np.abs(eta - ETA)))


def constant_frame(alg: Algebra = STA) -> list[ClosedFormField]:
    return [ClosedFormField.constant(alg, alg.blade(a)) for a in range(4)]
