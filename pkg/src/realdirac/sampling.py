"""Seeded random draws used by the verification suites and tests.

Every helper takes a :class:`numpy.random.Generator`; callers create it with
``numpy.random.default_rng(seed)`` (PCG64). Multivector coefficients are
independent standard normals, one per blade.
"""

from __future__ import annotations

import numpy as np

from .clifford import Multivector, Signature, basis_blades, even_blades
from .fields import (
    BIVECTOR_MASKS,
    SPINOR_MASKS,
    STA,
    ClosedFormField,
    Cosine,
    GaugeField,
    Polynomial,
    ScalarFunction,
)
from .rotors import exp


def random_multivector(rng: np.random.Generator, sig: Signature) -> Multivector:
    return Multivector(sig, {m: rng.standard_normal() for m in basis_blades(sig)})


def random_even(rng: np.random.Generator, sig: Signature) -> Multivector:
    """Random spinor: even blades only."""
    return Multivector(sig, {m: rng.standard_normal() for m in even_blades(sig)})


def random_vector(rng: np.random.Generator, sig: Signature) -> Multivector:
    return Multivector.vector(sig, rng.standard_normal(sig.n))


def random_bivector(rng: np.random.Generator, sig: Signature, scale: float = 1.0) -> Multivector:
    return Multivector(sig, {m: scale * rng.standard_normal() for m in basis_blades(sig, 2)})


def random_rotor(rng: np.random.Generator, sig: Signature, scale: float = 0.5) -> Multivector:
    """``exp`` of a random bivector; small scale keeps boosts moderate."""
    return exp(random_bivector(rng, sig, scale))


def _shape(size) -> tuple:
    return (size,) if isinstance(size, int) else tuple(size)


def random_spinor_array(rng: np.random.Generator, size=()) -> np.ndarray:
    out = np.zeros(_shape(size) + (STA.dim,))
    out[..., list(SPINOR_MASKS)] = rng.standard_normal(out.shape[:-1] + (len(SPINOR_MASKS),))
    return out


def random_bivector_array(rng: np.random.Generator, size=(), scale: float = 1.0) -> np.ndarray:
    out = np.zeros(_shape(size) + (STA.dim,))
    out[..., list(BIVECTOR_MASKS)] = scale * rng.standard_normal(out.shape[:-1] + (len(BIVECTOR_MASKS),))
    return out


# -- smooth closed-form fields ---------------------------------------------

def random_polynomial(rng: np.random.Generator, degree: int = 2, scale: float = 1.0) -> Polynomial:
    """Polynomial of degree at most 2 with normal coefficients."""
    if degree not in (0, 1, 2):
        raise ValueError("degree must be 0, 1 or 2")
    c0 = scale * rng.standard_normal()
    c1 = scale * rng.standard_normal(4) if degree >= 1 else np.zeros(4)
    c2 = scale * rng.standard_normal((4, 4)) if degree >= 2 else np.zeros((4, 4))
    return Polynomial(c0, c1, c2)


def random_smooth(rng: np.random.Generator, scale: float = 1.0) -> ScalarFunction:
    """Quadratic plus one cosine mode; exercises every derivative order."""
    wave = Cosine(scale * rng.standard_normal(), rng.uniform(-1.5, 1.5, 4), rng.uniform(0, 2 * np.pi))
    return random_polynomial(rng, 2, 0.5 * scale) + wave


def _field_on(rng, masks, make) -> ClosedFormField:
    terms = []
    for m in masks:
        E = np.zeros(STA.dim)
        E[m] = 1.0
        terms.append((make(rng), E))
    return ClosedFormField.combination(STA, terms)


def random_spinor_field(rng: np.random.Generator, polynomial_only: bool = False) -> ClosedFormField:
    make = (lambda r: random_polynomial(r, 2)) if polynomial_only else random_smooth
    return _field_on(rng, SPINOR_MASKS, make)


def random_gauge_field(rng: np.random.Generator, scale: float = 0.5,
                       polynomial_only: bool = False) -> GaugeField:
    if polynomial_only:
        def make(r):
            return random_polynomial(r, 2, scale)
    else:
        def make(r):
            return random_smooth(r, scale)
    return GaugeField([_field_on(rng, BIVECTOR_MASKS, make) for _ in range(4)])


def random_em_potential(rng: np.random.Generator, scale: float = 0.5) -> list[ScalarFunction]:
    return [random_smooth(rng, scale) for _ in range(4)]


def random_rotor_field(rng: np.random.Generator, factors: int = 2, scale: float = 0.4) -> ClosedFormField:
    """Product of ``exp(f_i(x) B_i)`` factors with random smooth ``f_i`` and constant bivectors ``B_i``."""
    U = ClosedFormField.constant(STA, STA.scalar_mv())
    for _ in range(factors):
        B = random_bivector_array(rng, scale=scale)
        U = U * ClosedFormField.exp_scaled(STA, random_smooth(rng, 0.5), B)
    return U


def random_points(rng: np.random.Generator, n: int, half_width: float = 1.0) -> np.ndarray:
    return rng.uniform(-half_width, half_width, size=(n, 4))
