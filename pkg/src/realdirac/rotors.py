"""Exponentials, rotors, spinor inverses and the polar form of spacetime spinors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clifford import (
    Algebra,
    STA_SIGNATURE,
    Multivector,
    algebra,
    is_even,
    pseudoscalar,
    reverse,
)

EPS_INV = 1e-10
SERIES_TOL = 1e-15
MAX_TERMS = 60
MAX_SQUARINGS = 60


class NonInvertible(ArithmeticError):
    """Raised when a spinor's magnitude is below the invertibility threshold."""


class NotARotor(ValueError):
    pass


def exp_array(alg: Algebra, a) -> np.ndarray:
    """Batched exponential by Taylor series with scaling and squaring.

    The argument is scaled by ``2**-s`` so its coefficient norm is at most 1/2,
    the series is summed until a term drops below ``SERIES_TOL`` times the
    partial sum, and the result is squared back ``s`` times.
    """
    a = np.asarray(a, dtype=float)
    norms = alg.norm(a)
    if not np.all(np.isfinite(norms)):
        raise OverflowError("non-finite exponent")
    peak = float(np.max(norms)) if norms.size else 0.0
    s = 0
    if peak > 0.5:
        s = int(math.ceil(math.log2(peak / 0.5)))
    if s > MAX_SQUARINGS:
        raise OverflowError(f"exponent norm {peak:g} too large")
    x = a / (2.0 ** s)
    result = np.zeros_like(x)
    result[..., 0] = 1.0
    term = result.copy()
    for k in range(1, MAX_TERMS + 1):
        term = alg.gp(term, x) / k
        result = result + term
        if np.all(alg.norm(term) <= SERIES_TOL * alg.norm(result)):
            break
    else:
        raise ArithmeticError("exponential series did not converge")
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            result = alg.gp(result, result)
    if not np.all(np.isfinite(result)):
        raise OverflowError("exponential overflowed")
    return result


def exp(A: Multivector) -> Multivector:
    alg = algebra(A.sig.p, A.sig.q)
    return Multivector.from_array(A.sig, exp_array(alg, A.to_array()))


def rotate_vector(v: Multivector, B: Multivector) -> Multivector:
    """``exp(-B/2) v exp(B/2)``, projected onto grade 1 to drop round-off."""
    if v.grades() - {1}:
        raise ValueError("v must be a vector")
    if B.grades() - {2}:
        raise ValueError("B must be a bivector")
    return (exp(-0.5 * B) * v * exp(0.5 * B)).grade(1)


def rotate_plane(v: Multivector, phi: float) -> Multivector:
    """One-sided planar rotation ``v exp(phi e1e2)``; only meaningful in Cl(2)."""
    if v.sig.n != 2:
        raise ValueError("one-sided planar rotation needs a two-dimensional algebra")
    return v * exp(Multivector(v.sig, {3: phi}))


def check_rotor(U: Multivector, atol: float = 1e-12) -> None:
    if not is_even(U, atol):
        raise NotARotor("rotor must be even")
    if not (U * reverse(U)).allclose(Multivector.scalar(U.sig), atol):
        raise NotARotor("U * reverse(U) != 1")


def lorentz_transform(X: Multivector, U: Multivector, check: bool = True) -> Multivector:
    """Two-sided action ``U X reverse(U)``."""
    if check:
        check_rotor(U)
    return U * X * reverse(U)


def _require_spacetime_even(psi: Multivector):
    if not psi.sig.is_spacetime:
        raise ValueError("expected a spinor of Cl(1,3)")
    if not is_even(psi):
        raise ValueError("spinor has odd-grade components")


def _scalar_pseudo(psi: Multivector) -> tuple[float, float]:
    """``psi reverse(psi) = alpha + beta I``; returns ``(alpha, beta)``."""
    q = psi * reverse(psi)
    return q[0], q[q.sig.dim - 1]


def even_inverse(psi: Multivector, eps: float = EPS_INV) -> Multivector:
    """Inverse of an even spacetime spinor via ``reverse(psi) (psi reverse(psi))^-1``.

    ``psi reverse(psi)`` lies in ``span{1, I}`` and ``I**2 == -1``, so it is
    inverted like a complex number.
    """
    _require_spacetime_even(psi)
    alpha, beta = _scalar_pseudo(psi)
    rho2 = alpha * alpha + beta * beta
    if rho2 <= eps * eps:
        raise NonInvertible(f"spinor magnitude {math.sqrt(rho2):.3g} below {eps:g}")
    I = pseudoscalar(psi.sig)
    q_inv = (alpha - beta * I) / rho2
    return reverse(psi) * q_inv


@dataclass(frozen=True)
class PolarForm:
    rho: float
    beta: float
    rotor: Multivector

    def reconstruct(self) -> Multivector:
        I = pseudoscalar(self.rotor.sig)
        return math.sqrt(self.rho) * exp(0.5 * self.beta * I) * self.rotor


def polar_decompose(psi: Multivector, eps: float = EPS_INV) -> PolarForm:
    """Write ``psi = sqrt(rho) exp(I beta / 2) R`` with ``R reverse(R) = 1``.

    ``beta`` is returned in ``(-pi, pi]``.
    """
    _require_spacetime_even(psi)
    alpha, b = _scalar_pseudo(psi)
    rho = math.hypot(alpha, b)
    if rho <= eps:
        raise NonInvertible(f"spinor magnitude {rho:.3g} below {eps:g}")
    beta = math.atan2(b, alpha)
    if beta <= -math.pi:
        beta = math.pi
    I = pseudoscalar(psi.sig)
    R = exp(-0.5 * beta * I) * psi / math.sqrt(rho)
    return PolarForm(rho, beta, R)


def idempotent_split(psi: Multivector, f: Multivector, atol: float = 1e-12):
    """Right projections ``(psi f, psi (1 - f))`` for an even idempotent ``f``."""
    if not is_even(f):
        raise ValueError("projector must be even")
    if not (f * f).allclose(f, atol):
        raise ValueError("f is not idempotent")
    return psi * f, psi * (1.0 - f)


def spacetime_projector(sign: int = 1) -> Multivector:
    """``(1 +- gamma_3 gamma_0) / 2``."""
    g30 = Multivector.blade(STA_SIGNATURE, 3, 0)
    return (1.0 + sign * g30) / 2.0


def bivector_magnitude_sq(B: Multivector) -> float:
    """``-<B B>`` -- the squared area for a simple Euclidean bivector."""
    return -(B * B)[0]

