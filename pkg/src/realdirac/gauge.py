"""Gauge-covariant real Dirac operator with a left connection and a right connection.

``omega`` acts on the left of the spinor, ``A`` (the generalised potential) on
the right:

    D_mu Psi = d_mu Psi - omega_mu Psi + Psi A_mu

Both connections are :class:`~realdirac.fields.GaugeField` instances of
spacetime bivectors. Spinor fields may be closed-form or lattice; all
functions here return raw coefficient arrays evaluated at ``x`` (closed form)
or over the whole grid (lattice, ``x=None``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bridge
from .fields import (
    ETA,
    STA,
    ClosedFormField,
    DomainMismatch,
    GaugeField,
    LatticeField,
    ScalarFunction,
    Tetrad,
    bivector_components,
)
from .rotors import EPS_INV, NonInvertible, NotARotor

G = [STA.blade(a) for a in range(4)]
G_UP = [ETA[a, a] * G[a] for a in range(4)]
G0 = G[0]
G21 = STA.blade(2, 1)
G0_G21 = STA.gp(G0, G21)
PSEUDO = STA.pseudoscalar_mask

DEFAULT_CHARGE = 1.0
CONSISTENCY_TOL = 1e-8


class InconsistentField(ValueError):
    """The spinor field does not solve the coupled equation for any potential."""


def _points(psi, x):
    if isinstance(psi, LatticeField):
        if x is not None:
            raise DomainMismatch("lattice spinor fields are evaluated on their grid (x=None)")
        return psi.points()
    if x is None:
        raise ValueError("closed-form fields need evaluation points x")
    return np.asarray(x, dtype=float)


def _gauge_at(Gf: GaugeField | None, psi, pts, which: str = "value"):
    """Evaluate a gauge field where ``psi`` lives; lattice gauge fields must share its grid."""
    if Gf is None:
        Gf = GaugeField.zero()
    comps = []
    for c in Gf.components:
        if isinstance(c, LatticeField):
            if not isinstance(psi, LatticeField) or not c.same_domain(psi):
                raise DomainMismatch("lattice gauge field and spinor field must share one grid")
            comps.append(getattr(c, which)())
        else:
            comps.append(getattr(c, which)(pts))
    return np.stack(comps, axis=-2)


def _psi_jet(psi, x, order: int = 1):
    if isinstance(psi, LatticeField):
        out = [psi.value(), psi.grad()]
        if order > 1:
            out.append(psi.hess())
        return out
    out = [psi.value(x), psi.grad(x)]
    if order > 1:
        out.append(psi.hess(x))
    return out


def covariant_derivative(psi, omega: GaugeField | None, A: GaugeField | None, mu: int, x=None) -> np.ndarray:
    """``D_mu Psi = d_mu Psi - omega_mu Psi + Psi A_mu``."""
    pts = _points(psi, x)
    value, grad = _psi_jet(psi, None if isinstance(psi, LatticeField) else pts)
    w = _gauge_at(omega, psi, pts)[..., mu, :]
    a = _gauge_at(A, psi, pts)[..., mu, :]
    return grad[..., mu, :] - STA.gp(w, value) + STA.gp(value, a)


def covariant_derivatives(psi, omega, A, x=None) -> np.ndarray:
    """All four ``D_mu Psi`` stacked on axis -2."""
    pts = _points(psi, x)
    value, grad = _psi_jet(psi, None if isinstance(psi, LatticeField) else pts)
    w = _gauge_at(omega, psi, pts)
    a = _gauge_at(A, psi, pts)
    v = value[..., None, :]
    return grad - STA.gp(w, v) + STA.gp(v, a)


def covariant_derivative_field(psi: ClosedFormField, omega: GaugeField | None,
                               A: GaugeField | None, mu: int) -> ClosedFormField:
    """``D_mu Psi`` as a closed-form field, so it can be differentiated again."""
    omega = omega or GaugeField.zero()
    A = A or GaugeField.zero()
    return psi.partial(mu) - omega[mu] * psi + psi * A[mu]


def _frame_at(frame, pts):
    if frame is None:
        return np.broadcast_to(np.array(G), pts.shape[:-1] + (4, STA.dim))
    return np.stack([f.value(pts) for f in frame], axis=-2)


def hestenes_residual(psi, omega: GaugeField | None, A: GaugeField | None, mass: float,
                      x=None, tetrad: Tetrad | None = None, frame=None) -> np.ndarray:
    """Pointwise ``gamma^a e_a^mu (D_mu Psi) gamma_0 gamma_2 gamma_1 - m Psi``.

    ``frame`` optionally replaces the constant vectors ``gamma_a`` by vector
    fields (for instance after a local Lorentz transformation); the trailing
    ``gamma_0 gamma_2 gamma_1`` is then built from the same frame.
    """
    pts = _points(psi, x)
    D = covariant_derivatives(psi, omega, A, x)
    value = psi.value(x) if not isinstance(psi, LatticeField) else psi.value()
    g = _frame_at(frame, pts)
    g_up = g * np.diag(ETA)[:, None]
    e = (tetrad or Tetrad.identity()).at(pts)
    # sum_a gamma^a e_a^mu D_mu
    slashed = np.zeros(pts.shape[:-1] + (STA.dim,))
    for a in range(4):
        Da = np.einsum("...m,...mk->...k", e[..., a, :], D)
        slashed += STA.gp(g_up[..., a, :], Da)
    tail = STA.product(g[..., 0, :], g[..., 2, :], g[..., 1, :])
    return STA.gp(slashed, tail) - mass * value


def matrix_residual(psi, omega: GaugeField | None, A: GaugeField | None, mass: float,
                    x=None, tetrad: Tetrad | None = None) -> np.ndarray:
    """Column-side ``i gamma^a e_a^mu |D_mu Psi> - m |Psi>``.

    The covariant derivative is assembled from the gamma-matrix table and the
    right-bivector rules, not from the real product:

        |D_mu Psi> = d_mu|Psi> + 1/2 w^{ab} g_a g_b |Psi> - 1/2 A^{ab} |Psi gamma_a gamma_b>
    """
    pts = _points(psi, x)
    value, grad = _psi_jet(psi, None if isinstance(psi, LatticeField) else pts)
    z = bridge.dirac_to_complex_array(value)
    dz = bridge.dirac_to_complex_array(grad)
    wc = bivector_components(STA, _gauge_at(omega, psi, pts))
    ac = bivector_components(STA, _gauge_at(A, psi, pts))
    gm = bridge.GAMMA_TABLE
    Dz = dz.copy()
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            left = (gm[a] @ gm[b] @ z[..., None])[..., 0]
            right = bridge.right_bivector_action(a, b, z)
            Dz += 0.5 * wc[..., :, a, b, None] * left[..., None, :]
            Dz -= 0.5 * ac[..., :, a, b, None] * right[..., None, :]
    e = (tetrad or Tetrad.identity()).at(pts)
    out = -mass * z
    for a in range(4):
        Da = np.einsum("...m,...mk->...k", e[..., a, :], Dz)
        out = out + 1j * ETA[a, a] * (gm[a] @ Da[..., None])[..., 0]
    return out


# -- local Lorentz transformations ------------------------------------------

@dataclass(frozen=True)
class GaugeTransformed:
    frame: list
    psi: ClosedFormField
    omega: GaugeField
    A: GaugeField


def _default_sample_points() -> np.ndarray:
    rng = np.random.default_rng(12345)
    return rng.uniform(-1.0, 1.0, size=(16, 4))


def check_rotor_field(U: ClosedFormField, points=None, atol: float = 1e-12) -> float:
    pts = _default_sample_points() if points is None else np.asarray(points, dtype=float)
    u = U.value(pts)
    odd = np.max(np.abs(np.where(STA.grades % 2 == 1, u, 0.0)))
    uu = STA.gp(u, STA.reverse(u))
    uu[..., 0] -= 1.0
    # relative to |U|^2 so that strong boosts are judged on round-off
    size = np.maximum(1.0, STA.norm(u) ** 2)
    err = max(float(odd), float(np.max(STA.norm(uu) / size)))
    if err > atol:
        raise NotARotor(f"U reverse(U) deviates from 1 by {err:.3g}")
    return err


def gauge_transform(U: ClosedFormField, psi: ClosedFormField, omega: GaugeField | None,
                    A: GaugeField | None, frame=None, check_points=None) -> GaugeTransformed:
    """Apply a local Lorentz rotor field ``U(x)``.

    gamma'_a = U gamma_a ~U, Psi' = U Psi ~U,
    omega'_mu = U omega_mu ~U + (d_mu U) ~U, and the same rule for A.
    """
    check_rotor_field(U, check_points)
    omega = omega or GaugeField.zero()
    A = A or GaugeField.zero()
    Ur = U.reverse()
    frame = frame or [ClosedFormField.constant(STA, g) for g in G]
    new_frame = [U * f * Ur for f in frame]
    new_psi = U * psi * Ur

    def tr(Gf: GaugeField) -> GaugeField:
        return GaugeField([U * Gf[mu] * Ur + U.partial(mu) * Ur for mu in range(4)])

    return GaugeTransformed(new_frame, new_psi, tr(omega), tr(A))


# -- field strengths ----------------------------------------------------------

def _strength_from(alg, value, grad):
    """F_{mu nu} from a (..., 4, D) value and (..., 4, 4, D) gradient."""
    shape = value.shape[:-2] + (4, 4, alg.dim)
    F = np.zeros(shape)
    for mu in range(4):
        for nu in range(mu + 1, 4):
            f = grad[..., mu, nu, :] - grad[..., nu, mu, :] - alg.commutator(value[..., mu, :], value[..., nu, :])
            F[..., mu, nu, :] = f
            F[..., nu, mu, :] = -f
    return F


class StrengthField:
    """``F_{mu nu} = d_mu A_nu - d_nu A_mu - [A_mu, A_nu]`` for a gauge field."""

    def __init__(self, gauge: GaugeField):
        self.gauge = gauge

    def value(self, x=None) -> np.ndarray:
        """``(..., 4, 4, D)``; antisymmetric in the two index axes."""
        return _strength_from(STA, self.gauge.value(x), self.gauge.grad(x))

    def grad(self, x=None) -> np.ndarray:
        """``(..., 4[l], 4, 4, D)``: ``d_l F_{mu nu}``."""
        v = self.gauge.value(x)
        g = self.gauge.grad(x)
        h = self.gauge.hess(x)
        out = np.zeros(v.shape[:-2] + (4, 4, 4, STA.dim))
        for mu in range(4):
            for nu in range(mu + 1, 4):
                d = (h[..., :, mu, nu, :] - h[..., :, nu, mu, :]
                     - STA.commutator(g[..., :, mu, :], v[..., None, nu, :])
                     - STA.commutator(v[..., None, mu, :], g[..., :, nu, :]))
                out[..., mu, nu, :] = d
                out[..., nu, mu, :] = -d
        return out


def field_strength(Gf: GaugeField) -> StrengthField:
    return StrengthField(Gf)


def raise_indices(F) -> np.ndarray:
    """``F^{mu nu} = eta^{mu a} eta^{nu b} F_{ab}`` (flat space)."""
    d = np.diag(ETA)
    return F * d[:, None, None] * d[None, :, None]


def commutator_check(psi: ClosedFormField, omega: GaugeField | None, A: GaugeField | None,
                     mu: int, nu: int, x) -> float:
    """``|| [D_mu, D_nu] Psi - (-R_{mu nu} Psi + Psi F_{mu nu}) ||`` (max over points)."""
    omega = omega or GaugeField.zero()
    A = A or GaugeField.zero()
    x = np.asarray(x, dtype=float)
    Dnu = covariant_derivative_field(psi, omega, A, nu)
    Dmu = covariant_derivative_field(psi, omega, A, mu)
    lhs = covariant_derivative(Dnu, omega, A, mu, x) - covariant_derivative(Dmu, omega, A, nu, x)
    R = field_strength(omega).value(x)[..., mu, nu, :]
    F = field_strength(A).value(x)[..., mu, nu, :]
    p = psi.value(x)
    rhs = -STA.gp(R, p) + STA.gp(p, F)
    return float(np.max(STA.norm(lhs - rhs)))


def ym_residual(A: GaugeField, nu: int, x) -> np.ndarray:
    """``d_mu F^{mu nu} - [A_mu, F^{mu nu}]`` in flat space."""
    S = field_strength(A)
    Fup = raise_indices(S.value(x))
    dF = S.grad(x)
    d = np.diag(ETA)
    val = A.value(x)
    out = np.zeros(Fup.shape[:-3] + (STA.dim,))
    for mu in range(4):
        out += d[mu] * d[nu] * dF[..., mu, mu, nu, :]
        out -= STA.commutator(val[..., mu, :], Fup[..., mu, nu, :])
    return out


def ym_residual_constant(bivectors, nu: int) -> np.ndarray:
    """Closed form of the Yang-Mills residual for a constant potential.

    With no derivatives, F_{mu nu} = -[A_mu, A_nu] and the residual is
    ``-[A_mu, F^{mu nu}]``.
    """
    A = np.asarray(bivectors, dtype=float)
    d = np.diag(ETA)
    out = np.zeros(STA.dim)
    for mu in range(4):
        Fup = -d[mu] * d[nu] * STA.commutator(A[mu], A[nu])
        out -= STA.commutator(A[mu], Fup)
    return out


# -- electromagnetic embedding ---------------------------------------------

def em_embed(potential: Sequence[ScalarFunction], charge: float = DEFAULT_CHARGE) -> GaugeField:
    """``A_mu = charge * A^EM_mu * gamma_2 gamma_1``."""
    if len(potential) != 4:
        raise ValueError("need four potential components")
    return GaugeField([ClosedFormField.combination(STA, [(f, charge * G21)]) for f in potential])


def em_extract(Gf: GaugeField, x=None, charge: float = DEFAULT_CHARGE) -> np.ndarray:
    """``A^EM_mu = A_mu^{12} / charge`` as a ``(..., 4)`` array."""
    comps = bivector_components(STA, Gf.value(x))
    return comps[..., :, 1, 2] / charge


def em_strength(potential: Sequence[ScalarFunction], x) -> np.ndarray:
    """Maxwell tensor ``d_mu A_nu - d_nu A_mu`` as ``(..., 4, 4)``."""
    grads = np.stack([f.grad(x) for f in potential], axis=-1)  # [..., mu(deriv), nu]
    return grads - np.swapaxes(grads, -1, -2)


# -- current balance and potential extraction -------------------------------

def dirac_current_field(value) -> np.ndarray:
    return STA.product(value, G0, STA.reverse(value))


def _dot_vector(B, v):
    """Bivector-vector inner product ``B . v = (B v - v B) / 2``."""
    return 0.5 * (STA.gp(B, v) - STA.gp(v, B))


def current_source(value, A_values) -> np.ndarray:
    """``sum_mu gamma^mu . (Psi (A_mu . gamma_0) ~Psi)`` with ``A_values`` of shape (..., 4, D)."""
    rev = STA.reverse(value)
    out = np.zeros(value.shape[:-1])
    for mu in range(4):
        w = _dot_vector(A_values[..., mu, :], G0)
        out += STA.gp(G_UP[mu], STA.product(value, w, rev))[..., 0]
    return out


def current_divergence(value, grad) -> np.ndarray:
    """``gamma^mu . d_mu (Psi gamma_0 ~Psi)`` from a value/gradient pair."""
    rev = STA.reverse(value)
    out = np.zeros(value.shape[:-1])
    for mu in range(4):
        dJ = STA.product(grad[..., mu, :], G0, rev) + STA.product(value, G0, STA.reverse(grad[..., mu, :]))
        out += STA.gp(G_UP[mu], dJ)[..., 0]
    return out


@dataclass(frozen=True)
class CurrentBalance:
    lhs: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray


def current_divergence_identity(psi, A: GaugeField | None, mass: float, x=None) -> CurrentBalance:
    """Both sides of the current balance for a flat-space solution.

    ``lhs = gamma^mu . d_mu(Psi gamma_0 ~Psi)`` and
    ``rhs = -2 gamma^mu . (Psi (A_mu . gamma_0) ~Psi)``. For any field,
    ``lhs - rhs = -2 <r gamma_2 gamma_1 ~Psi>`` where ``r`` is the equation
    residual, so the sides agree exactly on solutions. The residual norm is
    reported alongside.
    """
    pts = _points(psi, x)
    value, grad = _psi_jet(psi, None if isinstance(psi, LatticeField) else pts)
    a = _gauge_at(A, psi, pts)
    lhs = current_divergence(value, grad)
    rhs = -2.0 * current_source(value, a)
    r = hestenes_residual(psi, None, A, mass, x)
    return CurrentBalance(lhs, rhs, STA.norm(r))


def even_inverse_array(value, eps: float = EPS_INV) -> np.ndarray:
    """Batched inverse of even spacetime spinors."""
    q = STA.gp(value, STA.reverse(value))
    alpha = q[..., 0]
    beta = q[..., PSEUDO]
    rho2 = alpha ** 2 + beta ** 2
    if np.any(rho2 <= eps ** 2):
        raise NonInvertible("spinor magnitude below the invertibility threshold")
    qinv = np.zeros_like(q)
    qinv[..., 0] = alpha / rho2
    qinv[..., PSEUDO] = -beta / rho2
    return STA.gp(STA.reverse(value), qinv)


def extract_potential(psi: ClosedFormField, mass: float, charge: float = DEFAULT_CHARGE, x=None,
                      tol: float = CONSISTENCY_TOL) -> np.ndarray:
    """Recover the electromagnetic potential from a spinor field that solves the coupled equation.

    ``charge * gamma^mu A_mu = gamma^mu (d_mu Psi) gamma_2 gamma_1 Psi^-1 - m Psi gamma_0 Psi^-1``.
    Raises :class:`InconsistentField` when the right side is not a vector.
    """
    pts = _points(psi, x)
    value, grad = _psi_jet(psi, None if isinstance(psi, LatticeField) else pts)
    inv = even_inverse_array(value)
    slashed = sum(STA.gp(G_UP[mu], grad[..., mu, :]) for mu in range(4))
    M = STA.product(slashed, G21, inv) - mass * STA.product(value, G0, inv)
    scale = np.maximum(1.0, STA.norm(M))
    stray = STA.norm(np.where(STA.grades == 1, 0.0, M)) / scale
    if np.any(stray > tol):
        raise InconsistentField(f"non-vector part of size {float(np.max(stray)):.3g}")
    return np.stack([STA.gp(M, G[mu])[..., 0] for mu in range(4)], axis=-1) / charge
