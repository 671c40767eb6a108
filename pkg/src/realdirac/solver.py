"""Exact plane waves and 1+1D time evolution of the real Dirac equation.

Evolution runs on a periodic grid in ``z`` (all eight spinor components kept,
the other spatial directions homogeneous). Isolating the time derivative by
left-multiplying with gamma_0 gives

    d_t Psi = omega_0 Psi - Psi A_0 - m gamma_0 Psi gamma_0 gamma_2 gamma_1
              - sum_k gamma_0 gamma^k D_k Psi,

with ``D_k Psi = delta_k3 d_z Psi - omega_k Psi + Psi A_k``. The matrix
route integrates ``i gamma^mu |D_mu Psi> = m |Psi>`` on C^4 with the same
integrator for cross-validation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import bridge
from .fields import (
    ETA,
    STA,
    ClosedFormField,
    GaugeField,
    LatticeField,
    bivector_components,
    linear,
    periodic_derivative,
)
from .gauge import G0, G0_G21, G21, G_UP, CurrentBalance, current_divergence, current_source

log = logging.getLogger(__name__)

BLOWUP_FACTOR = 1e6

# Butcher tableaux: (a, b, c)
_TABLEAUX = {
    2: ([[], [0.5]], [0.0, 1.0], [0.0, 0.5]),
    4: ([[], [0.5], [0.0, 0.5], [0.0, 0.0, 1.0]], [1 / 6, 1 / 3, 1 / 3, 1 / 6], [0.0, 0.5, 0.5, 1.0]),
}


class CFLViolation(ValueError):
    pass


class BlowUp(ArithmeticError):
    pass


# -- plane waves ------------------------------------------------------------

@dataclass(frozen=True)
class PlaneWaveSpec:
    """On-shell momentum ``p^mu`` (contravariant, ``p^0 > 0``), spin 1 or 2, energy sign +-1."""

    momentum: np.ndarray
    spin: int = 1
    energy_sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "momentum", np.asarray(self.momentum, dtype=float))
        if self.spin not in (1, 2):
            raise ValueError("spin index must be 1 or 2")
        if self.energy_sign not in (1, -1):
            raise ValueError("energy sign must be +1 or -1")

    @classmethod
    def on_shell(cls, p_spatial, mass: float, spin: int = 1, energy_sign: int = 1) -> "PlaneWaveSpec":
        p = np.asarray(p_spatial, dtype=float)
        if mass < 0:
            raise ValueError("mass must be non-negative")
        if mass == 0 and not np.any(p):
            raise ValueError("a massless plane wave needs non-zero momentum")
        E = math.sqrt(float(p @ p) + mass * mass)
        return cls(np.concatenate([[E], p]), spin, energy_sign)

    def check(self, mass: float, atol: float = 1e-12):
        E = self.momentum[0]
        p = self.momentum[1:]
        if abs(E - math.sqrt(float(p @ p) + mass * mass)) > atol:
            raise ValueError("momentum is off shell")
        if mass == 0 and not np.any(p):
            raise ValueError("a massless plane wave needs non-zero momentum")


def dirac_spinor(spec: PlaneWaveSpec, mass: float) -> np.ndarray:
    """Unit-norm standard-representation spinor ``u_s(p)`` or ``v_s(p)``."""
    spec.check(mass)
    E = spec.momentum[0]
    p = spec.momentum[1:]
    chi = np.zeros(2, dtype=complex)
    chi[spec.spin - 1] = 1.0
    sp = sum(p[k] * bridge.PAULI_TABLE[k] for k in range(3))
    lower = (sp @ chi) / (E + mass)
    if spec.energy_sign > 0:
        w = np.concatenate([chi, lower])
    else:
        w = np.concatenate([lower, chi])
    return w / np.linalg.norm(w)


def plane_wave(spec: PlaneWaveSpec, mass: float, amplitude: float = 1.0) -> ClosedFormField:
    """``Psi(x) = Psi_0 exp(-+(p.x) gamma_2 gamma_1)``.

    ``Psi_0`` is the real image of the column spinor; the phase acts on the
    right because right multiplication by gamma_2 gamma_1 is the complex unit.
    """
    psi0 = amplitude * bridge.complex_to_dirac_array(dirac_spinor(spec, mass))
    p_lower = ETA @ spec.momentum
    phase = linear(-spec.energy_sign * p_lower)
    return ClosedFormField.constant(STA, psi0) * ClosedFormField.exp_scaled(STA, phase, G21)


def gauge_dressed(psi: ClosedFormField, chi, charge: float = 1.0) -> ClosedFormField:
    """``Psi(x) exp(-charge chi(x) gamma_2 gamma_1)``: a solution with potential ``d chi``."""
    return psi * ClosedFormField.exp_scaled(STA, chi * (-charge), G21)


def massless_packet(center: float, width: float, direction: int = 1) -> ClosedFormField:
    """Gaussian packet in ``z`` that moves rigidly at speed 1 when ``m = 0``.

    The constant factor ``(1 + direction gamma_3 gamma_0)/2`` makes
    ``gamma_0 gamma_3 Psi = -direction Psi``.
    """
    proj = 0.5 * (STA.scalar_mv() + direction * STA.blade(3, 0))

    class _Gauss:
        def value(self, x):
            return np.exp(-((x[..., 3] - center) ** 2) / (2 * width ** 2))

        def grad(self, x):
            g = np.zeros(x.shape)
            g[..., 3] = -(x[..., 3] - center) / width ** 2 * self.value(x)
            return g

        def hess(self, x):
            h = np.zeros(x.shape + (4,))
            s = (x[..., 3] - center) / width ** 2
            h[..., 3, 3] = (s * s - 1 / width ** 2) * self.value(x)
            return h

    return ClosedFormField.combination(STA, [(_Gauss(), proj)])


# -- lattice evolution --------------------------------------------------------

@dataclass
class EvolutionConfig:
    n_z: int
    dz: float
    dt: float
    n_steps: int
    mass: float = 1.0
    charge: float = 1.0
    potential: GaugeField | None = None
    omega: GaugeField | None = None
    order: int = 4
    t0: float = 0.0

    def __post_init__(self):
        if self.mass < 0:
            raise ValueError("mass must be non-negative")
        if self.n_z < 5:
            raise ValueError("need at least 5 grid points for the stencil")
        if self.dt > 0.5 * self.dz + 1e-15:
            raise CFLViolation(f"dt={self.dt} exceeds 0.5*dz={0.5 * self.dz}")
        if self.order not in _TABLEAUX:
            raise ValueError(f"integrator order must be one of {sorted(_TABLEAUX)}")
        if self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")

    @property
    def length(self) -> float:
        return self.n_z * self.dz

    def z(self) -> np.ndarray:
        return self.dz * np.arange(self.n_z)

    def points(self, t: float) -> np.ndarray:
        x = np.zeros((self.n_z, 4))
        x[:, 0] = t
        x[:, 3] = self.z()
        return x

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)


def _gauge_on_grid(Gf: GaugeField | None, pts) -> np.ndarray:
    if Gf is None:
        return np.zeros(pts.shape[:-1] + (4, STA.dim))
    return Gf.value(pts)


_G0_GUP = tuple(STA.gp(G0, G_UP[k]) for k in range(4))


def real_rhs(psi: np.ndarray, t: float, cfg: EvolutionConfig) -> np.ndarray:
    pts = cfg.points(t)
    out = -cfg.mass * STA.product(G0, psi, G0_G21)
    out -= STA.gp(_G0_GUP[3], periodic_derivative(psi, 0, cfg.dz))
    if cfg.omega is not None:
        w = cfg.omega.value(pts)
        out += STA.gp(w[:, 0], psi)
        for k in (1, 2, 3):
            out += STA.gp(_G0_GUP[k], STA.gp(w[:, k], psi))
    if cfg.potential is not None:
        a = cfg.potential.value(pts)
        out -= STA.gp(psi, a[:, 0])
        for k in (1, 2, 3):
            out -= STA.gp(_G0_GUP[k], STA.gp(psi, a[:, k]))
    return out


_GM = bridge.GAMMA_TABLE
_GM_UP = tuple(ETA[m, m] * _GM[m] for m in range(4))


def _connection_matrix_terms(z, wc, ac):
    """``1/2 w^{ab} g_a g_b |Psi> - 1/2 A^{ab} |Psi gamma_a gamma_b>`` on the column side."""
    out = np.zeros_like(z)
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            if np.any(wc[:, a, b]):
                out += 0.5 * wc[:, a, b, None] * (z @ (_GM[a] @ _GM[b]).T)
            if np.any(ac[:, a, b]):
                out -= 0.5 * ac[:, a, b, None] * bridge.right_bivector_action(a, b, z)
    return out


def matrix_rhs(z: np.ndarray, t: float, cfg: EvolutionConfig) -> np.ndarray:
    """``d_t|Psi>`` from ``i gamma^mu |D_mu Psi> = m |Psi>``."""
    pts = cfg.points(t)
    wc = bivector_components(STA, _gauge_on_grid(cfg.omega, pts))
    ac = bivector_components(STA, _gauge_on_grid(cfg.potential, pts))
    # |D_0 Psi> = -i m g^0 |Psi> - sum_k g^0 g^k |D_k Psi>
    D0 = -1j * cfg.mass * (z @ _GM_UP[0].T)
    dz = periodic_derivative(z, 0, cfg.dz)
    for k in (1, 2, 3):
        Dk = _connection_matrix_terms(z, wc[:, k], ac[:, k])
        if k == 3:
            Dk = Dk + dz
        D0 -= Dk @ (_GM_UP[0] @ _GM_UP[k]).T
    return D0 - _connection_matrix_terms(z, wc[:, 0], ac[:, 0])


def _integrate(rhs, y0, cfg: EvolutionConfig):
    a, b, c = _TABLEAUX[cfg.order]
    y = np.array(y0, copy=True)
    states = [y.copy()]
    scale = max(float(np.max(np.abs(y))), 1e-300)
    for n in range(cfg.n_steps):
        t = cfg.t0 + n * cfg.dt
        ks = []
        for i in range(len(b)):
            yi = y
            for j, aij in enumerate(a[i]):
                if aij:
                    yi = yi + cfg.dt * aij * ks[j]
            ks.append(rhs(yi, t + c[i] * cfg.dt, cfg))
        for bi, k in zip(b, ks):
            y = y + cfg.dt * bi * k
        peak = float(np.max(np.abs(y)))
        if not math.isfinite(peak) or peak > BLOWUP_FACTOR * scale:
            raise BlowUp(f"solution grew beyond {BLOWUP_FACTOR:g}x its initial size at step {n + 1}")
        states.append(y.copy())
    return np.array(states)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray            # (K, N, 16) real spinor coefficients
    cfg: EvolutionConfig
    charge: np.ndarray = field(default=None)
    residual_max: np.ndarray = field(default=None)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def lattice_charge(states: np.ndarray, dz: float) -> np.ndarray:
    """``Q = sum_z J^0 dz`` with ``J^0 = <gamma^0 Psi gamma_0 ~Psi>``, summed in grid order."""
    J = STA.product(states, G0, STA.reverse(states))
    J0 = STA.gp(G_UP[0], J)[..., 0]
    return np.array([math.fsum(row) * dz for row in J0.reshape(len(J0), -1)])


def time_derivative(states: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order finite differences in time (one-sided five-point at the ends)."""
    K = len(states)
    if K < 5:
        raise ValueError("need at least 5 time levels")
    out = np.empty_like(states)
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    out[2:K - 2] = (c[0] * states[0:K - 4] + c[1] * states[1:K - 3]
                    + c[3] * states[3:K - 1] + c[4] * states[4:K]) / dt
    fwd = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    for i in (0, 1):
        out[i] = sum(fwd[j] * states[i + j] for j in range(5)) / dt
        out[K - 1 - i] = -sum(fwd[j] * states[K - 1 - i - j] for j in range(5)) / dt
    return out


def trajectory_residuals(traj: Trajectory) -> np.ndarray:
    """Max over z of the equation residual at each stored time.

    ``d_t`` from :func:`time_derivative`, ``d_z`` from the periodic stencil.
    """
    cfg = traj.cfg
    dt_states = time_derivative(traj.states, cfg.dt)
    out = np.empty(len(traj.times))
    for i, t in enumerate(traj.times):
        psi = traj.states[i]
        pts = cfg.points(t)
        a = _gauge_on_grid(cfg.potential, pts)
        w = _gauge_on_grid(cfg.omega, pts)
        grad = np.zeros((cfg.n_z, 4, STA.dim))
        grad[:, 0] = dt_states[i]
        grad[:, 3] = periodic_derivative(psi, 0, cfg.dz)
        D = grad - STA.gp(w, psi[:, None]) + STA.gp(psi[:, None], a)
        slashed = sum(STA.gp(G_UP[mu], D[:, mu]) for mu in range(4))
        r = STA.product(slashed, G0_G21) - cfg.mass * psi
        out[i] = float(np.max(STA.norm(r)))
    return out


def trajectory_current_balance(traj: Trajectory) -> CurrentBalance:
    """Both sides of the current balance on every stored (t, z) site.

    Derivatives come from the same finite differences as the residual
    monitors, so ``lhs - rhs`` measures discretization error plus the
    equation residual.
    """
    cfg = traj.cfg
    K = len(traj.times)
    grad = np.zeros((K, cfg.n_z, 4, STA.dim))
    grad[:, :, 0] = time_derivative(traj.states, cfg.dt)
    grad[:, :, 3] = periodic_derivative(traj.states, 1, cfg.dz)
    pts = np.stack([cfg.points(t) for t in traj.times])
    a = _gauge_on_grid(cfg.potential, pts)
    lhs = current_divergence(traj.states, grad)
    rhs = -2.0 * current_source(traj.states, a)
    return CurrentBalance(lhs, rhs, trajectory_residuals(traj))


def evolve(initial, cfg: EvolutionConfig, monitors: bool = True) -> Trajectory:
    """Integrate the real equation from ``initial`` (a closed-form field or an (N, 16) array)."""
    if isinstance(initial, ClosedFormField):
        psi0 = initial.value(cfg.points(cfg.t0))
    else:
        psi0 = np.asarray(initial, dtype=float)
    if psi0.shape != (cfg.n_z, STA.dim):
        raise ValueError(f"initial data must have shape ({cfg.n_z}, {STA.dim})")
    odd = np.where(STA.grades % 2 == 1, psi0, 0.0)
    if np.any(odd):
        raise ValueError("initial data must be an even (spinor) field")
    log.debug("evolving %d steps on %d sites", cfg.n_steps, cfg.n_z)
    states = _integrate(real_rhs, psi0, cfg)
    traj = Trajectory(cfg.times(), states, cfg)
    if monitors:
        traj.charge = lattice_charge(states, cfg.dz)
        if cfg.n_steps >= 4:
            traj.residual_max = trajectory_residuals(traj)
    return traj


def evolve_matrix(initial, cfg: EvolutionConfig) -> np.ndarray:
    """Matrix-form counterpart of :func:`evolve`; returns ``(K, N, 4)`` complex states."""
    if isinstance(initial, ClosedFormField):
        initial = initial.value(cfg.points(cfg.t0))
    z0 = bridge.dirac_to_complex_array(initial)
    return _integrate(matrix_rhs, z0, cfg)


def cross_validate(traj: Trajectory, cfg: EvolutionConfig | None = None) -> float:
    """Max over (t, z) of ``| |Psi_real> - Psi_matrix |`` for the same initial data."""
    cfg = cfg or traj.cfg
    zs = evolve_matrix(traj.states[0], cfg)
    real_image = bridge.dirac_to_complex_array(traj.states)
    return float(np.max(np.abs(real_image - zs), initial=0.0))


def error_against(traj: Trajectory, exact: ClosedFormField) -> float:
    """Max pointwise coefficient error at the final time."""
    t = traj.times[-1]
    return float(np.max(np.abs(traj.final - exact.value(traj.cfg.points(t)))))


def lattice_trajectory_field(traj: Trajectory, index: int) -> LatticeField:
    """Snapshot ``index`` as a lattice field on a (1, 1, 1, N) grid."""
    vals = traj.states[index].reshape(1, 1, 1, traj.cfg.n_z, STA.dim)
    return LatticeField(STA, vals, (traj.cfg.dt, 1.0, 1.0, traj.cfg.dz), (traj.times[index], 0.0, 0.0, 0.0))
