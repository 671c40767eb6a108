"""Config-driven runs behind the ``evolve``, ``strength`` and ``extract`` commands.

Recognised keys (all optional unless noted):

``[grid]``
    ``n_z`` (required), ``dz`` (required), ``dt``, ``n_steps``, ``t0``,
    ``snapshot_every`` (evolve), ``times`` (strength/extract sample times).
``[physics]``
    ``mass``, ``charge``, ``order`` (2 or 4), ``residual_tolerance``,
    ``tolerance``.
``[fields]``
    ``initial`` = ``plane_wave`` | ``packet``; ``mode`` (integer number of
    wavelengths across the periodic box, evolve) or ``momentum`` = px,py,pz
    (strength/extract); ``spin``, ``energy_sign``, ``amplitude``; packet keys
    ``center``, ``width``, ``direction``.
    ``potential`` = ``none`` | ``em_wave`` | ``em_linear`` with
    ``em_amplitude``/``em_wavevector``/``em_phase`` or
    ``em_constant``/``em_gradient`` (16 values, row-major ``d_nu A_mu`` ->
    ``[mu][nu]``), plus optional constant bivector parts ``bivector_0`` ..
    ``bivector_3`` (6 values each, bivector component order of the CSV
    format).
    ``chi_constant``, ``chi_linear``, ``chi_quadratic`` (extract: gauge
    function dressing the plane wave).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gauge, io, solver
from .fields import (
    BIVECTOR_MASKS,
    STA,
    ClosedFormField,
    Cosine,
    GaugeField,
    Polynomial,
    constant,
)
from .verify import CheckResult, RunReport

log = logging.getLogger(__name__)

_GRID = {"n_z", "dz", "dt", "n_steps", "t0", "snapshot_every", "times"}
_PHYSICS = {"mass", "charge", "order", "residual_tolerance", "tolerance"}
_FIELDS = {
    "initial", "mode", "momentum", "spin", "energy_sign", "amplitude",
    "center", "width", "direction",
    "potential", "em_amplitude", "em_wavevector", "em_phase", "em_constant", "em_gradient",
    "bivector_0", "bivector_1", "bivector_2", "bivector_3",
    "chi_constant", "chi_linear", "chi_quadratic",
}
ALLOWED = {"grid": _GRID, "physics": _PHYSICS, "fields": _FIELDS}


@dataclass
class Potential:
    field: GaugeField | None
    em: list | None          # scalar potentials when the field is purely electromagnetic


def build_potential(cfg: io.Config, charge: float) -> Potential:
    kind = cfg.get_str("fields", "potential", "none")
    em = None
    if kind == "none":
        pass
    elif kind == "em_wave":
        amp = cfg.get_list("fields", "em_amplitude", 4)
        k = cfg.get_list("fields", "em_wavevector", 4)
        phase = cfg.get_float("fields", "em_phase", 0.0)
        em = [Cosine(a, k, phase) for a in amp]
    elif kind == "em_linear":
        c = cfg.get_list("fields", "em_constant", 4, default=np.zeros(4))
        g = cfg.get_list("fields", "em_gradient", 16, default=np.zeros(16)).reshape(4, 4)
        em = [Polynomial(c[mu], g[mu]) for mu in range(4)]
    else:
        raise io.ConfigError(f"[fields] potential: unknown kind {kind!r}")

    comps = []
    extra = False
    for mu in range(4):
        b = cfg.get_list("fields", f"bivector_{mu}", 6, default=np.zeros(6))
        B = np.zeros(STA.dim)
        B[list(BIVECTOR_MASKS)] = b
        extra = extra or bool(np.any(b))
        comps.append(B)
    if em is None and not extra:
        return Potential(None, None)
    base = gauge.em_embed(em or [constant(0.0)] * 4, charge)
    field = GaugeField([base[mu] + ClosedFormField.constant(STA, comps[mu]) for mu in range(4)])
    return Potential(field, None if extra else em)


def _sample_points(cfg: io.Config) -> np.ndarray:
    n_z = cfg.get_int("grid", "n_z")
    dz = cfg.get_float("grid", "dz")
    if n_z < 1 or dz <= 0:
        raise io.ConfigError("[grid] n_z must be positive and dz > 0")
    times = cfg.get_list("grid", "times", default=[cfg.get_float("grid", "t0", 0.0)])
    pts = np.zeros((len(times), n_z, 4))
    pts[..., 0] = times[:, None]
    pts[..., 3] = dz * np.arange(n_z)
    return pts.reshape(-1, 4)


def _spin_and_sign(cfg: io.Config):
    spin = cfg.get_int("fields", "spin", 1)
    sign = cfg.get_int("fields", "energy_sign", 1)
    return spin, sign


# -- evolve -------------------------------------------------------------------

@dataclass
class EvolveResult:
    report: RunReport
    trajectory: solver.Trajectory
    exact_error: float | None
    files: list[Path]


def evolution_config(cfg: io.Config) -> tuple[solver.EvolutionConfig, Potential]:
    cfg.check_keys(ALLOWED)
    charge = cfg.get_float("physics", "charge", 1.0)
    pot = build_potential(cfg, charge)
    try:
        ec = solver.EvolutionConfig(
            n_z=cfg.get_int("grid", "n_z"),
            dz=cfg.get_float("grid", "dz"),
            dt=cfg.get_float("grid", "dt"),
            n_steps=cfg.get_int("grid", "n_steps"),
            mass=cfg.get_float("physics", "mass", 1.0),
            charge=charge,
            potential=pot.field,
            order=cfg.get_int("physics", "order", 4),
            t0=cfg.get_float("grid", "t0", 0.0),
        )
    except ValueError as exc:
        raise io.ConfigError(str(exc)) from None
    return ec, pot


def initial_field(cfg: io.Config, ec: solver.EvolutionConfig):
    """Initial spinor field and, for a free plane wave, the exact solution."""
    kind = cfg.get_str("fields", "initial", "plane_wave")
    amplitude = cfg.get_float("fields", "amplitude", 1.0)
    if kind == "plane_wave":
        mode = cfg.get_int("fields", "mode", 1)
        spin, sign = _spin_and_sign(cfg)
        try:
            spec = solver.PlaneWaveSpec.on_shell([0.0, 0.0, 2 * math.pi * mode / ec.length], ec.mass, spin, sign)
        except ValueError as exc:
            raise io.ConfigError(str(exc)) from None
        psi = solver.plane_wave(spec, ec.mass, amplitude)
        return psi, (psi if ec.potential is None else None)
    if kind == "packet":
        center = cfg.get_float("fields", "center", 0.5 * ec.length)
        width = cfg.get_float("fields", "width", 0.1 * ec.length)
        direction = cfg.get_int("fields", "direction", 1)
        if direction not in (1, -1):
            raise io.ConfigError("[fields] direction must be 1 or -1")
        return solver.massless_packet(center, width, direction) * amplitude, None
    raise io.ConfigError(f"[fields] initial: unknown kind {kind!r}")


def run_evolve(path, out_dir, tolerance_scale: float = 1.0) -> EvolveResult:
    cfg = io.read_config(path)
    ec, _ = evolution_config(cfg)
    psi0, exact = initial_field(cfg, ec)
    tol = cfg.get_float("physics", "residual_tolerance", 1e-6) * tolerance_scale
    every = cfg.get_int("grid", "snapshot_every", max(ec.n_steps, 1))
    if every < 1:
        raise io.ConfigError("[grid] snapshot_every must be positive")

    start = time.perf_counter()
    try:
        traj = solver.evolve(psi0, ec)
    except solver.BlowUp as exc:
        raise io.ConfigError(f"evolution blew up: {exc}") from None
    elapsed = time.perf_counter() - start

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keep = sorted(set(range(0, len(traj.times), every)) | {len(traj.times) - 1})
    snap = out / "trajectory.csv"
    mon = out / "monitors.csv"
    io.write_spinor_snapshots(snap, traj.times[keep], ec.points, traj.states[keep])
    io.write_monitors(mon, traj.times, traj.residual_max, traj.charge)

    res = float(np.max(traj.residual_max)) if traj.residual_max is not None else 0.0
    checks = [CheckResult("residual_monitor", ec.n_steps, res, tol)]
    exact_error = None
    if exact is not None:
        exact_error = solver.error_against(traj, exact)
        checks.append(CheckResult("exact_solution_error", 1, exact_error, tol))
    drift = float(np.max(np.abs(traj.charge - traj.charge[0])))
    log.info("charge drift %.3e", drift)
    report = RunReport("evolve", ec.n_steps, res, tol, all(c.passed for c in checks), elapsed, checks)
    return EvolveResult(report, traj, exact_error, [snap, mon])


# -- strength -----------------------------------------------------------------

def run_strength(path, out_path, tolerance_scale: float = 1.0):
    cfg = io.read_config(path)
    cfg.check_keys(ALLOWED)
    charge = cfg.get_float("physics", "charge", 1.0)
    pot = build_potential(cfg, charge)
    field = pot.field or GaugeField.zero()
    pts = _sample_points(cfg)
    start = time.perf_counter()
    F = gauge.field_strength(field).value(pts)
    io.write_strength(out_path, pts, F)
    checks = [CheckResult("antisymmetry", len(pts), float(np.max(np.abs(F + np.swapaxes(F, -2, -3)))), 0.0)]
    if pot.em is not None:
        expected = charge * gauge.em_strength(pot.em, pts)[..., None] * gauge.G21
        scale = max(1.0, float(np.max(np.abs(expected))))
        tol = cfg.get_float("physics", "tolerance", 1e-12) * tolerance_scale
        checks.append(CheckResult("matches_em_strength", len(pts), float(np.max(np.abs(F - expected))) / scale, tol))
    worst = max(checks, key=lambda c: (not c.passed, c.max_residual))
    return RunReport("strength", len(pts), worst.max_residual, worst.tolerance,
                     all(c.passed for c in checks), time.perf_counter() - start, checks)


# -- extract -------------------------------------------------------------------

def run_extract(path, out_path, tolerance_scale: float = 1.0):
    cfg = io.read_config(path)
    cfg.check_keys(ALLOWED)
    mass = cfg.get_float("physics", "mass", 1.0)
    charge = cfg.get_float("physics", "charge", 1.0)
    spin, sign = _spin_and_sign(cfg)
    try:
        spec = solver.PlaneWaveSpec.on_shell(cfg.get_list("fields", "momentum", 3, default=np.zeros(3)),
                                             mass, spin, sign)
    except ValueError as exc:
        raise io.ConfigError(str(exc)) from None
    chi = Polynomial(
        cfg.get_float("fields", "chi_constant", 0.0),
        cfg.get_list("fields", "chi_linear", 4, default=np.zeros(4)),
        cfg.get_list("fields", "chi_quadratic", 16, default=np.zeros(16)).reshape(4, 4),
    )
    psi = solver.gauge_dressed(solver.plane_wave(spec, mass, cfg.get_float("fields", "amplitude", 1.0)),
                               chi, charge)
    pts = _sample_points(cfg)
    start = time.perf_counter()
    A = gauge.extract_potential(psi, mass, charge, pts)
    io.write_potential_table(out_path, pts, A)
    tol = cfg.get_float("physics", "tolerance", 1e-8) * tolerance_scale
    err = float(np.max(np.abs(A - chi.grad(pts))))
    check = CheckResult("matches_gauge_gradient", len(pts), err, tol)
    return RunReport("extract", len(pts), err, tol, check.passed, time.perf_counter() - start, [check])
