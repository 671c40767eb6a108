import math

import numpy as np
import pytest

from realdirac import gauge, solver
from realdirac.fields import STA, GaugeField


def _run(psi, n_z=128, dz=0.1, dt=0.04, t_end=1.0, mass=1.0, **kw):
    cfg = solver.EvolutionConfig(n_z, dz, dt, int(round(t_end / dt)), mass, **kw)
    return solver.evolve(psi, cfg)


def test_dirac_spinor_is_unit_and_on_shell():
    spec = solver.PlaneWaveSpec.on_shell([0.3, 0.4, 0.0], 2.0)
    assert spec.momentum[0] == pytest.approx(math.sqrt(0.25 + 4.0))
    for sign in (1, -1):
        w = solver.dirac_spinor(solver.PlaneWaveSpec(spec.momentum, 2, sign), 2.0)
        assert np.linalg.norm(w) == pytest.approx(1.0)


def test_plane_wave_spec_validation():
    with pytest.raises(ValueError):
        solver.PlaneWaveSpec(np.array([1.0, 0, 0, 0]), spin=3)
    with pytest.raises(ValueError):
        solver.PlaneWaveSpec(np.array([1.0, 0, 0, 0]), energy_sign=0)
    with pytest.raises(ValueError):
        solver.PlaneWaveSpec.on_shell([0.0, 0.0, 0.0], 0.0)
    with pytest.raises(ValueError):
        solver.PlaneWaveSpec(np.array([2.0, 0, 0, 0])).check(1.0)


def test_rest_frame_wave_has_only_time_error():
    mass = 1.0
    psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, 0.0], mass), mass)
    traj = _run(psi, n_z=16, t_end=1.0)
    # only the time discretization contributes
    assert np.max(traj.residual_max) < 1e-6
    assert solver.error_against(traj, psi) < 1e-7
    # spatially constant data feels no derivative error at all
    np.testing.assert_allclose(traj.states[:, 0], traj.states[:, 7], atol=1e-15)


def test_massless_and_static_limits():
    # m = 0 with momentum along z, and m > 0 at rest
    L = 12.8
    for mass, pz in ((0.0, 2 * math.pi / L), (0.7, 0.0)):
        psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, pz], mass), mass)
        traj = _run(psi, n_z=128, dz=0.1, dt=0.02, t_end=1.0, mass=mass)
        assert solver.error_against(traj, psi) < 1e-6


def test_massless_packet_moves_at_unit_speed():
    n_z, dz = 256, 0.05
    L = n_z * dz
    psi = solver.massless_packet(L / 4, 0.5, direction=1)
    traj = _run(psi, n_z=n_z, dz=dz, dt=0.02, t_end=2.0, mass=0.0)
    z = traj.cfg.z()
    weight = traj.final[:, 0] ** 2 + traj.final[:, 10] ** 2
    centre = float(np.sum(z * weight) / np.sum(weight))
    assert centre == pytest.approx(L / 4 + 2.0, abs=1e-3)
    moved = solver.massless_packet(L / 4 + 2.0, 0.5, direction=1)
    np.testing.assert_allclose(traj.final, moved.value(traj.cfg.points(2.0)), atol=1e-4)


def test_packet_direction_eigenvalue():
    for d in (1, -1):
        psi = solver.massless_packet(0.0, 1.0, d)
        v = psi.value(np.zeros((1, 4)))
        np.testing.assert_allclose(STA.product(STA.blade(0), STA.blade(3), v), -d * v, atol=1e-15)


def test_config_validation():
    with pytest.raises(solver.CFLViolation):
        solver.EvolutionConfig(64, 0.1, 0.06, 1)
    with pytest.raises(ValueError):
        solver.EvolutionConfig(4, 0.1, 0.01, 1)
    with pytest.raises(ValueError):
        solver.EvolutionConfig(64, 0.1, 0.01, 1, mass=-1.0)
    with pytest.raises(ValueError):
        solver.EvolutionConfig(64, 0.1, 0.01, 1, order=3)
    with pytest.raises(ValueError):
        solver.EvolutionConfig(64, 0.1, 0.01, -1)


def test_initial_data_checks():
    cfg = solver.EvolutionConfig(16, 0.1, 0.01, 1)
    with pytest.raises(ValueError):
        solver.evolve(np.zeros((8, 16)), cfg)
    odd = np.zeros((16, 16))
    odd[:, 1] = 1.0
    with pytest.raises(ValueError):
        solver.evolve(odd, cfg)


def test_blow_up_is_reported():
    # a large chiral potential puts RK4 outside its stability region
    A = GaugeField.constant([1e3 * STA.blade(3, 0), np.zeros(16), np.zeros(16), np.zeros(16)])
    psi = np.zeros((16, 16))
    psi[:, 0] = 1.0
    cfg = solver.EvolutionConfig(16, 0.1, 0.05, 50, potential=A)
    with pytest.raises(solver.BlowUp):
        solver.evolve(psi, cfg)


def test_zero_data_stays_zero():
    cfg = solver.EvolutionConfig(16, 0.1, 0.05, 10)
    traj = solver.evolve(np.zeros((16, 16)), cfg, monitors=False)
    assert not np.any(traj.states)
    assert solver.cross_validate(traj) == 0.0


def test_charge_is_conserved_for_free_evolution():
    mass = 1.0
    psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, 2 * math.pi / 12.8], mass), mass)
    traj = _run(psi, n_z=128, dz=0.1, dt=0.02, t_end=2.0)
    assert np.max(np.abs(traj.charge - traj.charge[0])) < 1e-8
    assert traj.charge[0] == pytest.approx(12.8, rel=1e-12)


def test_matrix_evolution_agrees_with_omega():
    omega = GaugeField.constant([0.2 * STA.blade(1, 2), np.zeros(16), 0.1 * STA.blade(3, 0), np.zeros(16)])
    A = GaugeField.constant([np.zeros(16), 0.1 * STA.blade(2, 1), np.zeros(16), 0.3 * STA.blade(0, 3)])
    psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, 2 * math.pi / 6.4], 1.0), 1.0)
    traj = _run(psi, n_z=64, dz=0.1, dt=0.04, t_end=0.5, omega=omega, potential=A)
    assert solver.cross_validate(traj) < 1e-12


@pytest.mark.parametrize("order", [2, 4])
def test_integrator_convergence_order(order):
    mass = 1.0
    psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, 0.0], mass), mass)
    errors = []
    # a wave at rest has no spatial discretization error
    for dt in (0.04, 0.02):
        cfg = solver.EvolutionConfig(16, 0.1, dt, int(round(1.0 / dt)), mass, order=order)
        errors.append(solver.error_against(solver.evolve(psi, cfg, monitors=False), psi))
    assert math.log2(errors[0] / errors[1]) > order - 0.3


def test_trajectory_current_balance_on_chiral_potential():
    chiral = GaugeField.constant([0.3 * STA.blade(3, 0), np.zeros(16), np.zeros(16), 0.2 * STA.blade(3, 0)])
    psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, 2 * math.pi / 12.8], 1.0), 1.0)
    traj = _run(psi, n_z=256, dz=0.05, dt=0.02, t_end=1.0, potential=chiral)
    bal = solver.trajectory_current_balance(traj)
    assert np.max(np.abs(bal.rhs)) > 1e-2
    assert np.max(np.abs(bal.lhs - bal.rhs)) < 1e-4


def test_time_derivative_is_exact_for_quartics():
    t = 0.1 * np.arange(9)
    y = (t ** 4 - 2 * t ** 3)[:, None]
    np.testing.assert_allclose(solver.time_derivative(y, 0.1)[:, 0], 4 * t ** 3 - 6 * t ** 2, atol=1e-10)
    with pytest.raises(ValueError):
        solver.time_derivative(y[:4], 0.1)


def test_lattice_snapshot_field():
    psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, 2 * math.pi / 6.4], 1.0), 1.0)
    traj = _run(psi, n_z=64, dz=0.1, dt=0.04, t_end=0.4)
    lat = solver.lattice_trajectory_field(traj, 3)
    assert lat.shape == (1, 1, 1, 64)
    np.testing.assert_array_equal(lat.value()[0, 0, 0], traj.states[3])
    assert lat.origin[0] == pytest.approx(traj.times[3])


def test_rest_wave_extracts_zero_potential():
    psi = solver.plane_wave(solver.PlaneWaveSpec.on_shell([0.0, 0.0, 0.0], 1.0), 1.0)
    x = np.zeros((3, 4))
    x[:, 3] = [0.0, 0.5, 1.0]
    assert np.max(np.abs(gauge.extract_potential(psi, 1.0, 1.0, x))) < 1e-14
