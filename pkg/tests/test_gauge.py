import math

import numpy as np
import pytest

from realdirac import bridge, gauge, solver
from realdirac.fields import (
    STA,
    ClosedFormField,
    Cosine,
    DomainMismatch,
    GaugeField,
    LatticeField,
    constant,
    linear,
)
from realdirac.rotors import NotARotor
from realdirac.sampling import (
    random_bivector_array,
    random_em_potential,
    random_gauge_field,
    random_points,
    random_polynomial,
    random_rotor_field,
    random_spinor_field,
)


class _partial:
    """``d_mu chi`` as a scalar function (the Hessian row is its gradient)."""

    def __init__(self, f, mu):
        self.f, self.mu = f, mu

    def value(self, x):
        return self.f.grad(x)[..., self.mu]

    def grad(self, x):
        return self.f.hess(x)[..., self.mu, :]

    def hess(self, x):
        return np.zeros(x.shape + (4,))


def _free_wave(mass=1.0, p=(0.3, -0.2, 0.5)):
    return solver.plane_wave(solver.PlaneWaveSpec.on_shell(p, mass), mass)


def test_plane_wave_solves_free_equation(rng):
    x = random_points(rng, 8)
    for energy_sign in (1, -1):
        for spin in (1, 2):
            spec = solver.PlaneWaveSpec.on_shell([0.1, 0.7, -0.4], 1.3, spin, energy_sign)
            psi = solver.plane_wave(spec, 1.3)
            assert np.max(np.abs(gauge.hestenes_residual(psi, None, None, 1.3, x))) < 1e-13
            assert np.max(np.abs(gauge.matrix_residual(psi, None, None, 1.3, x))) < 1e-13


def test_dressed_wave_solves_coupled_equation(rng):
    chi = random_polynomial(rng, 2, 0.3)
    charge = 1.7
    psi = solver.gauge_dressed(_free_wave(), chi, charge)
    A = gauge.em_embed([_partial(chi, mu) for mu in range(4)], charge)
    x = random_points(rng, 6)
    assert np.max(np.abs(gauge.hestenes_residual(psi, None, A, 1.0, x))) < 1e-12


def test_real_and_matrix_residuals_agree(rng):
    for _ in range(10):
        psi = random_spinor_field(rng)
        omega, A = random_gauge_field(rng), random_gauge_field(rng)
        x = random_points(rng, 4)
        real = gauge.hestenes_residual(psi, omega, A, 0.8, x)
        matrix = gauge.matrix_residual(psi, omega, A, 0.8, x)
        np.testing.assert_allclose(bridge.dirac_to_complex_array(real), matrix, atol=1e-12)


def test_covariant_derivative_transforms_covariantly(rng):
    for _ in range(5):
        psi = random_spinor_field(rng)
        omega, A = random_gauge_field(rng), random_gauge_field(rng)
        U = random_rotor_field(rng)
        x = random_points(rng, 4)
        t = gauge.gauge_transform(U, psi, omega, A, check_points=x)
        D = gauge.covariant_derivatives(psi, omega, A, x)
        D2 = gauge.covariant_derivatives(t.psi, t.omega, t.A, x)
        u = U.value(x)[..., None, :]
        np.testing.assert_allclose(D2, STA.product(u, D, STA.reverse(u)), atol=1e-10)


def test_transformed_frame_stays_orthonormal(rng):
    U = random_rotor_field(rng)
    x = random_points(rng, 3)
    t = gauge.gauge_transform(U, random_spinor_field(rng), None, None, check_points=x)
    g = np.stack([f.value(x) for f in t.frame], axis=-2)
    for a in range(4):
        for b in range(4):
            sym = 0.5 * (STA.gp(g[:, a], g[:, b]) + STA.gp(g[:, b], g[:, a]))
            expected = (1.0 if a == 0 else -1.0) if a == b else 0.0
            np.testing.assert_allclose(sym[:, 0], expected, atol=1e-12)


def test_non_rotor_is_rejected(rng):
    two = ClosedFormField.constant(STA, 2.0 * STA.scalar_mv())
    with pytest.raises(NotARotor):
        gauge.gauge_transform(two, random_spinor_field(rng), None, None)


def test_curvature_commutator(rng):
    psi = random_spinor_field(rng, polynomial_only=True)
    omega = random_gauge_field(rng, polynomial_only=True)
    A = random_gauge_field(rng, polynomial_only=True)
    x = random_points(rng, 3)
    for mu, nu in ((0, 1), (1, 3), (2, 0)):
        assert gauge.commutator_check(psi, omega, A, mu, nu, x) < 1e-10


def test_zero_potential_has_zero_strength(rng):
    x = random_points(rng, 3)
    assert not np.any(gauge.field_strength(GaugeField.zero()).value(x))


def test_linear_em_potential_strength():
    # A_3 = c t gives F_{03} = c
    c, charge = 0.6, 1.5
    A = gauge.em_embed([constant(0.0), constant(0.0), constant(0.0), linear([c, 0, 0, 0])], charge)
    F = gauge.field_strength(A).value(np.zeros((1, 4)))[0]
    np.testing.assert_allclose(F[0, 3], charge * c * gauge.G21, atol=1e-15)
    np.testing.assert_allclose(F[3, 0], -charge * c * gauge.G21, atol=1e-15)
    assert not np.any(F[1, 2])


def test_em_strength_matches_maxwell(rng):
    for _ in range(5):
        pot = random_em_potential(rng)
        x = random_points(rng, 4)
        F = gauge.field_strength(gauge.em_embed(pot, 0.7)).value(x)
        np.testing.assert_allclose(F, 0.7 * gauge.em_strength(pot, x)[..., None] * gauge.G21, atol=1e-12)
        np.testing.assert_allclose(gauge.em_extract(gauge.em_embed(pot, 0.7), x, 0.7),
                                   np.stack([f.value(x) for f in pot], axis=-1), atol=1e-14)


def test_strength_is_antisymmetric_bivector(rng):
    A = random_gauge_field(rng)
    F = gauge.field_strength(A).value(random_points(rng, 3))
    np.testing.assert_allclose(F, -np.swapaxes(F, -2, -3), atol=0.0)
    assert np.max(np.abs(np.where(STA.grades == 2, 0.0, F))) < 1e-13


def test_strength_gradient_matches_finite_differences(rng):
    A = random_gauge_field(rng, polynomial_only=True)
    S = gauge.field_strength(A)
    x = random_points(rng, 2)
    h = 1e-5
    for l in range(4):
        e = np.zeros(4)
        e[l] = h
        fd = (S.value(x + e) - S.value(x - e)) / (2 * h)
        np.testing.assert_allclose(S.grad(x)[:, l], fd, atol=1e-7)


def test_constant_yang_mills_two_ways(rng):
    for _ in range(5):
        bivs = random_bivector_array(rng, (4,))
        A = GaugeField.constant(bivs)
        x = random_points(rng, 2)
        F = gauge.field_strength(A).value(x)[0]
        np.testing.assert_allclose(F[1, 2], -STA.commutator(bivs[1], bivs[2]), atol=1e-14)
        for nu in range(4):
            np.testing.assert_allclose(gauge.ym_residual(A, nu, x)[0], gauge.ym_residual_constant(bivs, nu),
                                       atol=1e-12)


def test_vacuum_em_wave_solves_yang_mills(rng):
    wave = [constant(0.0), Cosine(0.7, [1.0, 0.0, 0.0, -1.0]), constant(0.0), constant(0.0)]
    A = gauge.em_embed(wave, 1.3)
    x = random_points(rng, 8, 3.0)
    for nu in range(4):
        assert np.max(np.abs(gauge.ym_residual(A, nu, x))) < 1e-12


def test_current_balance_defect_is_residual_projection(rng):
    psi = random_spinor_field(rng)
    A = random_gauge_field(rng)
    x = random_points(rng, 5)
    bal = gauge.current_divergence_identity(psi, A, 0.9, x)
    r = gauge.hestenes_residual(psi, None, A, 0.9, x)
    defect = -2.0 * STA.product(r, gauge.G21, STA.reverse(psi.value(x)))[..., 0]
    np.testing.assert_allclose(bal.lhs - bal.rhs, defect, atol=1e-11)


def test_em_only_source_vanishes(rng):
    chi = random_polynomial(rng, 2, 0.3)
    psi = solver.gauge_dressed(_free_wave(), chi, 1.0)
    A = gauge.em_embed([_partial(chi, mu) for mu in range(4)], 1.0)
    bal = gauge.current_divergence_identity(psi, A, 1.0, random_points(rng, 5))
    assert np.max(np.abs(bal.rhs)) < 1e-14
    assert np.max(np.abs(bal.lhs)) < 1e-12


def test_extract_free_and_dressed(rng):
    x = random_points(rng, 6)
    assert np.max(np.abs(gauge.extract_potential(_free_wave(0.8), 0.8, 1.0, x))) < 1e-12
    chi = linear([0.2, -0.1, 0.4, 0.3])
    psi = solver.gauge_dressed(_free_wave(0.8), chi, 2.0)
    np.testing.assert_allclose(gauge.extract_potential(psi, 0.8, 2.0, x), np.broadcast_to(chi.c1, (6, 4)),
                               atol=1e-12)


def test_extract_rejects_non_solutions(rng):
    psi = random_spinor_field(rng)
    with pytest.raises(gauge.InconsistentField):
        gauge.extract_potential(psi, 1.0, 1.0, random_points(rng, 4))


def test_lattice_residual_matches_closed_form():
    n = 64
    L = 2 * math.pi
    mass = 1.0
    spec = solver.PlaneWaveSpec.on_shell([0.0, 0.0, 1.0], mass)
    psi = solver.plane_wave(spec, mass)
    lat = LatticeField.sample(psi, (1, 1, 1, n), (1.0, 1.0, 1.0, L / n))
    # the lattice has no time extent, so drop d_t from the closed form too
    r_lat = gauge.hestenes_residual(lat, None, None, mass)
    r_cf = gauge.hestenes_residual(psi, None, None, mass, lat.points())
    dt = STA.product(gauge.G_UP[0], psi.grad(lat.points())[..., 0, :], gauge.G0_G21)
    np.testing.assert_allclose(r_lat, r_cf - dt, atol=1e-4)


def test_lattice_gauge_must_share_grid():
    lat = LatticeField(STA, np.zeros((1, 1, 1, 8, 16)), (1.0, 1.0, 1.0, 0.1))
    other = LatticeField(STA, np.zeros((1, 1, 1, 8, 16)), (1.0, 1.0, 1.0, 0.2))
    A = GaugeField([other] * 4)
    with pytest.raises(DomainMismatch):
        gauge.covariant_derivatives(lat, None, A)
    with pytest.raises(DomainMismatch):
        gauge.covariant_derivatives(lat, None, None, np.zeros((1, 4)))
