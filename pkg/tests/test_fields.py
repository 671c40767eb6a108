import math

import numpy as np
import pytest

from realdirac.fields import (
    ETA,
    STA,
    ClosedFormField,
    Cosine,
    DerivativeUnavailable,
    DomainMismatch,
    GaugeField,
    LatticeField,
    Polynomial,
    StencilTooSmall,
    Tetrad,
    bivector_components,
    bivector_from_components,
    constant,
    linear,
    periodic_derivative,
    sine,
)
from realdirac.sampling import random_bivector_array, random_gauge_field, random_points, random_spinor_field


def test_polynomial_derivatives(rng):
    p = Polynomial(1.0, np.array([0.5, -1.0, 2.0, 0.0]), np.diag([1.0, 2.0, -1.0, 0.5]))
    x = random_points(rng, 6)
    fd = np.stack([(p.value(x + h) - p.value(x - h)) / 2e-6 for h in 1e-6 * np.eye(4)], axis=-1)
    np.testing.assert_allclose(p.grad(x), fd, atol=1e-7)
    assert p.hess(x).shape == (6, 4, 4)


def test_cosine_and_sine():
    k = np.array([1.0, 0.0, 0.0, 2.0])
    x = np.array([[0.3, 0.0, 0.0, 0.1]])
    assert Cosine(2.0, k).value(x)[0] == pytest.approx(2.0 * math.cos(0.5))
    assert sine(2.0, k).value(x)[0] == pytest.approx(2.0 * math.sin(0.5))
    np.testing.assert_allclose(Cosine(1.0, k).grad(x)[0], -math.sin(0.5) * k)


def test_scalar_arithmetic():
    f = linear([1.0, 0, 0, 0]) + constant(2.0)
    x = np.array([[3.0, 0, 0, 0]])
    assert f.value(x)[0] == 5.0
    assert (f * 2.0).value(x)[0] == 10.0


def test_check_derivatives_accepts_consistent_fields(rng):
    for _ in range(5):
        psi = random_spinor_field(rng)
        assert psi.check_derivatives(random_points(rng, 4)) < 1e-6


def test_check_derivatives_rejects_wrong_gradient():
    bad = ClosedFormField(STA, lambda x: np.broadcast_to(x[..., :1], x.shape[:-1] + (16,)).copy(),
                          lambda x: np.zeros(x.shape[:-1] + (4, 16)))
    with pytest.raises(ValueError):
        bad.check_derivatives(np.zeros((2, 4)))


def test_product_rule_and_hessian(rng):
    F, H = random_spinor_field(rng), random_spinor_field(rng)
    P = F * H
    assert P.check_derivatives(random_points(rng, 4)) < 1e-6
    x = random_points(rng, 3)
    dP = P.partial(1)
    np.testing.assert_allclose(dP.value(x), P.grad(x)[:, 1], atol=1e-13)
    assert dP.check_derivatives(x) < 1e-6
    with pytest.raises(DerivativeUnavailable):
        dP.partial(0)


def test_reverse_field(rng):
    F = random_spinor_field(rng)
    x = random_points(rng, 3)
    np.testing.assert_allclose(F.reverse().value(x), STA.reverse(F.value(x)))


def test_exp_scaled_matches_exponential(rng):
    B = STA.blade(2, 1)
    f = linear([0.3, 0.0, 0.0, 1.1])
    E = ClosedFormField.exp_scaled(STA, f, B)
    x = random_points(rng, 5)
    th = f.value(x)
    expected = np.cos(th)[:, None] * STA.scalar_mv() + np.sin(th)[:, None] * B
    np.testing.assert_allclose(E.value(x), expected, atol=1e-14)
    assert E.check_derivatives(x) < 1e-6


@pytest.mark.parametrize("n", [16, 32, 64])
def test_periodic_derivative_accuracy(n):
    L = 2 * math.pi
    z = L * np.arange(n) / n
    d = periodic_derivative(np.sin(z), 0, L / n)
    err = float(np.max(np.abs(d - np.cos(z))))
    assert err < 3.0 * (L / n) ** 4


def test_periodic_derivative_is_fourth_order():
    errs = []
    for n in (32, 64):
        z = 2 * math.pi * np.arange(n) / n
        errs.append(np.max(np.abs(periodic_derivative(np.sin(3 * z), 0, 2 * math.pi / n) - 3 * np.cos(3 * z))))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_stencil_too_small(n):
    with pytest.raises(StencilTooSmall):
        periodic_derivative(np.zeros(n), 0, 0.1)
    with pytest.raises(StencilTooSmall):
        LatticeField(STA, np.zeros((1, 1, 1, n, 16)), (1.0, 1.0, 1.0, 0.1))


def test_homogeneous_axis_has_zero_derivative():
    np.testing.assert_array_equal(periodic_derivative(np.ones((1, 3)), 0, 0.1), np.zeros((1, 3)))


def test_lattice_matches_closed_form():
    n = 64
    L = 2 * math.pi
    F = ClosedFormField.combination(STA, [(Cosine(1.0, [0, 0, 0, 1.0]), STA.blade(2, 1)),
                                          (constant(0.5), STA.scalar_mv())])
    lat = LatticeField.sample(F, (1, 1, 1, n), (1.0, 1.0, 1.0, L / n))
    pts = lat.points()
    np.testing.assert_allclose(lat.value(), F.value(pts), atol=1e-15)
    np.testing.assert_allclose(lat.grad(), F.grad(pts), atol=1e-4)
    np.testing.assert_allclose(lat.hess()[..., 3, 3, :], F.hess(pts)[..., 3, 3, :], atol=1e-4)
    assert np.all(lat.grad()[..., :3, :] == 0)


def test_lattice_rejects_points():
    lat = LatticeField(STA, np.zeros((1, 1, 1, 8, 16)), (1.0, 1.0, 1.0, 0.1))
    with pytest.raises(DomainMismatch):
        lat.value(np.zeros((1, 4)))
    with pytest.raises(ValueError):
        LatticeField(STA, np.zeros((8, 16)), (1.0,) * 4)


def test_gauge_field_shapes(rng):
    A = random_gauge_field(rng)
    x = random_points(rng, 3)
    assert A.value(x).shape == (3, 4, 16)
    assert A.grad(x).shape == (3, 4, 4, 16)
    assert A.grade_impurity(x) == 0.0
    z = GaugeField.zero()
    assert not np.any(z.value(x))
    c = GaugeField.constant([STA.blade(1, 0)] * 4)
    np.testing.assert_array_equal(c.value(x)[1, 2], STA.blade(1, 0))
    with pytest.raises(ValueError):
        GaugeField([z[0]] * 3)


def test_bivector_components_round_trip(rng):
    B = random_bivector_array(rng, (5,))
    comps = bivector_components(STA, B)
    np.testing.assert_allclose(comps, -np.swapaxes(comps, -1, -2))
    np.testing.assert_allclose(bivector_from_components(STA, comps), B, atol=1e-15)
    # B = 1/2 B^{ab} gamma_b gamma_a, so B^{10} is the coefficient of gamma_0 gamma_1
    e = bivector_components(STA, STA.blade(0, 1))
    assert e[1, 0] == 1.0 and e[0, 1] == -1.0


def test_tetrad():
    x = np.zeros((2, 4))
    assert Tetrad.identity().orthonormality_error(x) == 0.0
    np.testing.assert_array_equal(Tetrad.identity().inverse_metric(x)[0], ETA)
    boost = np.eye(4)
    a = 0.4
    boost[:2, :2] = [[math.cosh(a), math.sinh(a)], [math.sinh(a), math.cosh(a)]]
    assert Tetrad.constant(boost).orthonormality_error(x) < 1e-14
    np.testing.assert_allclose(Tetrad.constant(2 * np.eye(4)).metric(x)[0], ETA / 4)
