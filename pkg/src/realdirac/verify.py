"""Randomized verification suites behind ``realdirac verify``.

A suite is a list of checks. Each random case draws fresh inputs for every
check from one generator and records a residual; fixed checks (table
comparisons, dimension counts) run once per report. A check fails when its
largest residual exceeds its tolerance times ``tolerance_scale``.

Seeding: suite ``k`` of :data:`SUITES` uses
``numpy.random.default_rng(SeedSequence(seed, spawn_key=(k,)))`` (PCG64), so a
suite draws the same cases whether run alone or as part of ``all``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bridge, gauge, rotors
from .clifford import (
    PLANE_SIGNATURE,
    SPACE_SIGNATURE,
    STA_SIGNATURE,
    Multivector,
    Signature,
    basis_blades,
    commutator,
    even_blades,
    inner,
    reverse,
)
from .fields import STA, GaugeField, Tetrad
from .solver import PlaneWaveSpec, gauge_dressed, plane_wave
from .sampling import (
    random_bivector,
    random_em_potential,
    random_even,
    random_gauge_field,
    random_multivector,
    random_points,
    random_polynomial,
    random_rotor,
    random_rotor_field,
    random_spinor_field,
    random_vector,
)

SUITES = ("core", "pauli", "dirac", "gauge")
DEFAULT_COUNT = 100


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    run: Callable[[np.random.Generator], float]
    fixed: bool = False


@dataclass
class CheckResult:
    name: str
    cases: int
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "cases": self.cases,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class RunReport:
    """Outcome of one suite. ``max_residual`` and ``tolerance`` are those of the
    check closest to (or furthest past) its own tolerance."""

    suite: str
    cases: int
    max_residual: float
    tolerance: float
    passed: bool
    wall_time: float
    checks: list[CheckResult] = field(default_factory=list)

    def to_dict(self, include_time: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "cases": self.cases,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }
        if include_time:
            out["wall_time"] = self.wall_time
        return out

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.suite}: {status}  cases={self.cases}  max_residual={self.max_residual:.3e}"
                f"  tolerance={self.tolerance:.1e}  time={self.wall_time:.2f}s")


# -- helpers ----------------------------------------------------------------

def _rel(a: Multivector, b: Multivector, scale: float = 1.0) -> float:
    return (a - b).norm() / max(1.0, scale)


def _random_sig(rng) -> Signature:
    n = int(rng.integers(1, 7))
    p = int(rng.integers(0, n + 1))
    return Signature(p, n - p)


def _quat_mul(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return np.array([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])


def _quat_of(psi: Multivector):
    coeffs = [psi[0]]
    for B in bridge.SPACE_BIVECTORS:
        (mask, c), = B.coeffs.items()
        coeffs.append(-psi[mask] / c)
    return np.array(coeffs)


# -- core -------------------------------------------------------------------

def _associativity(rng):
    worst = 0.0
    for sig in (SPACE_SIGNATURE, STA_SIGNATURE):
        A, B, C = (random_multivector(rng, sig) for _ in range(3))
        worst = max(worst, _rel((A * B) * C, A * (B * C), A.norm() * B.norm() * C.norm()))
    return worst


def _vector_square(rng):
    sig = _random_sig(rng)
    v = random_vector(rng, sig)
    q = sum(sig.square(i) * v[1 << i] ** 2 for i in range(sig.n))
    return _rel(v * v, Multivector.scalar(sig, q), v.norm() ** 2)


def _reverse_anti(rng):
    A, B = random_multivector(rng, STA_SIGNATURE), random_multivector(rng, STA_SIGNATURE)
    return _rel(reverse(A * B), reverse(B) * reverse(A), A.norm() * B.norm())


def _cyclic_scalar(rng):
    A, B = random_multivector(rng, STA_SIGNATURE), random_multivector(rng, STA_SIGNATURE)
    return abs((A * B)[0] - (B * A)[0]) / max(1.0, A.norm() * B.norm())


def _complex_iso(rng):
    a, b = random_even(rng, PLANE_SIGNATURE), random_even(rng, PLANE_SIGNATURE)
    za, zb = complex(a[0], a[3]), complex(b[0], b[3])
    ab = a * b
    return abs(complex(ab[0], ab[3]) - za * zb) / max(1.0, abs(za * zb))


def _quaternion_iso(rng):
    a, b = random_even(rng, SPACE_SIGNATURE), random_even(rng, SPACE_SIGNATURE)
    qa, qb = _quat_of(a), _quat_of(b)
    return float(np.linalg.norm(_quat_of(a * b) - _quat_mul(qa, qb))) / max(1.0, a.norm() * b.norm())


def _rotor_sign(rng):
    U = random_rotor(rng, STA_SIGNATURE)
    X = random_multivector(rng, STA_SIGNATURE)
    return _rel(rotors.lorentz_transform(X, U), rotors.lorentz_transform(X, -U), X.norm())


def _rotation_inner(rng):
    a, b = random_vector(rng, SPACE_SIGNATURE), random_vector(rng, SPACE_SIGNATURE)
    B = random_bivector(rng, SPACE_SIGNATURE)
    a2, b2 = rotors.rotate_vector(a, B), rotors.rotate_vector(b, B)
    return abs(inner(a2, b2) - inner(a, b)) / max(1.0, a.norm() * b.norm())


def _rotor_composition(rng):
    U1, U2 = random_rotor(rng, STA_SIGNATURE), random_rotor(rng, STA_SIGNATURE)
    X = random_multivector(rng, STA_SIGNATURE)
    lhs = rotors.lorentz_transform(rotors.lorentz_transform(X, U1), U2)
    rhs = rotors.lorentz_transform(X, U2 * U1, check=False)
    return _rel(lhs, rhs, X.norm())


def _frame_orthonormal(rng):
    U = random_rotor(rng, STA_SIGNATURE)
    raw = [rotors.lorentz_transform(bridge.gamma(a), U) for a in range(4)]
    frame = [f.grade(1) for f in raw]
    worst = max((f - v).norm() for f, v in zip(raw, frame))
    for a in range(4):
        for b in range(a, 4):
            worst = max(worst, abs(inner(frame[a], frame[b]) - bridge.ETA[a, b]))
    return worst


def _polar_round_trip(rng):
    psi = random_even(rng, STA_SIGNATURE)
    pf = rotors.polar_decompose(psi)
    R = pf.rotor
    unit = (R * reverse(R) - 1.0).norm()
    return max(_rel(pf.reconstruct(), psi, psi.norm()), unit)


def _inverse(rng):
    psi = random_even(rng, STA_SIGNATURE)
    return (psi * rotors.even_inverse(psi) - 1.0).norm()


def _projector(rng):
    psi = random_even(rng, STA_SIGNATURE)
    f = rotors.spacetime_projector(+1)
    g = rotors.spacetime_projector(-1)
    up, down = rotors.idempotent_split(psi, f)
    return max(
        _rel(up + down, psi, psi.norm()),
        _rel(up * f, up, psi.norm()),
        _rel(down * g, down, psi.norm()),
        (up * g).norm() / max(1.0, psi.norm()),
        (f * f - f).norm(),
    )


def _bivector_area(rng):
    a, b = random_vector(rng, SPACE_SIGNATURE), random_vector(rng, SPACE_SIGNATURE)
    B = (a * b - b * a) * 0.5
    area = inner(a, a) * inner(b, b) - inner(a, b) ** 2
    return abs(rotors.bivector_magnitude_sq(B) - area) / max(1.0, area)


def _exp_closed_forms(rng):
    phi = rng.uniform(-3, 3)
    e12 = Multivector.blade(SPACE_SIGNATURE, 0, 1)
    r1 = _rel(rotors.exp(phi * e12), math.cos(phi) + math.sin(phi) * e12)
    alpha = rng.uniform(-2, 2)
    g10 = Multivector.blade(STA_SIGNATURE, 1, 0)
    r2 = _rel(rotors.exp(alpha * g10), math.cosh(alpha) + math.sinh(alpha) * g10, math.cosh(alpha))
    return max(r1, r2)


def _dimensions(_rng):
    bad = 0
    for n in range(1, 9):
        sig = Signature(n // 2, n - n // 2)
        bad += len(basis_blades(sig)) != 2 ** n
        bad += len(even_blades(sig)) != 2 ** (n - 1)
    return float(bad)


CORE = [
    Check("associativity", 1e-13, _associativity),
    Check("vector_square", 1e-14, _vector_square),
    Check("reverse_anti_automorphism", 1e-13, _reverse_anti),
    Check("scalar_part_cyclic", 1e-13, _cyclic_scalar),
    Check("plane_even_is_complex", 1e-14, _complex_iso),
    Check("space_even_is_quaternion", 1e-14, _quaternion_iso),
    Check("rotor_sign_degeneracy", 1e-13, _rotor_sign),
    Check("rotation_preserves_inner", 1e-12, _rotation_inner),
    Check("rotor_composition", 1e-12, _rotor_composition),
    Check("boosted_frame_orthonormal", 1e-12, _frame_orthonormal),
    Check("polar_round_trip", 1e-12, _polar_round_trip),
    Check("even_inverse", 1e-10, _inverse),
    Check("projector_idempotent", 1e-13, _projector),
    Check("bivector_area", 1e-13, _bivector_area),
    Check("exp_closed_forms", 1e-13, _exp_closed_forms),
    Check("dimension_counts", 0.0, _dimensions, fixed=True),
]


# -- pauli ------------------------------------------------------------------

def _pauli_left(rng):
    psi = random_even(rng, SPACE_SIGNATURE)
    return max(bridge.verify_pauli_left(j, psi) for j in (1, 2, 3)) / max(1.0, psi.norm())


def _pauli_right(rng):
    psi = random_even(rng, SPACE_SIGNATURE)
    return max(bridge.verify_pauli_right(k, psi) for k in (1, 2, 3)) / max(1.0, psi.norm())


def _pauli_round_trip(rng):
    psi = random_even(rng, SPACE_SIGNATURE)
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    back = bridge.complex_to_pauli(bridge.pauli_to_complex(psi))
    return max(_rel(back, psi), float(np.linalg.norm(bridge.pauli_to_complex(bridge.complex_to_pauli(z)) - z)))


def _pauli_linear(rng):
    psi, phi = random_even(rng, SPACE_SIGNATURE), random_even(rng, SPACE_SIGNATURE)
    a, b = rng.standard_normal(2)
    lhs = bridge.pauli_to_complex(a * psi + b * phi)
    rhs = a * bridge.pauli_to_complex(psi) + b * bridge.pauli_to_complex(phi)
    return float(np.linalg.norm(lhs - rhs))


def _pauli_inner(rng):
    psi, phi = random_even(rng, SPACE_SIGNATURE), random_even(rng, SPACE_SIGNATURE)
    zs, zp = bridge.pauli_to_complex(psi), bridge.pauli_to_complex(phi)
    return abs(bridge.pauli_inner(psi, phi) - np.vdot(zs, zp))


def _pauli_table(_rng):
    return max(float(np.max(np.abs(m - t))) for m, t in zip(bridge.pauli_matrices(), bridge.PAULI_TABLE))


PAULI = [
    Check("left_bivectors", 1e-13, _pauli_left),
    Check("right_bivectors", 1e-13, _pauli_right),
    Check("round_trip", 1e-13, _pauli_round_trip),
    Check("real_linearity", 1e-13, _pauli_linear),
    Check("scalar_product", 1e-13, _pauli_inner),
    Check("sigma_table", 1e-15, _pauli_table, fixed=True),
]


# -- dirac ------------------------------------------------------------------

def _dirac_gamma(rng):
    psi = random_even(rng, STA_SIGNATURE)
    return max(bridge.verify_gamma(mu, psi) for mu in range(4)) / max(1.0, psi.norm())


def _dirac_left(rng):
    psi = random_even(rng, STA_SIGNATURE)
    return max(bridge.verify_dirac_left(mu, nu, psi)
               for mu in range(4) for nu in range(4) if mu != nu) / max(1.0, psi.norm())


def _dirac_right(rng):
    psi = random_even(rng, STA_SIGNATURE)
    return max(bridge.verify_dirac_right(pair, psi) for pair in bridge.RIGHT_PAIRS) / max(1.0, psi.norm())


def _dirac_round_trip(rng):
    psi = random_even(rng, STA_SIGNATURE)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    back = bridge.complex_to_dirac(bridge.dirac_to_complex(psi))
    return max(_rel(back, psi), float(np.linalg.norm(bridge.dirac_to_complex(bridge.complex_to_dirac(z)) - z)))


def _dirac_linear(rng):
    psi, phi = random_even(rng, STA_SIGNATURE), random_even(rng, STA_SIGNATURE)
    a, b = rng.standard_normal(2)
    lhs = bridge.dirac_to_complex(a * psi + b * phi)
    rhs = a * bridge.dirac_to_complex(psi) + b * bridge.dirac_to_complex(phi)
    return float(np.linalg.norm(lhs - rhs))


def _dirac_current(rng):
    psi = random_even(rng, STA_SIGNATURE)
    J = bridge.dirac_current(psi)
    Jm = bridge.dirac_current_matrix(bridge.dirac_to_complex(psi))
    return float(max(np.max(np.abs(J - Jm.real)), np.max(np.abs(Jm.imag)))) / max(1.0, psi.norm() ** 2)


def _dirac_inner(rng):
    psi, phi = random_even(rng, STA_SIGNATURE), random_even(rng, STA_SIGNATURE)
    zs, zp = bridge.dirac_to_complex(psi), bridge.dirac_to_complex(phi)
    return abs(bridge.dirac_inner(psi, phi) - bridge.dirac_inner_matrix(zs, zp)) / max(1.0, psi.norm() * phi.norm())


def _gamma_table(_rng):
    return max(float(np.max(np.abs(m - t))) for m, t in zip(bridge.gamma_matrices(), bridge.GAMMA_TABLE))


def anticommutator_error(gammas=None) -> float:
    g = bridge.gamma_matrices() if gammas is None else gammas
    worst = 0.0
    for mu in range(4):
        for nu in range(4):
            ac = g[mu] @ g[nu] + g[nu] @ g[mu]
            worst = max(worst, float(np.max(np.abs(ac - 2 * bridge.ETA[mu, nu] * np.eye(4)))))
    return worst


DIRAC = [
    Check("gamma_action", 1e-13, _dirac_gamma),
    Check("left_bivectors", 1e-13, _dirac_left),
    Check("right_bivectors", 1e-13, _dirac_right),
    Check("round_trip", 1e-13, _dirac_round_trip),
    Check("real_linearity", 1e-13, _dirac_linear),
    Check("current_matches_bilinears", 1e-12, _dirac_current),
    Check("scalar_product", 1e-13, _dirac_inner),
    Check("gamma_table", 1e-15, _gamma_table, fixed=True),
    Check("anticommutator", 1e-14, lambda _rng: anticommutator_error(), fixed=True),
]


# -- gauge ------------------------------------------------------------------

PSEUDO = STA.pseudoscalar_mask


def _scale(*arrays) -> float:
    return max([1.0] + [float(np.max(np.abs(a))) for a in arrays])


def _equivalence(rng):
    psi = random_spinor_field(rng)
    x = random_points(rng, 4)
    mass = rng.uniform(0.1, 2.0)
    omega, A = random_gauge_field(rng), random_gauge_field(rng)
    worst = 0.0
    for w, a in ((None, None), (None, gauge.em_embed(random_em_potential(rng))), (omega, A)):
        r = bridge.dirac_to_complex_array(gauge.hestenes_residual(psi, w, a, mass, x))
        m = gauge.matrix_residual(psi, w, a, mass, x)
        worst = max(worst, float(np.max(np.abs(r - m))) / _scale(m))
    return worst


def _invariants(r):
    rr = STA.gp(r, STA.reverse(r))
    return rr[..., 0], rr[..., PSEUDO]


def _covariance(rng):
    psi = random_spinor_field(rng)
    omega, A = random_gauge_field(rng), random_gauge_field(rng)
    U = random_rotor_field(rng)
    x = random_points(rng, 3)
    mass = rng.uniform(0.1, 2.0)
    t = gauge.gauge_transform(U, psi, omega, A, check_points=x)
    r = gauge.hestenes_residual(psi, omega, A, mass, x)
    r2 = gauge.hestenes_residual(t.psi, t.omega, t.A, mass, x, frame=t.frame)
    s1, p1 = _invariants(r)
    s2, p2 = _invariants(r2)
    # the invariants cancel between terms as large as |r'|^2 under strong boosts
    scale = _scale(STA.norm(r) ** 2, STA.norm(r2) ** 2)
    return float(max(np.max(np.abs(s1 - s2)), np.max(np.abs(p1 - p2)))) / scale


def _derivative_covariance(rng):
    psi = random_spinor_field(rng)
    omega, A = random_gauge_field(rng), random_gauge_field(rng)
    U = random_rotor_field(rng)
    x = random_points(rng, 3)
    t = gauge.gauge_transform(U, psi, omega, A, check_points=x)
    D = gauge.covariant_derivatives(psi, omega, A, x)
    D2 = gauge.covariant_derivatives(t.psi, t.omega, t.A, x)
    u = U.value(x)[..., None, :]
    expected = STA.product(u, D, STA.reverse(u))
    return float(np.max(np.abs(D2 - expected))) / _scale(expected)


def _identical_transformation(rng):
    psi = random_spinor_field(rng)
    B = random_gauge_field(rng)
    U = random_rotor_field(rng)
    x = random_points(rng, 3)
    t = gauge.gauge_transform(U, psi, B, B, check_points=x)
    return float(np.max(np.abs(t.omega.value(x) - t.A.value(x))))


def _curvature(rng):
    psi = random_spinor_field(rng, polynomial_only=True)
    omega = random_gauge_field(rng, polynomial_only=True)
    A = random_gauge_field(rng, polynomial_only=True)
    x = random_points(rng, 3)
    scale = _scale(psi.value(x))
    return max(gauge.commutator_check(psi, omega, A, mu, nu, x)
               for mu in range(4) for nu in range(mu + 1, 4)) / scale


def _em_strength(rng):
    pot = random_em_potential(rng)
    charge = rng.uniform(0.5, 2.0)
    x = random_points(rng, 4)
    F = gauge.field_strength(gauge.em_embed(pot, charge)).value(x)
    Fem = gauge.em_strength(pot, x)
    expected = charge * Fem[..., None] * gauge.G21
    return float(np.max(np.abs(F - expected))) / _scale(expected)


def _strength_antisymmetric(rng):
    A = random_gauge_field(rng)
    x = random_points(rng, 3)
    F = gauge.field_strength(A).value(x)
    return float(np.max(np.abs(F + np.swapaxes(F, -2, -3))))


def _bivector_closure(rng):
    B1, B2 = random_bivector(rng, STA_SIGNATURE), random_bivector(rng, STA_SIGNATURE)
    C = commutator(B1, B2)
    return (C - C.grade(2)).norm()


def _flat_reduction(rng):
    psi = random_spinor_field(rng)
    A = random_gauge_field(rng)
    x = random_points(rng, 3)
    r1 = gauge.hestenes_residual(psi, None, A, 1.0, x)
    r2 = gauge.hestenes_residual(psi, GaugeField.zero(), A, 1.0, x, tetrad=Tetrad.identity())
    return float(np.max(np.abs(r1 - r2)))


def _current_balance(rng):
    # off shell the two sides differ by -2 <r gamma_2 gamma_1 ~Psi>
    psi = random_spinor_field(rng)
    A = random_gauge_field(rng)
    x = random_points(rng, 3)
    mass = rng.uniform(0.1, 2.0)
    bal = gauge.current_divergence_identity(psi, A, mass, x)
    r = gauge.hestenes_residual(psi, None, A, mass, x)
    defect = -2.0 * STA.product(r, gauge.G21, STA.reverse(psi.value(x)))[..., 0]
    return float(np.max(np.abs(bal.lhs - bal.rhs - defect))) / _scale(bal.lhs, bal.rhs)


def _extract_round_trip(rng):
    mass = rng.uniform(0.5, 2.0)
    charge = rng.uniform(0.5, 2.0)
    spec = PlaneWaveSpec.on_shell(rng.standard_normal(3), mass, int(rng.integers(1, 3)),
                                  int(rng.choice([-1, 1])))
    chi = random_polynomial(rng, 2, 0.3)
    psi = gauge_dressed(plane_wave(spec, mass), chi, charge)
    x = random_points(rng, 4)
    A = gauge.extract_potential(psi, mass, charge, x)
    return float(np.max(np.abs(A - chi.grad(x))))


GAUGE = [
    Check("real_matches_matrix_residual", 1e-12, _equivalence),
    Check("residual_invariants_covariant", 1e-9, _covariance),
    Check("derivative_covariant", 1e-10, _derivative_covariance),
    Check("omega_and_A_transform_alike", 1e-12, _identical_transformation),
    Check("curvature_commutator", 1e-10, _curvature),
    Check("em_strength", 1e-12, _em_strength),
    Check("strength_antisymmetric", 0.0, _strength_antisymmetric),
    Check("bivector_commutator_closed", 1e-13, _bivector_closure),
    Check("flat_reduction", 0.0, _flat_reduction),
    Check("current_balance", 1e-11, _current_balance),
    Check("extract_round_trip", 1e-8, _extract_round_trip),
]

CHECKS = {"core": CORE, "pauli": PAULI, "dirac": DIRAC, "gauge": GAUGE}


def suite_rng(seed: int, suite: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SUITES.index(suite),)))


def run_suite(suite: str, seed: int = 0, count: int = DEFAULT_COUNT,
              tolerance_scale: float = 1.0) -> RunReport:
    if suite not in CHECKS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if count < 0:
        raise ValueError("count must be non-negative")
    if tolerance_scale <= 0:
        raise ValueError("tolerance scale must be positive")
    start = time.perf_counter()
    rng = suite_rng(seed, suite)
    checks = CHECKS[suite]
    worst = {c.name: 0.0 for c in checks}
    runs = {c.name: 0 for c in checks}
    for case in range(count):
        for c in checks:
            if c.fixed and case > 0:
                continue
            worst[c.name] = max(worst[c.name], float(c.run(rng)))
            runs[c.name] += 1
    results = [CheckResult(c.name, runs[c.name], worst[c.name], c.tolerance * tolerance_scale)
               for c in checks]
    ran = [r for r in results if r.cases]
    if ran:
        key = max(ran, key=lambda r: (not r.passed, r.max_residual / r.tolerance if r.tolerance else
                                      (math.inf if r.max_residual else 0.0)))
        max_res, tol = key.max_residual, key.tolerance
    else:
        max_res, tol = 0.0, min(r.tolerance for r in results)
    passed = all(r.passed for r in results)
    return RunReport(suite, count, max_res, tol, passed, time.perf_counter() - start, results)


def run(suite: str, seed: int = 0, count: int = DEFAULT_COUNT, tolerance_scale: float = 1.0) -> list[RunReport]:
    names = SUITES if suite == "all" else (suite,)
    return [run_suite(s, seed, count, tolerance_scale) for s in names]
