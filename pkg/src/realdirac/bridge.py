"""Correspondence between real spinors and complex column spinors.

Space: even elements of Cl(3) <-> C^2 (Pauli spinors).
Spacetime: even elements of Cl(1,3) <-> C^4 (Dirac spinors, standard Dirac
representation).

The complex unit ``i`` of the column picture is right multiplication by
``B3 = e1e2`` in space and by ``gamma_2 gamma_1`` in spacetime. Both maps are
real-linear and are stored as fixed real matrices built once from basis
blades.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .clifford import (
    SPACE_SIGNATURE,
    STA_SIGNATURE,
    Multivector,
    algebra,
    even_blades,
    is_even,
    reverse,
)

STA = algebra(1, 3)
SPACE = algebra(3, 0)

ETA = np.diag([1.0, -1.0, -1.0, -1.0])

# Basis bivectors of space.
B1 = Multivector.blade(SPACE_SIGNATURE, 1, 2)
B2 = Multivector.blade(SPACE_SIGNATURE, 2, 0)
B3 = Multivector.blade(SPACE_SIGNATURE, 0, 1)
SPACE_BIVECTORS = (B1, B2, B3)

# Displayed matrices, written out entry by entry.
PAULI_TABLE = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
GAMMA_TABLE = (
    np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]], dtype=complex),
    np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=complex),
    np.array([[0, 0, 0, 1j], [0, 0, -1j, 0], [0, -1j, 0, 0], [1j, 0, 0, 0]], dtype=complex),
    np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=complex),
)


def gamma(mu: int) -> Multivector:
    return Multivector.basis_vector(STA_SIGNATURE, mu)


def gamma_up(mu: int) -> Multivector:
    return ETA[mu, mu] * gamma(mu)


G21 = Multivector.blade(STA_SIGNATURE, 2, 1)
DIRAC_PREFACTORS = (
    Multivector.scalar(STA_SIGNATURE),
    Multivector.blade(STA_SIGNATURE, 1, 3),
    Multivector.blade(STA_SIGNATURE, 3, 0),
    Multivector.blade(STA_SIGNATURE, 1, 0),
)
PAULI_PREFACTORS = (Multivector.scalar(SPACE_SIGNATURE), B2)


class BridgeError(ValueError):
    pass


@dataclass(frozen=True)
class _Bridge:
    masks: np.ndarray        # even blade masks, in column order
    forward: np.ndarray      # complex (k, 2k): even coefficients -> C^k
    inverse: np.ndarray      # real (2k, 2k): [Re z, Im z] -> even coefficients
    dim: int                 # blade count of the full algebra


def _build(prefactors, unit, sig) -> _Bridge:
    masks = np.array(even_blades(sig))
    fwd = np.zeros((len(prefactors), len(masks)), dtype=complex)
    for col, m in enumerate(masks):
        E = Multivector(sig, {int(m): 1.0})
        for row, P in enumerate(prefactors):
            PE = P * E
            fwd[row, col] = (PE)[0] - 1j * (PE * unit)[0]
    real = np.vstack([fwd.real, fwd.imag])
    inv = np.linalg.inv(real)
    return _Bridge(masks, fwd, inv, sig.dim)


@lru_cache(maxsize=None)
def _dirac() -> _Bridge:
    return _build(DIRAC_PREFACTORS, G21, STA_SIGNATURE)


@lru_cache(maxsize=None)
def _pauli() -> _Bridge:
    return _build(PAULI_PREFACTORS, B3, SPACE_SIGNATURE)


def _to_complex(br: _Bridge, arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    return arr[..., br.masks] @ br.forward.T


def _from_complex(br: _Bridge, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    stacked = np.concatenate([z.real, z.imag], axis=-1)
    even = stacked @ br.inverse.T
    out = np.zeros(z.shape[:-1] + (br.dim,))
    out[..., br.masks] = even
    return out


# -- array forms (batched over leading axes) --------------------------------

def dirac_to_complex_array(arr) -> np.ndarray:
    """(..., 16) spacetime coefficients -> (..., 4) complex; odd grades ignored."""
    return _to_complex(_dirac(), arr)


def complex_to_dirac_array(z) -> np.ndarray:
    return _from_complex(_dirac(), z)


def pauli_to_complex_array(arr) -> np.ndarray:
    return _to_complex(_pauli(), arr)


def complex_to_pauli_array(z) -> np.ndarray:
    return _from_complex(_pauli(), z)


# -- multivector forms --------------------------------------------------------

def _require(psi: Multivector, sig, what: str):
    if psi.sig != sig:
        raise BridgeError(f"{what} spinor must live in {sig}, got {psi.sig}")
    if not is_even(psi):
        raise BridgeError(f"{what} spinor must be even")


def pauli_to_complex(psi: Multivector) -> np.ndarray:
    _require(psi, SPACE_SIGNATURE, "Pauli")
    return pauli_to_complex_array(psi.to_array())


def complex_to_pauli(z) -> Multivector:
    z = np.asarray(z, dtype=complex)
    if z.shape != (2,):
        raise BridgeError("expected a 2-component complex vector")
    return Multivector.from_array(SPACE_SIGNATURE, complex_to_pauli_array(z))


def dirac_to_complex(psi: Multivector) -> np.ndarray:
    _require(psi, STA_SIGNATURE, "Dirac")
    return dirac_to_complex_array(psi.to_array())


def complex_to_dirac(z) -> Multivector:
    z = np.asarray(z, dtype=complex)
    if z.shape != (4,):
        raise BridgeError("expected a 4-component complex vector")
    return Multivector.from_array(STA_SIGNATURE, complex_to_dirac_array(z))


def _image_matrix(op, to_c, from_c, k) -> np.ndarray:
    """Complex matrix of a complex-linear map, read off from images of the unit columns."""
    cols = []
    for j in range(k):
        e = np.zeros(k, dtype=complex)
        e[j] = 1.0
        cols.append(to_c(op(from_c(e))))
    return np.array(cols).T


@lru_cache(maxsize=None)
def pauli_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pauli matrices recovered from left multiplication: ``|B_j psi> = i sigma_j |psi>``."""
    out = []
    for Bj in SPACE_BIVECTORS:
        M = _image_matrix(lambda s, Bj=Bj: Bj * s, pauli_to_complex, complex_to_pauli, 2)
        out.append(-1j * M)
    return tuple(out)


@lru_cache(maxsize=None)
def gamma_matrices() -> tuple[np.ndarray, ...]:
    """Matrices of ``Psi -> gamma_mu Psi gamma_0`` on C^4, for mu = 0..3."""
    g0 = gamma(0)
    return tuple(
        _image_matrix(lambda s, mu=mu: gamma(mu) * s * g0, dirac_to_complex, complex_to_dirac, 4)
        for mu in range(4)
    )


def gamma5(gammas=None) -> np.ndarray:
    """``i * gamma^0 gamma^1 gamma^2 gamma^3`` (upper indices)."""
    g = gamma_matrices() if gammas is None else gammas
    up = [ETA[mu, mu] * g[mu] for mu in range(4)]
    return 1j * up[0] @ up[1] @ up[2] @ up[3]


def gamma_up_matrices(gammas=None) -> tuple[np.ndarray, ...]:
    g = gamma_matrices() if gammas is None else gammas
    return tuple(ETA[mu, mu] * g[mu] for mu in range(4))


# -- relations between the two pictures -------------------------------------

def _resid(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def verify_pauli_left(j: int, psi: Multivector) -> float:
    """``|| |B_j psi> - i sigma_j |psi> ||`` for j in 1..3."""
    lhs = pauli_to_complex(SPACE_BIVECTORS[j - 1] * psi)
    rhs = 1j * PAULI_TABLE[j - 1] @ pauli_to_complex(psi)
    return _resid(lhs, rhs)


def verify_pauli_right(k: int, psi: Multivector) -> float:
    """Residual of the right-multiplication rule for ``psi B_k``, k in 1..3."""
    z = pauli_to_complex(psi)
    lhs = pauli_to_complex(psi * SPACE_BIVECTORS[k - 1])
    s2 = PAULI_TABLE[1]
    if k == 1:
        rhs = s2 @ z.conj()
    elif k == 2:
        rhs = 1j * s2 @ z.conj()
    elif k == 3:
        rhs = 1j * z
    else:
        raise ValueError(k)
    return _resid(lhs, rhs)


def verify_gamma(mu: int, psi: Multivector) -> float:
    """``|| |gamma_mu Psi gamma_0> - gamma_mu^ |Psi> ||`` against the displayed table."""
    lhs = dirac_to_complex(gamma(mu) * psi * gamma(0))
    return _resid(lhs, GAMMA_TABLE[mu] @ dirac_to_complex(psi))


def verify_dirac_left(mu: int, nu: int, psi: Multivector) -> float:
    lhs = dirac_to_complex(gamma(mu) * gamma(nu) * psi)
    rhs = GAMMA_TABLE[mu] @ GAMMA_TABLE[nu] @ dirac_to_complex(psi)
    return _resid(lhs, rhs)


RIGHT_PAIRS = ((1, 0), (2, 0), (3, 0), (3, 2), (1, 3), (2, 1))


def right_bivector_action(a: int, b: int, z) -> np.ndarray:
    """Image of ``|Psi gamma_a gamma_b>`` computed on the column side alone.

    Uses the displayed table and ``gamma_5``; antilinear pairs act through
    complex conjugation. Works on batched ``(..., 4)`` input.
    """
    z = np.asarray(z, dtype=complex)
    if a == b:
        return ETA[a, a] * z
    sign = 1.0
    if (a, b) not in RIGHT_PAIRS:
        a, b = b, a
        sign = -1.0
    g2 = GAMMA_TABLE[2]
    g5 = _gamma5_table()
    if (a, b) == (1, 0):
        w = (-1j * g2 @ z.conj()[..., None])[..., 0]
    elif (a, b) == (2, 0):
        w = (g2 @ z.conj()[..., None])[..., 0]
    elif (a, b) == (3, 0):
        w = (g5 @ z[..., None])[..., 0]
    elif (a, b) == (3, 2):
        w = (-(g2 @ g5) @ z.conj()[..., None])[..., 0]
    elif (a, b) == (1, 3):
        w = (-1j * (g2 @ g5) @ z.conj()[..., None])[..., 0]
    else:  # (2, 1)
        w = 1j * z
    return sign * w


@lru_cache(maxsize=None)
def _gamma5_table() -> np.ndarray:
    return gamma5(GAMMA_TABLE)


def verify_dirac_right(pair: tuple[int, int], psi: Multivector) -> float:
    a, b = pair
    lhs = dirac_to_complex(psi * gamma(a) * gamma(b))
    return _resid(lhs, right_bivector_action(a, b, dirac_to_complex(psi)))


def pauli_inner(psi: Multivector, phi: Multivector) -> complex:
    """``<reverse(psi) phi (1 - i B3)>``."""
    _require(psi, SPACE_SIGNATURE, "Pauli")
    _require(phi, SPACE_SIGNATURE, "Pauli")
    q = reverse(psi) * phi
    return complex(q[0], -(q * B3)[0])


def dirac_inner(psi: Multivector, phi: Multivector) -> complex:
    """``<reverse(Psi) Phi (1 - i gamma_2 gamma_1)>``, the Dirac-adjoint product."""
    _require(psi, STA_SIGNATURE, "Dirac")
    _require(phi, STA_SIGNATURE, "Dirac")
    q = reverse(psi) * phi
    return complex(q[0], -(q * G21)[0])


def dirac_inner_matrix(u, v) -> complex:
    """Column-side ``<u| gamma_0 |v>``."""
    return complex(np.conj(u) @ GAMMA_TABLE[0] @ v)


def dirac_current(psi: Multivector, atol: float = 1e-13) -> np.ndarray:
    """Upper components ``J^a = gamma^a . (Psi gamma_0 reverse(Psi))``."""
    _require(psi, STA_SIGNATURE, "Dirac")
    J = psi * gamma(0) * reverse(psi)
    stray = (J - J.grade(1)).norm()
    if stray > atol * max(1.0, J.norm()):
        raise BridgeError(f"current has non-vector part of size {stray:.3g}")
    return np.array([(gamma_up(a) * J)[0] for a in range(4)])


def dirac_current_matrix(z) -> np.ndarray:
    """``<Psi-bar| gamma^a |Psi>`` on the column side; real up to round-off."""
    z = np.asarray(z, dtype=complex)
    g0 = GAMMA_TABLE[0]
    vals = [np.conj(z) @ g0 @ (ETA[a, a] * GAMMA_TABLE[a]) @ z for a in range(4)]
    return np.array(vals)


def induced_product(u, v) -> np.ndarray:
    """``|Psi> o |Phi> = |Psi Phi>``."""
    return dirac_to_complex(complex_to_dirac(u) * complex_to_dirac(v))


@dataclass(frozen=True)
class BilinearReport:
    inner: complex
    dirac_inner: complex
    current: np.ndarray


def bilinears(psi: Multivector) -> BilinearReport:
    z = dirac_to_complex(psi)
    return BilinearReport(
        inner=complex(np.vdot(z, z)),
        dirac_inner=dirac_inner(psi, psi),
        current=dirac_current(psi),
    )
