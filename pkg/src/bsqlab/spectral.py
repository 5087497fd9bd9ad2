"""Spectral kernels, phase functions, saddle points and region bookkeeping."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

OMEGA = cmath.exp(2j * math.pi / 3)
SQRT3 = math.sqrt(3.0)
SIXTH_ROOTS = tuple(cmath.exp(1j * math.pi * j / 3) for j in range(6))


class SpectralDomainError(ValueError):
    """Raised when a spectral point lies where a kernel is undefined."""


class SectorError(ValueError):
    """Raised for ray slopes outside the right-moving sector."""


@dataclass(frozen=True)
class PhaseTriple:
    l: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class PhaseValue:
    phi: complex
    theta: complex | None = None


@dataclass(frozen=True)
class SaddleSet:
    zeta: float
    k1: complex
    k2: complex
    k3: float
    k4: float
    z_star: complex


def _check_nonzero(k) -> None:
    if np.any(np.asarray(k) == 0):
        raise SpectralDomainError("k = 0 is a pole of the spectral kernels")


def l_values(k):
    """Return l_1, l_2, l_3 stacked along the last axis."""
    _check_nonzero(k)
    k = np.asarray(k, dtype=complex)
    w = np.stack([OMEGA * k, OMEGA**2 * k, k], axis=-1)
    return 1j * (w + 1.0 / w) / (2 * SQRT3)


def z_values(k):
    """Return z_1, z_2, z_3 stacked along the last axis."""
    _check_nonzero(k)
    k = np.asarray(k, dtype=complex)
    w = np.stack([OMEGA * k, OMEGA**2 * k, k], axis=-1)
    return 1j * (w**2 + w**-2) / (4 * SQRT3)


def lz_eval(k: complex) -> PhaseTriple:
    return PhaseTriple(l=l_values(k), z=z_values(k))


def _pair(i: int, j: int) -> tuple[int, int]:
    if not (1 <= j < i <= 3):
        raise ValueError(f"invalid index pair ({i}, {j}); need 1 <= j < i <= 3")
    return i - 1, j - 1


def phi(i: int, j: int, zeta, k):
    """Phase function Phi_ij(zeta, k); vectorised over k."""
    a, b = _pair(i, j)
    lv, zv = l_values(k), z_values(k)
    return (lv[..., a] - lv[..., b]) * zeta + (zv[..., a] - zv[..., b])


def theta(i: int, j: int, x, t, k):
    """x(l_i - l_j) + t(z_i - z_j)."""
    a, b = _pair(i, j)
    lv, zv = l_values(k), z_values(k)
    return x * (lv[..., a] - lv[..., b]) + t * (zv[..., a] - zv[..., b])


def phase(i: int, j: int, zeta: float, k: complex, x=None, t=None) -> PhaseValue:
    th = None if x is None or t is None else complex(theta(i, j, x, t, k))
    return PhaseValue(phi=complex(phi(i, j, zeta, k)), theta=th)


def saddle_points(zeta: float) -> SaddleSet:
    """Closed-form stationary points of Phi_21 for zeta > 1."""
    if not zeta > 1:
        raise SectorError(f"zeta = {zeta} is outside the sector zeta > 1")
    root = math.sqrt(8 + zeta**2)
    k1 = 0.25 * complex(zeta - root, math.sqrt(2) * math.sqrt(4 - zeta**2 + zeta * root))
    k3 = 0.25 * (zeta + root + math.sqrt(2) * math.sqrt(-4 + zeta**2 + zeta * root))
    curvature = second_order_coefficient(zeta, k1)
    z_star = math.sqrt(2) * cmath.exp(0.25j * math.pi) * cmath.sqrt(curvature)
    if (-1j * k1 * z_star).real <= 0:
        z_star = -z_star
    return SaddleSet(zeta=zeta, k1=k1, k2=k1.conjugate(), k3=k3, k4=1 / k3, z_star=z_star)


def second_order_coefficient(zeta: float, k1: complex) -> complex:
    """Half the second k-derivative of Phi_21 at the saddle k1."""
    return (4 - 3 * k1 * zeta - k1**3 * zeta) / (4 * k1**4)


def in_d2(k: complex) -> bool:
    """Membership in the open set D_2: two opposite sectors split by the unit circle."""
    if k == 0:
        return False
    r, a = abs(k), cmath.phase(k)
    if r > 1:
        return -math.pi / 6 < a < math.pi / 6
    if r < 1:
        return abs(a) > 5 * math.pi / 6
    return False


def classify_region(k: complex) -> str:
    k = complex(k)
    if k.imag == 0:
        x = k.real
        return "D2_real" if (-1 < x < 0 or x > 1) else "other"
    if not in_d2(k):
        return "other"
    outside = abs(k) > 1
    if (outside and k.imag > 0) or (not outside and k.imag < 0):
        return "D_reg"
    return "D_sing"


def symmetry_orbit(k0: complex, tol: float = 1e-12) -> list[complex]:
    """Orbit of k0 under rotation by omega, conjugation and inversion."""
    _check_nonzero(k0)
    out: list[complex] = []
    for base in (complex(k0), complex(k0).conjugate()):
        for b in (base, 1 / base):
            for j in range(3):
                p = OMEGA**j * b
                if all(abs(p - q) > tol * max(1.0, abs(p)) for q in out):
                    out.append(p)
    return out


def near_sixth_root(k: complex, radius: float = 1e-2) -> bool:
    return any(abs(k - kappa) < radius for kappa in SIXTH_ROOTS)


def r_tilde(k):
    k = np.asarray(k, dtype=complex)
    return (OMEGA**2 - k**2) / (1 - OMEGA**2 * k**2)
