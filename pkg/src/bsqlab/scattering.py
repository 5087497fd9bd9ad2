"""Direct scattering: eigenfunctions, scattering matrices, reflection data, zeros, residues."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .spectral import OMEGA, SIXTH_ROOTS, SQRT3, l_values, near_sixth_root, r_tilde
from .soliton import one_soliton_parameters

EXCLUSION_RADIUS = 1e-2
Sampler = Callable[[np.ndarray], np.ndarray]


class SingularVandermondeError(ValueError):
    pass


class AccuracyError(ArithmeticError):
    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class SpectralSingularityError(ArithmeticError):
    pass


class MultipleZeroError(ArithmeticError):
    pass


class ZeroSearchError(ArithmeticError):
    pass


class DegenerateZeroError(ArithmeticError):
    pass


class DefinitionMismatchError(ArithmeticError):
    pass


class NodePlacementError(ValueError):
    pass


# ---------------------------------------------------------------- initial data


@dataclass
class InitialData:
    """Compactly supported data given through u0, its x-derivative and v0 = int_{-inf}^x u1."""

    u0: Sampler
    u0x: Sampler
    v0: Sampler
    support_radius: float
    u1: Sampler | None = None
    label: str = "custom"
    truncation_error: float = 0.0

    def coefficients(self, x):
        """Entries of the single nonzero row of the undressed generator at x."""
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= self.support_radius
        a = np.where(inside, -self.u0x(x) / 4 - 1j * self.v0(x) / (4 * SQRT3), 0)
        b = np.where(inside, -self.u0(x) / 2, 0)
        return a, b

    @property
    def is_zero(self) -> bool:
        xs = np.linspace(-self.support_radius, self.support_radius, 257)
        a, b = self.coefficients(xs)
        return not (np.any(a) or np.any(b))

    def mass_of_u1(self) -> float:
        return float(self.v0(np.array([self.support_radius]))[0])


def zero_data(support_radius: float = 1.0) -> InitialData:
    z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return InitialData(z, z, z, support_radius, u1=z, label="zero")


def _window(support_radius: float, taper: float):
    """C-infinity cutoff equal to 1 on |x| <= R - taper and 0 for |x| >= R, with derivative."""

    def bump(s):
        s = np.clip(s, 0.0, 1.0)
        out = np.zeros_like(s)
        inner = (s > 0) & (s < 1)
        si = s[inner]
        f1 = np.exp(-1 / si)
        f2 = np.exp(-1 / (1 - si))
        out[inner] = f1 / (f1 + f2)
        out[s >= 1] = 1.0
        return out

    def dbump(s):
        out = np.zeros_like(s)
        inner = (s > 0) & (s < 1)
        si = s[inner]
        f1 = np.exp(-1 / si)
        f2 = np.exp(-1 / (1 - si))
        df1 = f1 / si**2
        df2 = f2 / (1 - si) ** 2
        out[inner] = (df1 * (f1 + f2) - f1 * (df1 - df2)) / (f1 + f2) ** 2
        return out

    def w(x):
        x = np.asarray(x, dtype=float)
        s = (support_radius - np.abs(x)) / taper
        return bump(s)

    def dw(x):
        x = np.asarray(x, dtype=float)
        s = (support_radius - np.abs(x)) / taper
        return -np.sign(x) * dbump(s) / taper

    return w, dw


def gaussian_data(amplitude: float, width: float = 1.0, center: float = 0.0,
                  u1_amplitude: float = 0.0, support_radius: float = 10.0) -> InitialData:
    """u0 = a exp(-((x-x0)/w)^2) and u1 = b d/dx exp(-((x-x0)/w)^2), so v0 = b exp(...)."""
    g = lambda x: np.exp(-(((np.asarray(x, float) - center) / width) ** 2))
    dg = lambda x: -2 * (np.asarray(x, float) - center) / width**2 * g(x)
    tail = float(max(g(support_radius), g(-support_radius)))
    return InitialData(
        u0=lambda x: amplitude * g(x),
        u0x=lambda x: amplitude * dg(x),
        v0=lambda x: u1_amplitude * g(x),
        u1=lambda x: u1_amplitude * dg(x),
        support_radius=support_radius,
        label="gaussian",
        truncation_error=abs(amplitude) * tail,
    )


def seeded_soliton_data(k: float, c: complex, support_radius: float = 30.0,
                        taper: float = 5.0) -> InitialData:
    """One-soliton profile at t = 0 with velocity-consistent u1, smoothly cut off at the support edge."""
    p = one_soliton_parameters(k, c)
    kappa = p.inverse_width
    w, dw = _window(support_radius, taper)
    prof = lambda x: p.amplitude / np.cosh(kappa * (np.asarray(x, float) - p.x0)) ** 2
    dprof = lambda x: -2 * kappa * np.tanh(kappa * (np.asarray(x, float) - p.x0)) * prof(x)
    edge = np.array([-support_radius + taper, support_radius - taper])
    return InitialData(
        u0=lambda x: w(x) * prof(x),
        u0x=lambda x: dw(x) * prof(x) + w(x) * dprof(x),
        v0=lambda x: -p.velocity * w(x) * prof(x),
        u1=lambda x: -p.velocity * (dw(x) * prof(x) + w(x) * dprof(x)),
        support_radius=support_radius,
        label="seeded_soliton",
        truncation_error=float(prof(edge).max()),
    )


def tabulated_data(x, u0, u1, support_radius: float | None = None) -> InitialData:
    x = np.asarray(x, float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("tabulated x must be strictly increasing")
    s0 = CubicSpline(x, u0)
    v = CubicSpline(x, u1).antiderivative()
    ds0 = s0.derivative()
    lo, hi = x[0], x[-1]

    def clip(f):
        return lambda q: np.where((np.asarray(q) >= lo) & (np.asarray(q) <= hi), f(np.clip(q, lo, hi)), 0.0)

    radius = support_radius if support_radius is not None else float(max(abs(lo), abs(hi)))
    return InitialData(
        u0=clip(s0), u0x=clip(ds0), v0=clip(v), u1=clip(CubicSpline(x, u1)),
        support_radius=radius, label="tabulated",
    )


def read_tabulated_csv(path: str, support_radius: float | None = None) -> InitialData:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    x = [float(r["x"]) for r in rows]
    return tabulated_data(x, [float(r["u0"]) for r in rows], [float(r["u1"]) for r in rows], support_radius)


# ---------------------------------------------------------------- generator


def vandermonde(k):
    lv = l_values(k)
    return np.stack([np.ones_like(lv), lv, lv**2], axis=-2)


def _check_admissible(k) -> None:
    for kk in np.atleast_1d(k):
        if kk == 0 or any(abs(kk - q) < 1e-14 for q in SIXTH_ROOTS):
            raise SingularVandermondeError(f"P(k) is singular at k = {kk}")


def _factors(k):
    """Column P^{-1} e_3 and the two rows of P entering the rank-one generator."""
    _check_admissible(k)
    P = vandermonde(k)
    p = np.linalg.inv(P)[..., :, 2]
    return p, P[..., 0, :], P[..., 1, :]


def build_generator(x: float, k: complex, data: InitialData) -> np.ndarray:
    p, row0, row1 = _factors(np.complex128(k))
    a, b = data.coefficients(np.array([x]))
    q = a[0] * row0 + b[0] * row1
    return np.outer(p, q)


# ---------------------------------------------------------------- transfer solves


@dataclass
class _Batch:
    ks: np.ndarray
    lv: np.ndarray
    p: np.ndarray
    r0: np.ndarray
    r1: np.ndarray


def _batch(ks) -> _Batch:
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    p, r0, r1 = _factors(ks)
    return _Batch(ks, l_values(ks), p, r0, r1)


def _rhs(data: InitialData, bt: _Batch, adjoint: bool):
    n = len(bt.ks)

    def f(x, y):
        a, b = data.coefficients(np.array([x]))
        q = a[0] * bt.r0 + b[0] * bt.r1
        mu = y.reshape(n, 3, 3)
        if adjoint:
            e = np.exp(x * bt.lv)
            left, right = q * e, bt.p / e
            return (-left[:, :, None] * np.einsum("nj,njk->nk", right, mu)[:, None, :]).ravel()
        e = np.exp(x * bt.lv)
        left, right = bt.p / e, q * e
        return (left[:, :, None] * np.einsum("nj,njk->nk", right, mu)[:, None, :]).ravel()

    return f


RTOL = 1e-12
ATOL = 1e-13


def _integrate(data, bt, adjoint, x_from, x_to, dense=False, rtol=RTOL, atol=ATOL):
    n = len(bt.ks)
    y0 = np.tile(np.eye(3, dtype=complex), (n, 1, 1)).ravel()
    sol = solve_ivp(_rhs(data, bt, adjoint), (x_from, x_to), y0, method="DOP853",
                    rtol=rtol, atol=atol, dense_output=dense)
    if not sol.success:
        raise AccuracyError(f"eigenfunction integration failed: {sol.message}")
    return sol


@dataclass
class ScatteringMatrices:
    k: complex
    s: np.ndarray
    sA: np.ndarray


def _lax_constant(ks):
    """l_1 l_2 l_3, the constant term of the characteristic polynomial of diag(l)."""
    return -1j * (ks**3 + ks**-3) / (24 * SQRT3)


def _undressed_transfer(data: InitialData, ks, rtol: float = RTOL):
    """Transfer matrix of psi' = (C + N) psi from +R to -R, C the companion matrix of diag(l)."""
    n = len(ks)
    e3 = _lax_constant(ks)

    def f(x, y):
        a, b = data.coefficients(np.array([x]))
        psi = y.reshape(n, 3, 3)
        out = np.empty_like(psi)
        out[:, 0] = psi[:, 1]
        out[:, 1] = psi[:, 2]
        out[:, 2] = (e3 + a[0])[:, None] * psi[:, 0] + (b[0] - 0.25) * psi[:, 1]
        return out.ravel()

    R = data.support_radius
    y0 = np.tile(np.eye(3, dtype=complex), (n, 1, 1)).ravel()
    sol = solve_ivp(f, (R, -R), y0, method="DOP853", rtol=rtol, atol=ATOL)
    if not sol.success:
        raise AccuracyError(f"transfer integration failed: {sol.message}")
    return sol.y[:, -1].reshape(n, 3, 3)


def _circle_scattering(data: InitialData, ks, rtol: float):
    """s = e^{RL} P^{-1} T P e^{RL} and s^A = e^{-RL} P^T T^{-T} P^{-T} e^{-RL}."""
    R = data.support_radius
    T = _undressed_transfer(data, ks, rtol)
    P = vandermonde(ks)
    e = np.exp(R * l_values(ks))
    core = np.linalg.solve(P, T @ P)
    s = e[:, :, None] * core * e[:, None, :]
    TA = np.swapaxes(np.linalg.inv(T), -1, -2)
    PT = np.swapaxes(P, -1, -2)
    coreA = PT @ np.swapaxes(np.linalg.solve(P, np.swapaxes(TA, -1, -2)), -1, -2)
    sA = coreA / e[:, :, None] / e[:, None, :]
    return s, sA


def scattering_batch(data: InitialData, ks, rtol: float = RTOL, method: str = "auto"):
    """s(k) and s^A(k) for an array of k.

    Points on the unit circle use the undressed transfer matrix, which stays regular at
    k = +-1; other points integrate the conjugated eigenfunction equations.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    n = len(ks)
    _check_admissible(ks)
    if data.is_zero:
        eye = np.tile(np.eye(3, dtype=complex), (n, 1, 1))
        return eye, eye.copy()
    s = np.empty((n, 3, 3), complex)
    sA = np.empty((n, 3, 3), complex)
    if method == "auto":
        circ = np.abs(np.abs(ks) - 1) <= 1e-12
    else:
        circ = np.full(n, method == "transfer")
    if circ.any():
        s[circ], sA[circ] = _circle_scattering(data, ks[circ], rtol)
    if (~circ).any():
        bt = _batch(ks[~circ])
        m = len(bt.ks)
        R = data.support_radius
        s[~circ] = _integrate(data, bt, False, R, -R, rtol=rtol).y[:, -1].reshape(m, 3, 3)
        sA[~circ] = _integrate(data, bt, True, R, -R, rtol=rtol).y[:, -1].reshape(m, 3, 3)
    return s, sA


def scattering_matrices(data: InitialData, k: complex) -> ScatteringMatrices:
    s, sA = scattering_batch(data, [k])
    return ScatteringMatrices(complex(k), s[0], sA[0])


def s11_batch(data: InitialData, ks) -> np.ndarray:
    bt = _batch(ks)
    if data.is_zero:
        return np.ones(len(bt.ks), complex)
    R = data.support_radius
    return _integrate(data, bt, False, R, -R).y[:, -1].reshape(-1, 3, 3)[:, 0, 0]


@dataclass
class EigenfunctionSet:
    """Callables x -> 3x3 matrix for X, X^A (normalised at +inf) and Y, Y^A (at -inf)."""

    k: complex
    X: Callable[[float], np.ndarray]
    XA: Callable[[float], np.ndarray]
    Y: Callable[[float], np.ndarray]
    YA: Callable[[float], np.ndarray]


def solve_eigenfunctions(data: InitialData, k: complex, tol: float = 1e-10) -> EigenfunctionSet:
    bt = _batch([k])
    lv = bt.lv[0]
    R = data.support_radius
    rtol = min(RTOL, tol * 1e-2)
    sols = {
        "X": _integrate(data, bt, False, R, -R, True, rtol),
        "XA": _integrate(data, bt, True, R, -R, True, rtol),
        "Y": _integrate(data, bt, False, -R, R, True, rtol),
        "YA": _integrate(data, bt, True, -R, R, True, rtol),
    }

    def make(name):
        sol = sols[name]
        adjoint = name.endswith("A")
        at_plus = name.startswith("X")

        def fn(x):
            xc = min(max(x, -R), R)
            m = sol.sol(xc).reshape(3, 3)
            e = np.exp(x * lv)
            # undo the conjugation: X = e^{xL} mu e^{-xL}, X^A = e^{-xL} nu e^{xL}
            if adjoint:
                return (m / e[:, None]) * e[None, :]
            return (m * e[:, None]) / e[None, :]

        fn.__doc__ = f"{name} at x ({'normalised at +inf' if at_plus else 'normalised at -inf'})"
        return fn

    return EigenfunctionSet(complex(k), make("X"), make("XA"), make("Y"), make("YA"))


# ---------------------------------------------------------------- reflection


def on_contour(k: complex, tol: float = 1e-12) -> bool:
    if abs(abs(k) - 1) <= tol:
        return True
    ang = math.atan2(k.imag, k.real)
    return any(abs(math.remainder(ang - (math.pi / 6 + j * math.pi / 3), 2 * math.pi)) <= tol for j in range(6))


def reflection_batch(data: InitialData, ks, threshold: float = 1e-12, exclusion: float = EXCLUSION_RADIUS):
    ks = np.atleast_1d(np.asarray(ks, complex))
    for k in ks:
        if near_sixth_root(k, exclusion):
            raise SingularVandermondeError(f"k = {k} lies in an exclusion disk around a sixth root of unity")
    s, sA = scattering_batch(data, ks)
    if np.any(np.abs(s[:, 0, 0]) < threshold) or np.any(np.abs(sA[:, 0, 0]) < threshold):
        raise SpectralSingularityError("s11 or s^A_11 vanishes on the contour")
    return s[:, 0, 1] / s[:, 0, 0], sA[:, 0, 1] / sA[:, 0, 0]


def reflection_coefficients(data: InitialData, k: complex) -> tuple[complex, complex]:
    if not on_contour(complex(k)):
        raise ValueError(f"k = {k} is not on the admissible contour")
    r1, r2 = reflection_batch(data, [k])
    return complex(r1[0]), complex(r2[0])


def reflection_limit(data: InitialData, point: float, step: float = 1e-8,
                     order: int = 4) -> tuple[complex, complex]:
    """Limit of (r1, r2) at k = +1 or -1.

    Near these points r1 and r2 can vary on scales far below the exclusion radius, so
    the limit is extrapolated from offsets of size ``step`` along the unit circle.
    """
    offsets = step * np.arange(1, order + 1)
    base = 0.0 if point > 0 else math.pi
    r1, r2 = reflection_batch(data, np.exp(1j * (base + offsets)), threshold=0.0, exclusion=0.0)
    vander = np.vander(offsets, order)
    return complex(np.linalg.solve(vander, r1)[-1]), complex(np.linalg.solve(vander, r2)[-1])


REAL_AXIS_TOL = 1e-8


# ---------------------------------------------------------------- zeros and residues


def _cauchy_radius(k0: complex, radius: float) -> float:
    d = min([abs(k0)] + [abs(k0 - q) for q in SIXTH_ROOTS])
    return min(radius, d / 3)


def _circle(k0: complex, rho: float, n: int):
    ang = 2 * np.pi * (np.arange(n) + 0.5) / n
    return k0 + rho * np.exp(1j * ang), np.exp(1j * ang)


def entry_derivative(data: InitialData, k0: complex, entry, adjoint=False,
                     radius: float = 0.05, nodes: int = 32) -> complex:
    """k-derivative of a scattering-matrix entry by the trapezoidal Cauchy integral."""
    rho = _cauchy_radius(k0, radius)
    pts, units = _circle(k0, rho, nodes)
    s, sA = scattering_batch(data, pts)
    vals = (sA if adjoint else s)[:, entry[0], entry[1]]
    return complex(np.mean(vals / units) / rho)


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def corners(self):
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]

    def split(self):
        rm, im = 0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max)
        return [Rectangle(self.re_min, rm, self.im_min, im), Rectangle(rm, self.re_max, self.im_min, im),
                Rectangle(self.re_min, rm, im, self.im_max), Rectangle(rm, self.re_max, im, self.im_max)]

    @property
    def size(self) -> float:
        return max(self.re_max - self.re_min, self.im_max - self.im_min)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, k: complex) -> bool:
        return self.re_min <= k.real <= self.re_max and self.im_min <= k.imag <= self.im_max


def winding_number(f_batch, rect: Rectangle, n_per_side: int = 32, max_points: int = 4096) -> int:
    """Argument-principle count with adaptive refinement of the boundary sampling."""
    c = rect.corners()
    ts = np.linspace(0, 1, n_per_side + 1)[:-1]
    pts = np.concatenate([c[i] + (c[(i + 1) % 4] - c[i]) * ts for i in range(4)])
    vals = f_batch(pts)
    while True:
        nxt_pts = np.roll(pts, -1)
        nxt_vals = np.roll(vals, -1)
        jumps = np.angle(nxt_vals / vals)
        bad = np.abs(jumps) > math.pi / 4
        if not bad.any():
            return int(round(jumps.sum() / (2 * math.pi)))
        if len(pts) >= max_points:
            raise ZeroSearchError("boundary sampling did not resolve the argument")
        mids = 0.5 * (pts[bad] + nxt_pts[bad])
        mid_vals = f_batch(mids)
        order = np.concatenate([np.arange(len(pts)), np.flatnonzero(bad) + 0.5])
        pts = np.concatenate([pts, mids])[np.argsort(order, kind="stable")]
        vals = np.concatenate([vals, mid_vals])[np.argsort(order, kind="stable")]


def _newton(data: InitialData, k: complex, rect: Rectangle, tol: float, max_iter: int = 30) -> complex:
    for _ in range(max_iter):
        rho = _cauchy_radius(k, min(0.05, rect.size))
        pts, units = _circle(k, rho, 24)
        vals = s11_batch(data, np.concatenate([[k], pts]))
        f, deriv = vals[0], np.mean(vals[1:] / units) / rho
        if abs(f) <= tol:
            return k
        step = f / deriv
        k = k - step
        if abs(k.imag) < REAL_AXIS_TOL and rect.im_min <= 0 <= rect.im_max:
            k = complex(k.real, 0.0)
    if abs(s11_batch(data, [k])[0]) <= tol:
        return k
    raise ZeroSearchError(f"Newton refinement did not converge near {k}")


def locate_zeros(data: InitialData, region: Rectangle, min_cell: float = 0.05,
                 tol: float = 1e-9) -> list[complex]:
    for q in SIXTH_ROOTS + (0j,):
        if region.contains(q):
            raise ValueError(f"search region contains the singular point {q}")
    f = lambda ks: s11_batch(data, ks)
    total = winding_number(f, region)
    if total == 0:
        return []
    found: list[complex] = []
    stack = [(region, total)]
    while stack:
        cell, count = stack.pop()
        if count == 0:
            continue
        if count == 1 or cell.size <= min_cell:
            if count > 1:
                raise MultipleZeroError(f"{count} zeros in a minimal cell around {cell.center}")
            z = _newton(data, cell.center, cell, tol)
            small = Rectangle(z.real - 1e-3, z.real + 1e-3, z.imag - 1e-3, z.imag + 1e-3)
            if winding_number(f, small, 8) != 1:
                raise MultipleZeroError(f"zero near {z} is not simple")
            found.append(z)
            continue
        subs = cell.split()
        counts = [winding_number(f, s) for s in subs]
        if sum(counts) != count:
            raise ZeroSearchError("zero count changed under subdivision")
        stack.extend(zip(subs, counts))
    if len(found) != total:
        raise ZeroSearchError("refined zero count differs from the winding number")
    return sorted(found, key=lambda z: (z.real, z.imag))


def residue_constant(data: InitialData, k0: complex, threshold: float = 1e-10) -> complex:
    """Compact-support formula: -s13/s11' (non-real k0) or -s12/s11' (real k0)."""
    k0 = complex(k0)
    deriv = entry_derivative(data, k0, (0, 0))
    if abs(deriv) < threshold:
        raise DegenerateZeroError(f"s11' vanishes at {k0}")
    s = scattering_matrices(data, k0).s
    col = 1 if abs(k0.imag) <= REAL_AXIS_TOL else 2
    return -s[0, col] / deriv


@dataclass(frozen=True)
class GeneralResidue:
    c: complex
    spread: float
    samples: np.ndarray


def residue_constant_general(data: InitialData, k0: complex, xs=None) -> GeneralResidue:
    """Least-squares constant from the eigenfunction relation at several x values."""
    k0 = complex(k0)
    if xs is None:
        xs = np.linspace(-0.5, 0.5, 5) * data.support_radius
    ef = solve_eigenfunctions(data, k0)
    lv = l_values(k0)
    lhs, rhs = [], []
    if abs(k0.imag) <= REAL_AXIS_TOL:
        k0 = complex(k0.real, 0.0)
        norm = entry_derivative(data, k0, (1, 1), adjoint=True)
        for x in xs:
            lhs.append(ef.Y(x)[:, 1] / norm)
            rhs.append(np.exp((lv[0] - lv[1]) * x) * ef.X(x)[:, 0])
    else:
        norm = entry_derivative(data, k0, (0, 0))
        for x in xs:
            XA, YA = ef.XA(x), ef.YA(x)
            w = np.array([
                YA[1, 0] * XA[2, 1] - YA[2, 0] * XA[1, 1],
                YA[2, 0] * XA[0, 1] - YA[0, 0] * XA[2, 1],
                YA[0, 0] * XA[1, 1] - YA[1, 0] * XA[0, 1],
            ])
            lhs.append(w / norm)
            rhs.append(np.exp((lv[0] - lv[2]) * x) * ef.X(x)[:, 0])
    a, b = np.concatenate(lhs), np.concatenate(rhs)
    c = complex(np.vdot(b, a) / np.vdot(b, b))
    per_x = np.array([np.vdot(bb, aa) / np.vdot(bb, bb) for aa, bb in zip(lhs, rhs)])
    return GeneralResidue(c=c, spread=float(np.std(per_x)), samples=per_x)


# ---------------------------------------------------------------- reflection tables


@dataclass
class ReflectionTable:
    """r1, r2 on Chebyshev nodes of an arc of the unit circle, with d/dtheta ln(1 + r1 r2)."""

    arc: tuple[float, float]
    arc_nodes: np.ndarray
    r1_values: np.ndarray
    r2_values: np.ndarray
    dlog_values: np.ndarray
    zero_flag: bool
    source: str = "data"

    def __post_init__(self):
        a, b = self.arc
        self._map = lambda th: (2 * np.asarray(th, float) - (a + b)) / (b - a)
        scale = 2 / (b - a)
        fit = lambda v: np.polynomial.chebyshev.Chebyshev.fit(self._map(self.arc_nodes), v, len(v) - 1, domain=[-1, 1])
        self._r1 = fit(self.r1_values)
        self._r2 = fit(self.r2_values)
        self._log = fit(np.log1p(self.r1_values * self.r2_values))
        self._dlog = self._log.deriv() * scale

    def _check(self, th):
        a, b = self.arc
        th = np.asarray(th, float)
        if np.any(th < a - 1e-12) or np.any(th > b + 1e-12):
            raise ValueError(f"angle outside the tabulated arc [{a}, {b}]")
        return self._map(th)

    def r1(self, th):
        return np.zeros_like(np.asarray(th, float), complex) if self.zero_flag else self._r1(self._check(th))

    def r2(self, th):
        return np.zeros_like(np.asarray(th, float), complex) if self.zero_flag else self._r2(self._check(th))

    def log_factor(self, th):
        """ln(1 + r1 r2) at angle th."""
        return np.zeros_like(np.asarray(th, float), complex) if self.zero_flag else self._log(self._check(th))

    def dlog(self, th):
        """d/dtheta ln(1 + r1 r2)."""
        return np.zeros_like(np.asarray(th, float), complex) if self.zero_flag else self._dlog(self._check(th))


def chebyshev_angles(arc, n: int) -> np.ndarray:
    a, b = arc
    j = np.arange(n)
    x = np.cos(np.pi * (2 * j + 1) / (2 * n))[::-1]
    return 0.5 * (a + b) + 0.5 * (b - a) * x


DEFAULT_ARC = (math.pi / 2, 2 * math.pi / 3 - 0.012)


def _table_from_values(arc, th, r1, r2, source):
    zero = not (np.any(r1) or np.any(r2))
    tab = ReflectionTable(arc, th, r1, r2, np.zeros(len(th), complex), zero, source)
    if not zero:
        tab.dlog_values = tab.dlog(th)
    return tab


def zero_table(arc=DEFAULT_ARC, n_nodes: int = 16) -> ReflectionTable:
    th = chebyshev_angles(arc, n_nodes)
    z = np.zeros(n_nodes, complex)
    return ReflectionTable(arc, th, z, z.copy(), z.copy(), True, "zero")


@dataclass(frozen=True)
class BumpProfile:
    """Synthetic r1 on the unit circle: vanishes to second order at k = i, Gaussian envelope."""

    amplitude: float = 0.4
    center: float = 1.85
    width: float = 0.12
    phase: float = 0.3
    twist: float = 2.0

    def r1(self, th):
        th = np.asarray(th, float)
        rise = ((th - math.pi / 2) / self.width) ** 2
        env = np.exp(-(((th - self.center) / self.width) ** 2))
        return self.amplitude * rise * env * np.exp(1j * (self.phase + self.twist * th))


def synthetic_table(profile: BumpProfile, arc=DEFAULT_ARC, n_nodes: int = 48) -> ReflectionTable:
    """Table whose r2 follows from r1 through the r-tilde symmetry on the unit circle."""
    if n_nodes < 8:
        raise ValueError("n_nodes must be at least 8")
    th = chebyshev_angles(arc, n_nodes)
    r1 = profile.r1(th)
    r2 = r_tilde(np.exp(1j * th)) * np.conj(r1)
    return _table_from_values(arc, th, r1, r2, "synthetic")


def build_reflection_table(data: InitialData, arc=DEFAULT_ARC, n_nodes: int = 32) -> ReflectionTable:
    if n_nodes < 8:
        raise ValueError("n_nodes must be at least 8")
    th = chebyshev_angles(arc, n_nodes)
    ks = np.exp(1j * th)
    for k in ks:
        if near_sixth_root(k, EXCLUSION_RADIUS):
            raise NodePlacementError(f"table node {k} lies in an exclusion disk")
    r1, r2 = reflection_batch(data, ks)
    return _table_from_values(arc, th, r1, r2, "data")
