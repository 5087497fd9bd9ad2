"""Exact multi-soliton and breather solutions via the determinant formula."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .spectral import OMEGA, SQRT3, classify_region, l_values, z_values

PROVENANCES = (
    "exact_soliton",
    "modulated_soliton",
    "asymptotic_leading",
    "asymptotic_radiation",
    "residual",
)

COINCIDENT_POLE_TOL = 1e-8
REALITY_TOL = 1e-9


class DegenerateKernelError(ValueError):
    pass


class SingularKernelError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SolitonSpectrum:
    """Discrete scattering data: breather poles and real poles with residue constants."""

    breathers: tuple[tuple[complex, complex], ...] = ()
    real_solitons: tuple[tuple[float, complex], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "breathers", tuple((complex(lam), complex(c)) for lam, c in self.breathers)
        )
        object.__setattr__(
            self, "real_solitons", tuple((float(k), complex(c)) for k, c in self.real_solitons)
        )

    @property
    def is_empty(self) -> bool:
        return not self.breathers and not self.real_solitons

    @property
    def d_constants(self) -> tuple[complex, ...]:
        return tuple(d_constant(lam, c) for lam, c in self.breathers)

    def with_constants(self, breather_c, soliton_c) -> "SolitonSpectrum":
        return SolitonSpectrum(
            tuple((lam, c) for (lam, _), c in zip(self.breathers, breather_c)),
            tuple((k, c) for (k, _), c in zip(self.real_solitons, soliton_c)),
        )

    def poles(self) -> list[complex]:
        return [lam for lam, _ in self.breathers] + [complex(k) for k, _ in self.real_solitons]


def d_constant(lam: complex, c: complex) -> complex:
    lb = lam.conjugate()
    return (lb**2 - 1) / (OMEGA**2 * (OMEGA**2 - lb**2)) * c.conjugate()


def reality_measure(k: float, c: complex) -> complex:
    """i(omega^2 k^2 - omega) c, which must be a nonnegative real for a regular soliton."""
    return 1j * (OMEGA**2 * k**2 - OMEGA) * c


def real_constant_with_modulus(k: float, modulus: float) -> complex:
    """Residue constant of the given modulus satisfying the reality condition."""
    return modulus * cmath.exp(-1j * cmath.phase(1j * (OMEGA**2 * k**2 - OMEGA)))


@dataclass
class ValidationReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))


def validate_spectrum(spec: SolitonSpectrum, tol: float = 1e-10) -> ValidationReport:
    rep = ValidationReport()
    for lam, c in spec.breathers:
        region = classify_region(lam)
        rep.add(f"breather {lam} in D_reg", region == "D_reg", region)
        rep.add(f"breather {lam} constant nonzero", c != 0)
    for k, c in spec.real_solitons:
        rep.add(f"real pole {k} in (-1,0)u(1,inf)", -1 < k < 0 or k > 1)
        rep.add(f"real pole {k} constant nonzero", c != 0)
        m = reality_measure(k, c)
        ok = abs(m.imag) <= tol * max(1.0, abs(m)) and m.real >= -tol
        rep.add(f"real pole {k} positivity", ok, f"{m}")
    poles = spec.poles()
    distinct = all(
        abs(p - q) > COINCIDENT_POLE_TOL for i, p in enumerate(poles) for q in poles[i + 1 :]
    )
    rep.add("poles distinct", distinct)
    return rep


def breather_velocity(lam: complex) -> float:
    lb = lam.conjugate()
    r2 = abs(lam) ** 2
    val = (1 + r2) * (lam**2 + OMEGA * lb**2) / (2 * r2 * (OMEGA * lam + lb))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ArithmeticError(f"breather velocity not real: {val}")
    return val.real


def soliton_velocity(k: float) -> float:
    return 0.5 * (k + 1 / k)


@dataclass(frozen=True)
class VelocityGroup:
    zeta: float
    breather_indices: tuple[int, ...]
    soliton_indices: tuple[int, ...]


def velocities(spec: SolitonSpectrum, tol: float = 1e-10) -> list[VelocityGroup]:
    """Velocities in (1, inf) with the poles travelling at each, sorted increasingly."""
    items = [(breather_velocity(lam), "b", i) for i, (lam, _) in enumerate(spec.breathers)]
    items += [(soliton_velocity(k), "s", i) for i, (k, _) in enumerate(spec.real_solitons)]
    items = sorted((v, kind, i) for v, kind, i in items if v > 1)
    groups: list[list] = []
    for v, kind, i in items:
        if groups and abs(v - groups[-1][0]) <= tol:
            groups[-1][1 if kind == "b" else 2].append(i)
        else:
            groups.append([v, [i] if kind == "b" else [], [i] if kind == "s" else []])
    return [VelocityGroup(g[0], tuple(g[1]), tuple(g[2])) for g in groups]


def reduced_spectrum(spec: SolitonSpectrum, group: VelocityGroup) -> SolitonSpectrum:
    return SolitonSpectrum(
        tuple(spec.breathers[i] for i in group.breather_indices),
        tuple(spec.real_solitons[i] for i in group.soliton_indices),
    )


def _weighted_breather(lam: complex, c: complex) -> complex:
    return 1j * (lam**2 - 1) / (2 * SQRT3 * lam**2) * c


def _weighted_soliton(k: float, c: complex) -> complex:
    return 1j * (k**2 - OMEGA**2) / (2 * SQRT3 * k**2) * OMEGA**2 * c


@dataclass(frozen=True)
class KernelData:
    """x- and t-rates of the row and column exponentials plus column weights."""

    row_l: np.ndarray
    row_z: np.ndarray
    col_l: np.ndarray
    col_z: np.ndarray
    weight: np.ndarray

    @property
    def size(self) -> int:
        return len(self.row_l)

    @property
    def gaps(self) -> np.ndarray:
        return self.row_l[:, None] - self.col_l[None, :]


def kernel_data(spec: SolitonSpectrum) -> KernelData:
    poles = spec.poles()
    for i, p in enumerate(poles):
        for q in poles[i + 1 :]:
            if abs(p - q) <= COINCIDENT_POLE_TOL:
                raise DegenerateKernelError(f"coincident poles {p} and {q}")
    lam = np.array([b[0] for b in spec.breathers], dtype=complex)
    lamc = lam.conj()
    ks = np.array([s[0] for s in spec.real_solitons], dtype=complex)
    cl = np.array([_weighted_breather(l_, c) for l_, c in spec.breathers], dtype=complex)
    ck = np.array([_weighted_soliton(k.real, c) for k, (_, c) in zip(ks, spec.real_solitons)], dtype=complex)

    def lz(arr, j):
        if len(arr) == 0:
            return np.zeros(0, complex), np.zeros(0, complex)
        return l_values(arr)[..., j], z_values(arr)[..., j]

    rl = [lz(lam, 0), lz(lamc, 2), lz(ks, 0)]
    cls = [lz(lam, 2), lz(lamc, 1), lz(ks, 1)]
    return KernelData(
        row_l=np.concatenate([p[0] for p in rl]),
        row_z=np.concatenate([p[1] for p in rl]),
        col_l=np.concatenate([p[0] for p in cls]),
        col_z=np.concatenate([p[1] for p in cls]),
        weight=np.concatenate([cl, cl.conj(), ck]),
    )


@dataclass
class SolitonKernel:
    B: np.ndarray
    W: np.ndarray
    V: np.ndarray
    x: float
    t: float


def assemble_kernel(x: float, t: float, spec: SolitonSpectrum) -> SolitonKernel:
    """Unscaled kernel; use only where the exponentials are moderate."""
    kd = kernel_data(spec)
    row = x * kd.row_l + t * kd.row_z
    col = x * kd.col_l + t * kd.col_z
    W = np.exp(row)
    V = kd.weight * np.exp(-col)
    B = np.outer(W, V) / kd.gaps
    return SolitonKernel(B=B, W=W, V=V, x=x, t=t)


def _scaled(kd: KernelData, x: float, t: float):
    """Row-equilibrated pieces: I - B = diag(e^s) M with every entry of M bounded."""
    gaps = kd.gaps
    logb = (
        np.log(kd.weight)[None, :]
        - np.log(gaps)
        + (x * kd.row_l + t * kd.row_z)[:, None]
        - (x * kd.col_l + t * kd.col_z)[None, :]
    )
    shift = np.maximum(0.0, logb.real.max(axis=1))
    Bs = np.exp(logb - shift[:, None])
    M = np.diag(np.exp(-shift)) - Bs
    return shift, M, Bs, gaps


def log_det(x: float, t: float, spec: SolitonSpectrum) -> complex:
    kd = kernel_data(spec)
    if kd.size == 0:
        return 0j
    shift, M, _, _ = _scaled(kd, x, t)
    sign, logabs = np.linalg.slogdet(M)
    return complex(shift.sum() + logabs + cmath.log(sign))


def kernel_condition(x: float, t: float, spec: SolitonSpectrum) -> float:
    """2-norm condition number of the row-equilibrated I - B; reported, never bounded."""
    kd = kernel_data(spec)
    if kd.size == 0:
        return 1.0
    return float(np.linalg.cond(_scaled(kd, x, t)[1]))


def _derivatives(kd: KernelData, x: float, t: float, order: int):
    shift, M, Bs, gaps = _scaled(kd, x, t)
    try:
        lu = np.linalg.solve(M, np.concatenate([Bs * gaps, Bs * gaps**2], axis=1))
    except np.linalg.LinAlgError as exc:
        raise SingularKernelError(f"I - B singular at x={x}, t={t}") from exc
    n = kd.size
    GBx, GBxx = lu[:, :n], lu[:, n:]
    d1 = -np.trace(GBx)
    if order == 1:
        return d1
    return d1, -np.trace(GBx @ GBx) - np.trace(GBxx)


def dx_log_det(x: float, t: float, spec: SolitonSpectrum, kd: KernelData | None = None) -> complex:
    """Analytic first x-derivative of ln det(I - B), i.e. -V^T (I - B)^{-1} W."""
    kd = kd or kernel_data(spec)
    if kd.size == 0:
        return 0j
    return complex(_derivatives(kd, x, t, 1))


def length_scale(kd: KernelData) -> float:
    rates = np.abs(kd.gaps.real)
    rates = rates[rates > 0]
    return 1.0 / rates.max() if rates.size else 1.0


def richardson_derivative(f, x: float, h: float) -> complex:
    """Order-4 Richardson combination of central differences at steps h and h/2."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def u_complex(x: float, t: float, spec: SolitonSpectrum, method: str = "richardson") -> complex:
    kd = kernel_data(spec)
    if kd.size == 0:
        return 0j
    if method == "analytic":
        return 6 * complex(_derivatives(kd, x, t, 2)[1])
    if method != "richardson":
        raise ValueError(f"unknown derivative method {method!r}")
    h = 1e-3 * length_scale(kd)
    return 6 * richardson_derivative(lambda s: complex(_derivatives(kd, s, t, 1)), x, h)


@dataclass(frozen=True)
class FieldSample:
    x: float
    t: float
    u: float
    provenance: str = "exact_soliton"
    imag: float = 0.0


def u_multisoliton(x: float, t: float, spec: SolitonSpectrum, method: str = "richardson",
                   provenance: str = "exact_soliton") -> FieldSample:
    val = u_complex(x, t, spec, method)
    if abs(val.imag) > REALITY_TOL * max(1.0, abs(val.real)):
        raise ArithmeticError(f"non-real field value {val} at x={x}, t={t}")
    return FieldSample(x=float(x), t=float(t), u=val.real, provenance=provenance, imag=val.imag)


def u_grid(xs, t: float, spec: SolitonSpectrum, method: str = "richardson") -> np.ndarray:
    return np.array([u_complex(x, t, spec, method) for x in np.atleast_1d(xs)])


def u_multisoliton_mp(x, t, spec: SolitonSpectrum, dps: int = 40) -> float:
    """High-precision value via the analytic second derivative; used by residual checks."""
    kd = kernel_data(spec)
    n = kd.size
    if n == 0:
        return 0.0
    with mpmath.workdps(dps):
        x, t = mpmath.mpf(x), mpmath.mpf(t)
        w = [_mp_from(v) for v in _mp_spectrum_values(spec, "weight")]
        rl, rz, cl, cz = (_mp_spectrum_values(spec, name) for name in ("rl", "rz", "cl", "cz"))
        B = mpmath.matrix(n, n)
        Bx = mpmath.matrix(n, n)
        Bxx = mpmath.matrix(n, n)
        for j in range(n):
            for m in range(n):
                gap = rl[j] - cl[m]
                b = w[m] * mpmath.exp(x * gap + t * (rz[j] - cz[m])) / gap
                B[j, m], Bx[j, m], Bxx[j, m] = b, b * gap, b * gap**2
        G = mpmath.inverse(mpmath.eye(n) - B)
        GBx = G * Bx
        val = -sum((GBx * GBx)[i, i] for i in range(n)) - sum((G * Bxx)[i, i] for i in range(n))
        return mpmath.re(6 * val)


def _mp_from(v):
    return v if isinstance(v, mpmath.mpc) else mpmath.mpc(v)


def _mp_spectrum_values(spec: SolitonSpectrum, name: str):
    """Recompute kernel rates in the working precision."""
    w_ = mpmath.exp(2j * mpmath.pi / 3)
    s3 = mpmath.sqrt(3)

    def lfun(k, j):
        q = w_**j * k
        return 1j * (q + 1 / q) / (2 * s3)

    def zfun(k, j):
        q = w_**j * k
        return 1j * (q**2 + q**-2) / (4 * s3)

    lams = [mpmath.mpc(lam.real, lam.imag) for lam, _ in spec.breathers]
    lamc = [mpmath.conj(v) for v in lams]
    ks = [mpmath.mpf(k) for k, _ in spec.real_solitons]
    if name == "rl":
        return [lfun(v, 1) for v in lams] + [lfun(v, 3) for v in lamc] + [lfun(v, 1) for v in ks]
    if name == "rz":
        return [zfun(v, 1) for v in lams] + [zfun(v, 3) for v in lamc] + [zfun(v, 1) for v in ks]
    if name == "cl":
        return [lfun(v, 3) for v in lams] + [lfun(v, 2) for v in lamc] + [lfun(v, 2) for v in ks]
    if name == "cz":
        return [zfun(v, 3) for v in lams] + [zfun(v, 2) for v in lamc] + [zfun(v, 2) for v in ks]
    cl_ = []
    for lam, (_, c) in zip(lams, spec.breathers):
        cl_.append(1j * (lam**2 - 1) / (2 * s3 * lam**2) * mpmath.mpc(c.real, c.imag))
    ck_ = []
    for k, (_, c) in zip(ks, spec.real_solitons):
        ck_.append(1j * (k**2 - w_**2) / (2 * s3 * k**2) * w_**2 * mpmath.mpc(c.real, c.imag))
    return cl_ + [mpmath.conj(v) for v in cl_] + ck_


@dataclass(frozen=True)
class OneSolitonParameters:
    amplitude: float
    x0: float
    velocity: float

    @property
    def inverse_width(self) -> float:
        return math.sqrt(self.amplitude / 6)


def one_soliton_parameters(k1: float, c: complex) -> OneSolitonParameters:
    if c == 0:
        raise ValueError("a zero residue constant has no soliton position")
    if not (-1 < k1 < 0 or k1 > 1):
        raise ValueError(f"k1 = {k1} is not in (-1,0) u (1,inf)")
    amp = 0.375 * (k1 - 1 / k1) ** 2
    arg = reality_measure(k1, c) / (SQRT3 * k1 * (k1**2 - 1))
    x0 = (2 * k1 / (k1**2 - 1)) * cmath.log(arg)
    if abs(x0.imag) > 1e-9 * max(1.0, abs(x0)):
        raise ValueError(f"constant {c} violates the reality condition at k = {k1}")
    return OneSolitonParameters(amplitude=amp, x0=x0.real, velocity=soliton_velocity(k1))


def one_soliton_closed_form(x, t, k1: float, c: complex):
    p = one_soliton_parameters(k1, c)
    return p.amplitude / np.cosh(p.inverse_width * (np.asarray(x) - p.x0 - p.velocity * np.asarray(t))) ** 2


def speed_from_amplitude(amplitude: float) -> float:
    return math.sqrt(1 + 2 * amplitude / 3)
