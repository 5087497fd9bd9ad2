"""Modulation factors, the pure-soliton RH solver and the long-time asymptotic formulas."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad as _quad

from .scattering import ReflectionTable, zero_table
from .soliton import (
    FieldSample,
    SolitonSpectrum,
    VelocityGroup,
    d_constant,
    kernel_data,
    length_scale,
    one_soliton_parameters,
    reduced_spectrum,
    richardson_derivative,
    u_complex,
    velocities,
)
from .spectral import OMEGA, SaddleSet, phi, saddle_points, theta

DEFAULT_EPSILON = 0.05
HAT_DELTA_FLOOR = 1e-12


def quad(*args, **kwargs):
    # tolerances sit at round-off; the warning only reports that
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return _quad(*args, **kwargs)


class GammaPoleError(ValueError):
    pass


class NearContourError(ValueError):
    pass


class RHSolvabilityError(ArithmeticError):
    pass


class EvaluationPointError(ValueError):
    pass


class InconsistentTableError(ValueError):
    pass


class NotSolitonDirectionError(ValueError):
    pass


# ---------------------------------------------------------------- Gamma function

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _lanczos_log_gamma(z: complex) -> complex:
    """ln Gamma(z) for Re z >= 7, where every logarithm below stays on its principal sheet."""
    z = z - 1
    series = _LANCZOS[0] + sum(c / (z + i) for i, c in enumerate(_LANCZOS[1:], start=1))
    tt = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(tt) - tt + cmath.log(series)


def complex_log_gamma(z: complex) -> complex:
    """Principal branch of ln Gamma, analytic off the non-positive real axis.

    Arguments with small real part are shifted upward with the recurrence
    ln Gamma(z) = ln Gamma(z + n) - sum_j ln(z + j), which keeps the branch continuous.
    """
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise GammaPoleError(f"Gamma has a pole at {z.real}")
    shift = max(0, math.ceil(7 - z.real))
    acc = 0j
    for j in range(shift):
        acc += cmath.log(z + j)
    return _lanczos_log_gamma(z + shift) - acc


def gamma(z: complex) -> complex:
    return cmath.exp(complex_log_gamma(z))


def gamma_modulus_identity(nu: float) -> float:
    """Closed-form |Gamma(i nu)| for nu < 0."""
    return math.sqrt(2 * math.pi) / (math.sqrt(-nu) * math.sqrt(math.exp(-math.pi * nu) - math.exp(math.pi * nu)))


@dataclass(frozen=True)
class ModelConstants:
    q: complex
    nu: float
    beta12: complex
    beta21: complex


def model_rh_constants(q: complex) -> ModelConstants:
    q = complex(q)
    nu = -math.log1p(abs(q) ** 2) / (2 * math.pi)
    if q == 0:
        return ModelConstants(q, 0.0, 0j, 0j)
    g_plus = gamma(1j * nu)
    g_minus = gamma(-1j * nu)
    root = math.sqrt(2 * math.pi)
    b12 = root * cmath.exp(0.25j * math.pi) * math.exp(1.5 * math.pi * nu) / (q * g_plus)
    b21 = root * cmath.exp(-0.25j * math.pi) * math.exp(-2.5 * math.pi * nu) / (-q.conjugate() * g_minus)
    return ModelConstants(q, nu, b12, b21)


# ---------------------------------------------------------------- modulation


def _gauss_legendre(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


@dataclass
class ModulationContext:
    """Everything the asymptotic formulas need at a fixed ray zeta = x/t."""

    zeta: float
    saddle: SaddleSet
    table: ReflectionTable
    spec: SolitonSpectrum
    n_nodes: int = 256
    nu: float = field(init=False)
    r1_k1: complex = field(init=False)
    r2_k1: complex = field(init=False)

    def __post_init__(self):
        th1 = cmath.phase(self.saddle.k1)
        self.theta1 = th1
        self.zero = bool(self.table.zero_flag)
        if self.zero:
            self.nu, self.r1_k1, self.r2_k1 = 0.0, 0j, 0j
            self._arg_d0_static = 0.0
            return
        a, b = self.table.arc
        if not (a - 1e-12 <= math.pi / 2 and th1 <= b + 1e-12):
            raise ValueError(f"table arc {self.table.arc} does not cover [pi/2, arg k1 = {th1}]")
        self.r1_k1 = complex(self.table.r1(th1))
        self.r2_k1 = complex(self.table.r2(th1))
        self.nu = -math.log1p((self.r1_k1 * self.r2_k1).real) / (2 * math.pi)
        self._nodes, self._weights = _gauss_legendre(math.pi / 2, th1, self.n_nodes)
        self._log_nodes = self.table.log_factor(self._nodes).real
        self._arg_d0_static = self._arg_d0_without_time()

    # -- delta and its combinations
    def log_delta(self, k):
        k = np.asarray(k, dtype=complex)
        if self.zero:
            return np.zeros_like(k)
        self._check_off_arc(k)
        s = np.exp(1j * self._nodes)
        kern = s / (s - k[..., None])
        return -(kern * (self._weights * self._log_nodes)).sum(axis=-1) / (2 * math.pi)

    def delta(self, k):
        return np.exp(self.log_delta(k))

    def _check_off_arc(self, k):
        ang = np.angle(k)
        on_circle_dist = np.abs(np.abs(k) - 1)
        inside = (ang >= math.pi / 2) & (ang <= self.theta1)
        dist_end = np.minimum(np.abs(k - 1j), np.abs(k - self.saddle.k1))
        dist = np.where(inside, on_circle_dist, dist_end)
        if np.any(dist < 1e-6):
            raise NearContourError("delta requested within 1e-6 of the integration arc")

    def delta_modulus_closed_form(self) -> float:
        """Constant modulus of delta on the unit circle off the arc.

        The arc integral is taken from k1 back to i, which is the orientation in which
        the closed form agrees with the defining Cauchy integral.
        """
        if self.zero:
            return 1.0
        th1 = self.theta1
        integral = quad(lambda p: p / 2 * self.table.dlog(p).real, math.pi / 2, th1, limit=200,
                        epsabs=1e-14, epsrel=1e-13)[0]
        return math.exp(self.nu * th1 / 2 + integral / (2 * math.pi))

    def log_hat_delta33(self, k):
        k = np.asarray(k, dtype=complex)
        return (self.log_delta(OMEGA * k) - self.log_delta(OMEGA**2 * k)
                + self.log_delta(1 / (OMEGA**2 * k)) - self.log_delta(1 / (OMEGA * k)))

    def hat_delta(self, k):
        """Diagonal (Delta_11, Delta_22, Delta_33) at k, without the Blaschke factor."""
        k = np.asarray(k, dtype=complex)
        d11 = np.exp(self.log_hat_delta33(OMEGA * k))
        d22 = np.exp(self.log_hat_delta33(OMEGA**2 * k))
        d33 = np.exp(self.log_hat_delta33(k))
        for d in (d11, d22, d33):
            if np.any(np.abs(d) < HAT_DELTA_FLOOR):
                raise ArithmeticError("modulation factor below the 1e-12 floor")
        return d11, d22, d33

    # -- Blaschke-type product
    def script_p(self, k):
        k = np.asarray(k, dtype=complex)
        out = np.ones_like(k)
        for lam, _ in self.spec.breathers:
            if phi(3, 1, self.zeta, lam).real < 0:
                lb = lam.conjugate()
                out = out * ((k - lam) * (k - 1 / lam) * (k - OMEGA**2 * lb) * (k - OMEGA / lb)
                             / ((k - lb) * (k - 1 / lb) * (k - OMEGA * lam) * (k - OMEGA**2 / lam)))
        for k0, _ in self.spec.real_solitons:
            if phi(2, 1, self.zeta, k0).real < 0:
                out = out * ((k - OMEGA**2 * k0) * (k - OMEGA / k0)) / ((k - OMEGA * k0) * (k - OMEGA**2 / k0))
        return out

    # -- arg d0
    def _arg_d0_without_time(self) -> float:
        k1, zs = self.saddle.k1, self.saddle.z_star
        nu = self.nu
        first = nu * math.log(abs((1 / (OMEGA**2 * k1) - k1) * (1 / (OMEGA * k1) - k1)
                                  / (3 * (1 / k1 - k1) ** 2 * zs**2)))
        th1 = self.theta1
        dlog = lambda p: self.table.dlog(p).real

        def regular(p):
            s = cmath.exp(1j * p)
            u = th1 - p
            sinc_part = 2 * math.log(2 * math.sin(u / 2) / u) if u > 1e-8 else 0.0
            rest = (math.log(abs(1 / (OMEGA**2 * k1) - s)) + math.log(abs(1 / (OMEGA * k1) - s))
                    - 2 * math.log(abs(1 / k1 - s)) - math.log(abs(OMEGA * k1 - s))
                    - math.log(abs(OMEGA**2 * k1 - s)))
            return (sinc_part + rest) * dlog(p)

        smooth = quad(regular, math.pi / 2, th1, limit=200, epsabs=1e-14, epsrel=1e-13)[0]
        # 2 ln(th1 - p) handled by the logarithmic weight
        singular = 2 * quad(dlog, math.pi / 2, th1, weight="alg-logb", wvar=(0, 0),
                            epsabs=1e-14, epsrel=1e-13)[0]
        return first + (smooth + singular) / (2 * math.pi)

    def arg_d0(self, t: float) -> float:
        return self._arg_d0_static - self.nu * math.log(t)

    # -- modulated discrete data
    def modulated_spectrum(self) -> SolitonSpectrum:
        if self.zero:
            return self.spec
        bc = []
        for lam, c in self.spec.breathers:
            d11, _, d33 = self.hat_delta(lam)
            bc.append(c / (complex(d11) / complex(d33)))
        sc = []
        for k0, c in self.spec.real_solitons:
            d11, d22, _ = self.hat_delta(k0)
            sc.append(c / (complex(d11) / complex(d22)))
        return self.spec.with_constants(bc, sc)

    def modulated_d_constants(self) -> list[complex]:
        out = []
        for lam, c in self.spec.breathers:
            d = d_constant(lam, c)
            if self.zero:
                out.append(d)
                continue
            _, d22, d33 = self.hat_delta(lam.conjugate())
            out.append(d / (complex(d33) / complex(d22)))
        return out


def build_modulation(zeta: float, table: ReflectionTable | None = None,
                     spec: SolitonSpectrum | None = None, n_nodes: int = 256) -> ModulationContext:
    table = table if table is not None else zero_table()
    spec = spec if spec is not None else SolitonSpectrum()
    return ModulationContext(zeta=zeta, saddle=saddle_points(zeta), table=table, spec=spec, n_nodes=n_nodes)


# ---------------------------------------------------------------- M_sol


_NEXT_COLUMN = {0: 1, 1: 2, 2: 0}
_SWAP = {0: 1, 1: 0, 2: 2}
A_MATRIX = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
B_MATRIX = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class ResidueCondition:
    """Res_{pole} of column ``column`` equals ``coefficient`` times column ``source`` at the pole."""

    pole: complex
    column: int
    source: int
    coefficient: complex


def _orbit_conditions(base: list[ResidueCondition], tol: float = 1e-12) -> list[ResidueCondition]:
    out: list[ResidueCondition] = []
    queue = list(base)
    while queue:
        cond = queue.pop()
        if any(abs(cond.pole - c.pole) <= tol * max(1.0, abs(c.pole)) for c in out):
            continue
        out.append(cond)
        p = cond.pole
        queue.append(ResidueCondition(OMEGA**2 * p, _NEXT_COLUMN[cond.column], _NEXT_COLUMN[cond.source],
                                      OMEGA**2 * cond.coefficient))
        queue.append(ResidueCondition(1 / p, _SWAP[cond.column], _SWAP[cond.source],
                                      -cond.coefficient / p**2))
    return out


def residue_conditions(x: float, t: float, spec: SolitonSpectrum,
                       ctx: ModulationContext | None = None) -> list[ResidueCondition]:
    """Full set of column residue conditions on the symmetry orbit of every pole."""
    if ctx is not None and not ctx.zero:
        mod = ctx.modulated_spectrum()
        dmod = ctx.modulated_d_constants()
    else:
        mod = spec
        dmod = list(spec.d_constants)
    base = []
    for (lam, c), d in zip(mod.breathers, dmod):
        base.append(ResidueCondition(lam, 2, 0, c * np.exp(-theta(3, 1, x, t, lam))))
        lb = lam.conjugate()
        base.append(ResidueCondition(lb, 1, 2, d * np.exp(theta(3, 2, x, t, lb))))
    for k0, c in mod.real_solitons:
        base.append(ResidueCondition(complex(k0), 1, 0, c * np.exp(-theta(2, 1, x, t, k0))))
    conds = []
    for b in base:
        conds.extend(_orbit_conditions([b]))
    return conds


@dataclass
class MSolEvaluation:
    M: np.ndarray | None
    M1_row3_limit: complex
    x: float
    t: float
    k: complex | None


@dataclass
class _MSolSystem:
    poles: np.ndarray
    columns: np.ndarray
    residues: np.ndarray  # residues[p, i]: residue at pole p of row i, column columns[p]


def _solve_residues(conds: list[ResidueCondition]) -> _MSolSystem:
    n = len(conds)
    poles = np.array([c.pole for c in conds])
    cols = np.array([c.column for c in conds])
    K = np.zeros((n, n), complex)
    rhs = np.zeros((n, 3), complex)
    for r, c in enumerate(conds):
        couple = cols == c.source
        inv_gap = np.where(couple, 1 / np.where(couple, c.pole - poles, 1), 0)
        # rows with huge coefficients are divided through to keep entries bounded
        if abs(c.coefficient) > 1:
            K[r] = -inv_gap
            K[r, r] += 1 / c.coefficient
            rhs[r, c.source] = 1
        else:
            K[r] = -c.coefficient * inv_gap
            K[r, r] += 1
            rhs[r, c.source] = c.coefficient
    try:
        res = np.linalg.solve(K, rhs) if n else np.zeros((0, 3), complex)
    except np.linalg.LinAlgError as exc:
        raise RHSolvabilityError("residue system is singular") from exc
    return _MSolSystem(poles, cols, res)


def _evaluate(sys_: _MSolSystem, k: complex) -> np.ndarray:
    if sys_.poles.size and np.min(np.abs(k - sys_.poles)) < 1e-8:
        raise EvaluationPointError(f"k = {k} is within 1e-8 of a pole")
    M = np.eye(3, dtype=complex)
    for p, col, res in zip(sys_.poles, sys_.columns, sys_.residues):
        M[:, col] += res / (k - p)
    return M


def _row_sum_limit(sys_: _MSolSystem) -> complex:
    mask = sys_.columns == 2
    return complex(sys_.residues[mask].sum())


def msol_solve(x: float, t: float, spec: SolitonSpectrum, ctx: ModulationContext | None = None,
               k_eval: complex | None = None) -> MSolEvaluation:
    """Solve the pure-soliton RH problem; modulation (if any) is frozen at ctx.zeta."""
    sys_ = _solve_residues(residue_conditions(x, t, spec, ctx))
    M = None if k_eval is None else _evaluate(sys_, complex(k_eval))
    return MSolEvaluation(M=M, M1_row3_limit=_row_sum_limit(sys_), x=x, t=t, k=k_eval)


def msol_matrices(x: float, t: float, spec: SolitonSpectrum, ks, ctx: ModulationContext | None = None):
    sys_ = _solve_residues(residue_conditions(x, t, spec, ctx))
    return [_evaluate(sys_, complex(k)) for k in ks]


def _context_for(x: float, t: float, spec: SolitonSpectrum, table: ReflectionTable | None):
    if table is None or table.zero_flag:
        return None
    return build_modulation(x / t, table, spec)


def u_sol(x: float, t: float, spec: SolitonSpectrum, ctx: ModulationContext | None = None,
          path: str = "determinant") -> FieldSample:
    """Soliton term; ``ctx`` fixes the modulation ray, None means no reflection."""
    if spec.is_empty:
        return FieldSample(x, t, 0.0, "modulated_soliton")
    if path == "determinant":
        mod = spec if ctx is None or ctx.zero else ctx.modulated_spectrum()
        val = u_complex(x, t, mod)
    elif path == "residue":
        h = 1e-3 * length_scale(kernel_data(spec))
        coef = lambda s: msol_solve(s, t, spec, ctx).M1_row3_limit
        val = -1j * math.sqrt(3) * richardson_derivative(coef, x, h)
    else:
        raise ValueError(f"unknown path {path!r}")
    return FieldSample(x, t, val.real, "modulated_soliton", imag=val.imag)


def u_rad_complex(x: float, t: float, spec: SolitonSpectrum, ctx: ModulationContext) -> complex:
    if ctx.nu == 0:
        return 0j
    k1, zs, nu = ctx.saddle.k1, ctx.saddle.z_star, ctx.nu
    r1, r2 = ctx.r1_k1, ctx.r2_k1
    if r1 == 0 or r2 == 0:
        raise InconsistentTableError("nonzero nu with a vanishing reflection coefficient at k1")
    phase21 = complex(phi(2, 1, ctx.zeta, k1))
    ad0 = ctx.arg_d0(t)
    g_plus = gamma(1j * nu)
    g_minus = gamma(-1j * nu)
    mid = np.zeros((3, 3), complex)
    mid[0, 1] = cmath.exp(0.25j * math.pi) * cmath.exp(-t * phase21) / (cmath.exp(1j * ad0) * r2 * g_plus)
    mid[1, 0] = cmath.exp(-0.25j * math.pi) * cmath.exp(t * phase21) / (cmath.exp(-1j * ad0) * r1 * g_minus)
    vec = np.array([OMEGA**2 * 1j / k1 - OMEGA * 1j * k1, OMEGA * 1j / k1 - OMEGA**2 * 1j * k1,
                    1j / k1 - 1j * k1])
    if spec.is_empty:
        M = np.eye(3, dtype=complex)
    else:
        M = msol_solve(x, t, spec, ctx, k1).M
    pref = math.sqrt(6 * math.pi) * math.exp(-math.pi * nu / 2) * k1.imag / (-1j * k1 * zs)
    return complex(pref * (np.ones(3) @ M @ mid @ np.linalg.solve(M, vec)))


def u_rad(x: float, t: float, spec: SolitonSpectrum, ctx: ModulationContext) -> FieldSample:
    val = u_rad_complex(x, t, spec, ctx)
    return FieldSample(x, t, val.real, "asymptotic_radiation", imag=val.imag)


@dataclass(frozen=True)
class LeadingWave:
    amplitude_A: float
    phase_alpha: float
    u_leading: float


def sector2_leading(zeta: float, t: float, ctx: ModulationContext, spec: SolitonSpectrum | None = None,
                    epsilon: float = DEFAULT_EPSILON, warn=None) -> LeadingWave:
    spec = spec if spec is not None else ctx.spec
    if any(abs(zeta - g.zeta) <= epsilon for g in velocities(spec)):
        msg = f"zeta = {zeta} lies within {epsilon} of a soliton velocity"
        if warn is not None:
            warn(msg)
    k1, zs, nu = ctx.saddle.k1, ctx.saddle.z_star, ctx.nu
    th1 = cmath.phase(k1)
    kz = (-1j * k1 * zs).real
    amp = 2 * math.sqrt(3) * math.sqrt(-nu) * math.sqrt(-1 - 2 * math.cos(2 * th1)) / kz * k1.imag
    if nu == 0:
        return LeadingWave(0.0, float("nan"), 0.0)
    ratio = complex(ctx.script_p(OMEGA * k1) / ctx.script_p(OMEGA**2 * k1))
    alpha = (0.75 * math.pi + cmath.phase(ctx.r2_k1) + complex_log_gamma(1j * nu).imag
             + ctx.arg_d0(t) + cmath.phase(ratio) + t * complex(phi(2, 1, zeta, k1)).imag)
    return LeadingWave(amp, alpha, amp * math.cos(alpha) / math.sqrt(t))


@dataclass(frozen=True)
class NearSolitonResult:
    sample: FieldSample
    soliton_part: float
    radiation_part: float
    amplitude: float | None = None
    x0: float | None = None


def _group_for(zeta0: float, spec: SolitonSpectrum, tol: float = 1e-8) -> VelocityGroup:
    for g in velocities(spec):
        if abs(g.zeta - zeta0) <= tol:
            return g
    raise NotSolitonDirectionError(f"{zeta0} is not a soliton velocity of the spectrum")


def blaschke_factors(zeta0: float, spec: SolitonSpectrum, group: VelocityGroup):
    """Multipliers for the constants of the solitons in ``group`` left by the poles outside it.

    Each removed pole that decays on the ray leaves a Blaschke-type product behind; for the
    remaining constants that product enters as the ratio of its rotated values.
    """
    keep_b = set(group.breather_indices)
    keep_s = set(group.soliton_indices)
    others = SolitonSpectrum(
        breathers=tuple(b for i, b in enumerate(spec.breathers) if i not in keep_b),
        real_solitons=tuple(s for i, s in enumerate(spec.real_solitons) if i not in keep_s),
    )
    ctx = build_modulation(zeta0, None, others)
    p = lambda k: complex(ctx.script_p(k))
    fb = [p(spec.breathers[i][0]) / p(OMEGA * spec.breathers[i][0]) for i in sorted(keep_b)]
    fs = [p(OMEGA**2 * spec.real_solitons[i][0]) / p(OMEGA * spec.real_solitons[i][0]) for i in sorted(keep_s)]
    return fb, fs


def near_soliton(zeta0: float, x: float, t: float, spec: SolitonSpectrum,
                 table: ReflectionTable | None = None, interaction_shift: bool = True) -> NearSolitonResult:
    """Reduced-spectrum modulated soliton plus the radiation correction.

    With ``interaction_shift`` the reduced constants also carry the phase shift left by the
    solitons outside the group; without it the reduced spectrum uses the modulated constants only.
    """
    group = _group_for(zeta0, spec)
    reduced = reduced_spectrum(spec, group)
    table = table if table is not None else zero_table()
    reflection = not table.zero_flag
    if reflection and x / t <= 1:
        raise ValueError("the ray x/t must lie in the sector x/t > 1")
    fb, fs = blaschke_factors(zeta0, spec, group) if interaction_shift else (
        [1.0] * len(reduced.breathers), [1.0] * len(reduced.real_solitons))

    def shifted(ctx_zeta: float | None) -> SolitonSpectrum:
        base = reduced
        if reflection:
            base = ModulationContext(ctx_zeta, saddle_points(ctx_zeta), table, reduced).modulated_spectrum()
        return base.with_constants([c * f for (_, c), f in zip(base.breathers, fb)],
                                   [c * f for (_, c), f in zip(base.real_solitons, fs)])

    sol = u_complex(x, t, shifted(x / t)).real
    rad = u_rad(x, t, spec, build_modulation(x / t, table, spec)).u / math.sqrt(t) if reflection else 0.0
    amp = x0 = None
    if not group.breather_indices and len(group.soliton_indices) == 1:
        k0, c = shifted(group.zeta if reflection else None).real_solitons[0]
        params = one_soliton_parameters(k0, c)
        amp, x0 = params.amplitude, params.x0
    return NearSolitonResult(FieldSample(x, t, sol + rad, "modulated_soliton"), sol, rad, amp, x0)
