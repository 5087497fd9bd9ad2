import math

import mpmath
import numpy as np
import pytest

from bsqlab import soliton as so
from bsqlab.spectral import OMEGA

# hand evaluation of the one-soliton formulas at k = 1.3 with |c| = 0.1
AMPLITUDE_13 = 0.10564349112426041
VELOCITY_13 = 1.0346153846153845
X0_13 = -7.1090945820212905


def test_frozen_one_soliton_parameters(c13):
    p = so.one_soliton_parameters(1.3, c13)
    assert p.amplitude == pytest.approx(AMPLITUDE_13, abs=1e-15)
    assert p.velocity == pytest.approx(VELOCITY_13, abs=1e-15)
    assert p.x0 == pytest.approx(X0_13, abs=1e-12)
    assert so.soliton_velocity(1.3) == pytest.approx(VELOCITY_13, abs=1e-15)


def test_reality_constant(c13):
    m = so.reality_measure(1.3, c13)
    assert abs(m.imag) < 1e-15
    assert m.real == pytest.approx(0.1 * abs(OMEGA**2 * 1.3**2 - OMEGA), rel=1e-14)


def test_determinant_matches_closed_form(one_soliton, c13):
    xs = np.linspace(-20, 20, 401)
    for t in (0.0, 5.0, 10.0):
        u = so.u_grid(xs, t, one_soliton)
        assert np.abs(u.real - so.one_soliton_closed_form(xs, t, 1.3, c13)).max() <= 1e-9
        assert np.abs(u.imag).max() <= 1e-9


def test_analytic_and_richardson_derivatives_agree(mixed_spec):
    for x in (-4.0, 0.0, 3.0):
        a = so.u_complex(x, 1.0, mixed_spec, "analytic")
        b = so.u_complex(x, 1.0, mixed_spec, "richardson")
        assert abs(a - b) < 1e-8


def test_mp_evaluation_agrees_with_double(mixed_spec):
    for x in (-3.0, 1.0):
        assert float(so.u_multisoliton_mp(x, 0.5, mixed_spec)) == pytest.approx(
            so.u_complex(x, 0.5, mixed_spec, "analytic").real, abs=1e-11)


def test_empty_spectrum_is_zero():
    empty = so.SolitonSpectrum()
    assert so.kernel_data(empty).size == 0
    assert so.log_det(0.0, 0.0, empty) == 0
    assert so.u_multisoliton(1.0, 2.0, empty).u == 0


def test_one_by_one_kernel_entry(one_soliton, c13):
    x, t, k = 0.4, 0.7, 1.3
    from bsqlab.spectral import l_values, z_values

    l, z = l_values(k), z_values(k)
    expected = so._weighted_soliton(k, c13) * np.exp(x * (l[0] - l[1]) + t * (z[0] - z[1])) / (l[0] - l[1])
    assert so.assemble_kernel(x, t, one_soliton).B[0, 0] == pytest.approx(expected, rel=1e-13)


def test_kernel_derivative_is_rank_one(mixed_spec):
    x, t, h = 0.3, 0.2, 1e-5
    fd = (so.assemble_kernel(x + h, t, mixed_spec).B - so.assemble_kernel(x - h, t, mixed_spec).B) / (2 * h)
    K = so.assemble_kernel(x, t, mixed_spec)
    outer = np.outer(K.W, K.V)
    assert np.abs(fd - outer).max() <= 1e-7 * np.abs(outer).max()


def test_validation_accepts_caption_soliton(one_soliton):
    assert so.validate_spectrum(one_soliton).passed


def test_validation_rejects_inner_real_pole():
    spec = so.SolitonSpectrum(real_solitons=((0.5, 0.1),))
    assert not so.validate_spectrum(spec).passed


def test_validation_rejects_singular_breather():
    spec = so.SolitonSpectrum(breathers=((1.2 - 0.01j, 0.1),))
    assert not so.validate_spectrum(spec).passed


def test_validation_rejects_wrong_phase():
    spec = so.SolitonSpectrum(real_solitons=((1.3, 0.1),))
    assert not so.validate_spectrum(spec).passed


def test_breather_velocity_real_and_fast():
    v = so.breather_velocity(1.2 + 0.01j)
    assert abs(v) > 1


def test_velocity_groups_sorted(mixed_spec):
    groups = so.velocities(mixed_spec)
    assert [g.zeta for g in groups] == sorted(g.zeta for g in groups)
    assert groups[0].soliton_indices == (0,)


def test_amplitude_velocity_law():
    for k in (1.1, 1.3, 2.0, 5.0, -0.4):
        c = so.real_constant_with_modulus(k, 0.2)
        p = so.one_soliton_parameters(k, c)
        assert so.speed_from_amplitude(p.amplitude) == pytest.approx(abs(p.velocity), abs=1e-12)


def test_one_soliton_needs_admissible_pole():
    with pytest.raises(ValueError):
        so.one_soliton_parameters(0.5, 0.1)


def test_d_constant_formula():
    lam, c = 1.5 * np.exp(0.3j), 0.2 + 0.1j
    lb = lam.conjugate()
    assert so.d_constant(lam, c) == pytest.approx((lb**2 - 1) / (OMEGA**2 * (OMEGA**2 - lb**2)) * c.conjugate())


def test_kernel_condition_reported(one_soliton):
    assert so.kernel_condition(0.0, 0.0, so.SolitonSpectrum()) == 1.0
    cond = so.kernel_condition(0.0, 0.0, one_soliton)
    assert 1.0 <= cond < 1e3
