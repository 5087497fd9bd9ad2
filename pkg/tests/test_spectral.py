import cmath
import math

import numpy as np
import pytest

from bsqlab import spectral as sp

W = sp.OMEGA


def test_kernels_at_one():
    l, z = sp.l_values(1.0), sp.z_values(1.0)
    assert l[2] == pytest.approx(1j / math.sqrt(3), abs=1e-15)
    assert z[2] == pytest.approx(1j / (2 * math.sqrt(3)), abs=1e-15)


def test_kernels_sum_to_zero(rng):
    ks = rng.normal(size=20) + 1j * rng.normal(size=20)
    assert np.abs(sp.l_values(ks).sum(axis=-1)).max() < 1e-13
    assert np.abs(sp.z_values(ks).sum(axis=-1)).max() < 1e-13


def test_rotation_shifts_index(rng):
    ks = rng.normal(size=20) + 1j * rng.normal(size=20)
    assert np.allclose(sp.l_values(W * ks), np.roll(sp.l_values(ks), -1, axis=-1), atol=1e-13)


def test_phase_identities(rng):
    for _ in range(20):
        z = rng.uniform(1.01, 5)
        k = complex(*rng.normal(size=2))
        assert abs(sp.phi(3, 1, z, k) + sp.phi(2, 1, z, W**2 * k)) <= 1e-13 * max(1, abs(sp.phi(3, 1, z, k)))
        assert abs(sp.phi(3, 2, z, k) - sp.phi(2, 1, z, W * k)) <= 1e-13 * max(1, abs(sp.phi(3, 2, z, k)))


def test_phase_needs_ordered_indices():
    with pytest.raises(ValueError):
        sp.phi(1, 2, 2.0, 1.3)


def test_theta_is_t_times_phi():
    x, t, k = 3.0, 1.5, 0.7 + 0.2j
    assert sp.theta(2, 1, x, t, k) == pytest.approx(t * sp.phi(2, 1, x / t, k), rel=1e-13)


def test_saddle_at_two():
    s = sp.saddle_points(2.0)
    assert abs(abs(s.k1) - 1) <= 1e-12
    assert abs(s.k3 * s.k4 - 1) <= 1e-12
    val = -1j * s.k1 * s.z_star
    assert abs(val.imag) < 1e-12 and val.real > 0


def test_saddle_limit_at_one():
    k1 = sp.saddle_points(1.0 + 1e-12).k1
    assert abs(k1 - (-2 + 2 * math.sqrt(3) * 1j) / 4) < 1e-5


def test_saddle_is_stationary():
    for z in (1.2, 2.0, 7.5):
        s = sp.saddle_points(z)
        h = 1e-6
        d = (sp.phi(2, 1, z, s.k1 + h) - sp.phi(2, 1, z, s.k1 - h)) / (2 * h)
        assert abs(d) <= 1e-6


def test_saddle_rejects_left_sector():
    with pytest.raises(sp.SectorError):
        sp.saddle_points(0.5)


def test_second_order_coefficient_matches_finite_difference():
    z = 2.5
    k1 = sp.saddle_points(z).k1
    h = 1e-4
    fd = (sp.phi(2, 1, z, k1 + h) - 2 * sp.phi(2, 1, z, k1) + sp.phi(2, 1, z, k1 - h)) / (2 * h * h)
    assert abs(sp.second_order_coefficient(z, k1) - fd) < 1e-6


@pytest.mark.parametrize("k,region", [(1.3, "D2_real"), (-0.5, "D2_real"), (1.2 + 0.01j, "D_reg"),
                                      (1.2 - 0.01j, "D_sing"), (0.5, "other"), (1j, "other")])
def test_classify_region(k, region):
    assert sp.classify_region(k) == region


def test_orbit_sizes():
    assert len(sp.symmetry_orbit(1.3)) == 6
    orbit = sp.symmetry_orbit(1.2 + 0.01j)
    assert len(orbit) == 12
    for k in orbit:
        assert min(abs(1 / k - q) for q in orbit) < 1e-12


def test_orbit_rejects_zero():
    with pytest.raises(sp.SpectralDomainError):
        sp.symmetry_orbit(0)


def test_sixth_root_detection():
    assert sp.near_sixth_root(cmath.exp(1j * math.pi / 3) * 1.001, 1e-2)
    assert not sp.near_sixth_root(1.3, 1e-2)
