import math

import numpy as np
import pytest
from scipy.integrate import quad_vec

from bsqlab import scattering as sc
from bsqlab.io import write_csv
from bsqlab import soliton as so
from bsqlab.spectral import OMEGA, l_values, r_tilde


@pytest.fixture(scope="module")
def seeded(c13):
    data = sc.seeded_soliton_data(1.3, c13, support_radius=30.0)
    zeros = sc.locate_zeros(data, sc.Rectangle(1.05, 2.5, -0.3, 0.3))
    return data, zeros


def test_zero_data_generator_vanishes():
    assert np.all(sc.build_generator(0.3, 1.2 + 0.4j, sc.zero_data()) == 0)


def test_generator_trace_free(bump_data, rng):
    for _ in range(5):
        x = rng.uniform(-3, 3)
        k = complex(*rng.uniform(0.3, 2, 2))
        assert abs(np.trace(sc.build_generator(x, k, bump_data))) < 1e-12


def test_generator_rejects_sixth_roots(bump_data):
    with pytest.raises(sc.SingularVandermondeError):
        sc.build_generator(0.0, OMEGA, bump_data)


def test_generator_continuous_on_circle(bump_data):
    th = np.linspace(0.2, 0.8, 200)
    vals = np.array([sc.build_generator(0.5, np.exp(1j * t), bump_data) for t in th])
    assert np.all(np.isfinite(vals))
    assert np.abs(np.diff(vals, axis=0)).max() < 0.05


def test_zero_data_eigenfunctions_identity():
    ef = sc.solve_eigenfunctions(sc.zero_data(), 1.3 + 0.2j)
    for fn in (ef.X, ef.XA, ef.Y, ef.YA):
        assert np.abs(fn(0.2) - np.eye(3)).max() < 1e-14


def test_eigenfunction_determinant_constant(bump_data):
    ef = sc.solve_eigenfunctions(bump_data, np.exp(0.7j))
    for x in np.linspace(-8, 8, 9):
        assert abs(np.linalg.det(ef.X(x)) - 1) < 1e-10
        assert abs(np.linalg.det(ef.Y(x)) - 1) < 1e-10


def test_eigenfunction_solves_volterra_equation(bump_data, rng):
    k = np.exp(0.7j)
    L = l_values(k)
    ef = sc.solve_eigenfunctions(bump_data, k)
    R = bump_data.support_radius
    for x in rng.uniform(-3, 3, 5):
        def integrand(y):
            e = np.exp((x - y) * L)
            return (e[:, None] * (sc.build_generator(y, k, bump_data) @ ef.X(y))) / e[None, :]

        integral, _ = quad_vec(integrand, x, R, epsabs=1e-12, epsrel=1e-11)
        assert np.abs(ef.X(x) - (np.eye(3) - integral)).max() < 1e-8


def test_zero_data_scattering_identity():
    s, sA = sc.scattering_batch(sc.zero_data(), [1.3 + 0.2j, np.exp(0.4j)])
    assert np.abs(s - np.eye(3)).max() < 1e-13
    assert np.abs(sA - np.eye(3)).max() < 1e-13


def test_scattering_unimodular(bump_data):
    s, _ = sc.scattering_batch(bump_data, [1.3 + 0.2j, np.exp(0.4j), 0.6 - 0.3j])
    assert np.abs(np.linalg.det(s) - 1).max() < 1e-8


def test_adjoint_is_inverse_transpose(bump_data):
    ks = [1.4 + 0.3j, np.exp(0.9j)]
    s, sA = sc.scattering_batch(bump_data, ks)
    for j in range(len(ks)):
        assert np.abs(sA[j] - np.linalg.inv(s[j]).T).max() < 1e-8


def test_circle_paths_agree(bump_data):
    ks = np.exp(1j * np.array([0.4, 1.3, 2.5]))
    a, _ = sc.scattering_batch(bump_data, ks, method="transfer")
    b, _ = sc.scattering_batch(bump_data, ks, method="conj")
    assert np.abs(a - b).max() < 1e-10


def test_s11_symmetries(bump_data):
    k = 1.4 + 0.3j
    s = sc.scattering_matrices(bump_data, k).s
    s_rot = sc.scattering_matrices(bump_data, OMEGA / k).s
    sA = sc.scattering_matrices(bump_data, k).sA
    s_inv = sc.scattering_matrices(bump_data, 1 / np.conj(k)).s
    assert abs(s[0, 0] - s_rot[0, 0]) < 1e-7
    assert abs(sA[0, 0] - np.conj(s_inv[0, 0])) < 1e-7


def test_zero_data_reflection_vanishes():
    r1, r2 = sc.reflection_batch(sc.zero_data(), np.exp(1j * np.array([0.3, 2.0])))
    assert np.all(r1 == 0) and np.all(r2 == 0)


def test_reflection_limits_at_plus_minus_one(bump_data):
    for point in (1.0, -1.0):
        r1, r2 = sc.reflection_limit(bump_data, point)
        assert abs(r1 - 1) < 1e-6 and abs(r2 + 1) < 1e-6


def test_reflection_relation_on_circle(bump_data):
    ks = np.exp(1j * np.array([0.3, 1.2, 2.0, 2.8, -0.7]))
    pts = np.concatenate([1 / (OMEGA * ks), OMEGA * ks, OMEGA**2 * ks, 1 / ks])
    r1, r2 = sc.reflection_batch(bump_data, pts)
    n = len(ks)
    assert np.abs(r1[:n] + r2[n:2 * n] + r1[2 * n:3 * n] * r2[3 * n:]).max() < 1e-6


def test_reflection_r_tilde_symmetry(bump_data):
    ks = np.exp(1j * np.array([0.3, 1.2, 1.9, 2.8, -0.7, -2.2]))
    r1, r2 = sc.reflection_batch(bump_data, ks)
    assert np.abs(r2 - r_tilde(ks) * np.conj(r1)).max() < 1e-6


def test_reflection_rejects_off_contour(bump_data):
    with pytest.raises(ValueError):
        sc.reflection_coefficients(bump_data, 1.3 + 0.2j)


def test_winding_number_zero_free_cell(bump_data):
    rect = sc.Rectangle(1.5, 2.0, 0.2, 0.6)
    assert sc.winding_number(lambda ks: sc.s11_batch(bump_data, ks), rect) == 0


def test_zero_data_has_no_zeros():
    assert sc.locate_zeros(sc.zero_data(), sc.Rectangle(1.05, 2.5, -0.3, 0.3)) == []


def test_seeded_soliton_zero(seeded):
    _, zeros = seeded
    assert len(zeros) == 1
    assert abs(zeros[0] - 1.3) < 1e-2
    assert zeros[0].imag == 0


def test_seeded_soliton_constant(seeded, c13):
    data, zeros = seeded
    c = sc.residue_constant(data, zeros[0])
    assert abs(c - c13) <= 0.05 * abs(c13)
    m = so.reality_measure(zeros[0].real, c)
    assert m.real >= -1e-10


def test_residue_definitions_agree(seeded):
    data, zeros = seeded
    c = sc.residue_constant(data, zeros[0])
    general = sc.residue_constant_general(data, zeros[0])
    assert abs(c - general.c) < 1e-4


def test_zero_table_flagged():
    tab = sc.zero_table()
    assert tab.zero_flag
    assert np.all(tab.r1(tab.arc_nodes) == 0) and np.all(tab.dlog(tab.arc_nodes) == 0)


def test_synthetic_table_positive_factor(bump_table):
    th = bump_table.arc_nodes
    inside = (th > math.pi / 2) & (th < 2 * math.pi / 3)
    fac = 1 + bump_table.r1_values * bump_table.r2_values
    assert np.all(np.abs(fac.imag) < 1e-12)
    assert np.all(fac.real[inside] >= 1)
    assert np.any(fac.real[inside] > 1)


def test_table_dlog_integrates_to_log_jump(bump_table):
    from scipy.integrate import quad

    a, b = bump_table.arc
    total = quad(lambda p: bump_table.dlog(p).real, a, b, epsabs=1e-13, limit=200)[0]
    jump = (bump_table.log_factor(b) - bump_table.log_factor(a)).real
    assert abs(total - jump) < 1e-8


def test_table_symmetry_by_construction(bump_table):
    ks = np.exp(1j * bump_table.arc_nodes)
    assert np.abs(bump_table.r2_values - r_tilde(ks) * np.conj(bump_table.r1_values)).max() < 1e-6


def test_table_rejects_angles_outside_arc(bump_table):
    with pytest.raises(ValueError):
        bump_table.r1(0.1)


def test_tabulated_data_round_trip(tmp_path):
    xs = np.linspace(-6, 6, 241)
    u0 = 0.2 * np.exp(-xs**2)
    path = tmp_path / "data.csv"
    write_csv(path, ["x", "u0", "u1"], [{"x": x, "u0": u, "u1": 0.0} for x, u in zip(xs, u0)])
    tab = sc.read_tabulated_csv(str(path))
    ref = sc.gaussian_data(0.2, width=1.0, support_radius=6.0)
    k = np.exp(0.8j)
    assert np.abs(sc.scattering_matrices(tab, k).s - sc.scattering_matrices(ref, k).s).max() < 1e-5
