import io
import json

import mpmath
import numpy as np
import pytest

from bsqlab import cli, harness
from bsqlab import scattering as sc
from bsqlab import soliton as so
from bsqlab.io import read_csv


def test_grid_validation():
    with pytest.raises(harness.GridError):
        harness.GridSpec(-1, 1, 5, (0.0,))
    with pytest.raises(harness.GridError):
        harness.GridSpec(-1, 1, 11, (1.0, 0.5))


def test_residual_of_zero_field():
    rep = harness.pde_residual(lambda x, t: 0, harness.GridSpec(-1, 1, 9, (0.0,)), 0.1)
    assert rep.passed and rep.details["residual_h"] == 0


def test_residual_order_for_one_soliton(c13):
    p = so.one_soliton_parameters(1.3, c13)

    def u(x, t):
        return p.amplitude * mpmath.sech(mpmath.sqrt(mpmath.mpf(p.amplitude) / 6) * (x - p.x0 - p.velocity * t)) ** 2

    rep = harness.pde_residual(u, harness.GridSpec(-15, 5, 9, (0.0, 2.0)), 0.1)
    assert rep.passed
    assert rep.details["order"] >= 4


def test_residual_detects_non_solution():
    rep = harness.pde_residual(lambda x, t: mpmath.exp(-(x - t) ** 2), harness.GridSpec(-2, 2, 9, (0.0,)), 0.1)
    assert not rep.passed


def test_report_pass_rule():
    assert harness.VerificationReport("a", 1.0, 1.0).passed
    assert not harness.VerificationReport("a", 1.1, 1.0).passed


def test_suite_passes_on_defaults():
    reports = harness.run_invariant_suite(harness.SuiteConfig(include_scattering=False))
    assert all(r.passed for r in reports), [r.line() for r in reports if not r.passed]


def test_suite_fault_injection_isolated():
    reports = harness.run_invariant_suite(harness.SuiteConfig(include_scattering=False, faults=frozenset({"beta"})))
    failed = [r.check_name for r in reports if not r.passed]
    assert failed == ["model_constants"]


def test_suite_deterministic():
    a = harness.run_invariant_suite(harness.SuiteConfig(include_scattering=False, seed=7))
    b = harness.run_invariant_suite(harness.SuiteConfig(include_scattering=False, seed=7))
    assert [(r.check_name, r.measured) for r in a] == [(r.check_name, r.measured) for r in b]


def test_compare_reflectionless_two_soliton():
    spec = harness.canned_spectra()["two_soliton"]
    res = harness.compare_asymptotics(spec, None, so.soliton_velocity(1.8), [5.0, 10.0], offsets=(-3.0, 0.0, 3.0))
    assert res.max_deviation <= 1e-8
    assert all(r["flag"] == "exact" for r in res.rows)


def test_compare_synthetic_slope(bump_table):
    res = harness.compare_asymptotics(so.SolitonSpectrum(), bump_table, 2.0, [10.0, 100.0, 1000.0])
    assert abs(res.radiation_slope + 0.5) <= 1e-3
    assert all(r["flag"] == "prediction-only" for r in res.rows)


def test_near_soliton_report():
    spec = so.SolitonSpectrum(real_solitons=tuple((k, so.real_constant_with_modulus(k, 0.1)) for k in (1.5, 4.0)))
    assert all(r.passed for r in harness.near_soliton_report(spec, 50.0))


# ---------------------------------------------------------------- CLI


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_cli_verify_exit_zero(tmp_path):
    cfg = write(tmp_path, "v.json", {"skip_scattering": True})
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v.csv")]) == 0
    rows = read_csv(tmp_path / "v.csv")
    assert rows and all(r["passed"] == "true" for r in rows)


def test_cli_verify_reports_injected_fault(tmp_path):
    cfg = write(tmp_path, "v.json", {"skip_scattering": True, "faults": ["beta"]})
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v.csv")]) == 1


def test_cli_soliton_csv(tmp_path):
    cfg = write(tmp_path, "one.json", {"solitons": [{"k": 1.3, "modulus": 0.1}],
                                       "grid": {"x_min": -5, "x_max": 5, "n_x": 11, "t_values": [0, 1]}})
    out = tmp_path / "u.csv"
    assert cli.main(["soliton", "--config", cfg, "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == "x,t,u,provenance"
    rows = read_csv(out)
    assert len(rows) == 22 and rows[0]["provenance"] == "exact_soliton"


def test_cli_soliton_rejects_invalid_spectrum(tmp_path):
    cfg = write(tmp_path, "bad.json", {"solitons": [{"k": 0.5, "c": 0.1}]})
    assert cli.main(["soliton", "--config", cfg, "--out", str(tmp_path / "u.csv")]) == 1


def test_cli_numerical_failure_exit_two(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise sc.AccuracyError("forced", 1.0)

    monkeypatch.setattr(so, "u_multisoliton", boom)
    cfg = write(tmp_path, "one.json", {"solitons": [{"k": 1.3, "modulus": 0.1}],
                                       "grid": {"x_min": -1, "x_max": 1, "n_x": 9}})
    assert cli.main(["soliton", "--config", cfg, "--out", str(tmp_path / "u.csv")]) == 2


def test_cli_asym_columns(tmp_path):
    cfg = write(tmp_path, "sector2.json", {"zeta": [1.5, 2.0], "t_values": [10, 100], "reflection": {"type": "bump"}})
    out = tmp_path / "a.csv"
    assert cli.main(["asym", "--config", cfg, "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "zeta,t,u_sol,u_rad_over_sqrt_t,u_leading,A,alpha"
    rows = read_csv(out)
    for r in rows:
        assert float(r["u_rad_over_sqrt_t"]) == pytest.approx(float(r["u_leading"]), abs=1e-8)


def test_cli_modulate_json(tmp_path):
    cfg = write(tmp_path, "m.json", {"zeta": 2.0, "reflection": {"type": "bump"}})
    out = tmp_path / "m.json.out"
    assert cli.main(["modulate", "--config", cfg, "--format", "json", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["rows"][0]["nu"] < 0


def test_cli_compare(tmp_path):
    cfg = write(tmp_path, "c.json", {"solitons": [{"k": 1.3, "modulus": 0.1}, {"k": 1.8, "modulus": 0.1}],
                                     "zeta": 1.2, "t_values": [5, 10]})
    assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "c.csv")]) == 0


def test_cli_scatter(tmp_path):
    cfg = write(tmp_path, "s.json", {"data": {"type": "gaussian", "amplitude": 0.3, "support_radius": 8},
                                     "contour_nodes": 8})
    out = tmp_path / "s.csv"
    assert cli.main(["scatter", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 8 and all(r["kind"] == "reflection" for r in rows)


def test_cli_plot_writes_figure_and_data(tmp_path):
    cfg = write(tmp_path, "p.json", {"solitons": [{"k": 1.3, "modulus": 0.1}],
                                     "grid": {"x_min": -20, "x_max": 20, "n_x": 41, "t_values": [0, 10]}})
    fig = tmp_path / "u.svg"
    assert cli.main(["plot", "--config", cfg, "--out", str(fig)]) == 0
    assert fig.read_text().lstrip().startswith("<?xml")
    assert (tmp_path / "u.csv").exists()


def test_cli_missing_config_is_validation_error(tmp_path):
    assert cli.main(["soliton", "--config", str(tmp_path / "nope.json")]) == 1


def test_cli_stdout(capsys):
    assert cli.main(["modulate"]) == 0
    assert capsys.readouterr().out.startswith("zeta,")


def test_cli_accepts_flat_keys_and_nested_spectrum(tmp_path):
    c = so.real_constant_with_modulus(1.3, 0.1)
    cfg = write(tmp_path, "a.json", {"spectrum": {"solitons": [{"k": 1.3, "c_re": c.real, "c_im": c.imag}]},
                                     "zeta": 1.2, "t": 10, "reflection": "zero", "epsilon_S": 0.05})
    out = tmp_path / "a.csv"
    assert cli.main(["asym", "--config", cfg, "--out", str(out)]) == 0
    assert len(read_csv(out)) == 1


def test_cli_clamps_zeta_below_one(tmp_path, caplog):
    cfg = write(tmp_path, "m.json", {"zeta": 0.9})
    assert cli.main(["modulate", "--config", cfg, "--out", str(tmp_path / "m.csv")]) == 0
    assert float(read_csv(tmp_path / "m.csv")[0]["zeta"]) == cli.ZETA_FLOOR
    assert "clamped" in caplog.text
