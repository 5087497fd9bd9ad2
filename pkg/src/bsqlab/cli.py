"""Command-line entry point: ``bsqlab <subcommand> [--config PATH] [--out PATH]``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import harness
from . import scattering as sc
from . import soliton as so
from .io import (ConfigError, data_from_config, load_config, spectrum_from_config, table_from_config,
                 write_csv, write_json)

log = logging.getLogger("bsqlab")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2

NUMERICAL_ERRORS = (sc.AccuracyError, sc.SpectralSingularityError, sc.MultipleZeroError, sc.ZeroSearchError,
                    sc.DegenerateZeroError, sc.DefinitionMismatchError, so.SingularKernelError,
                    asy.RHSolvabilityError, ArithmeticError)


def _emit(args, columns, rows, meta=None):
    if args.format == "json":
        payload = {"rows": rows} if meta is None else {"rows": rows, **meta}
        write_json(args.out or sys.stdout, payload)
    else:
        write_csv(args.out or sys.stdout, columns, rows)


ZETA_FLOOR = 1 + 1e-6


def _zetas(cfg, default=2.0):
    """Rays from config, raised to ZETA_FLOOR where the saddles would merge."""
    raw = cfg.get("zeta", default)
    out = []
    for z in map(float, raw if isinstance(raw, list) else [raw]):
        if z < ZETA_FLOOR:
            log.warning("zeta=%g clamped to %g", z, ZETA_FLOOR)
            z = ZETA_FLOOR
        out.append(z)
    return out


def _times(cfg, default=(10.0, 100.0)):
    raw = cfg.get("t_values", cfg.get("t", list(default)))
    return [float(t) for t in (raw if isinstance(raw, list) else [raw])]


def _grid(cfg):
    g = cfg.get("grid", {})
    return harness.GridSpec(float(g.get("x_min", -20)), float(g.get("x_max", 20)), int(g.get("n_x", 401)),
                            tuple(g.get("t_values", [0.0])))


def _soliton_rows(cfg):
    spec = spectrum_from_config(cfg)
    report = so.validate_spectrum(spec)
    if not report.passed:
        failed = [f"{name} ({detail})" if detail else name for name, ok, detail in report.checks if not ok]
        raise ConfigError("spectrum fails validation: " + "; ".join(failed))
    grid = _grid(cfg)
    rows = []
    for t in grid.t_values:
        for x in grid.xs:
            s = so.u_multisoliton(x, t, spec)
            rows.append({"x": s.x, "t": s.t, "u": s.u, "provenance": s.provenance})
    return rows


def cmd_soliton(args, cfg):
    _emit(args, ["x", "t", "u", "provenance"], _soliton_rows(cfg))
    return EXIT_OK


def cmd_scatter(args, cfg):
    base = Path(args.config).parent if args.config else None
    data = data_from_config(cfg.get("data", {"type": "zero"}), base)
    rows = []
    region = cfg.get("region")
    if region:
        zeros = sc.locate_zeros(data, sc.Rectangle(*map(float, region)))
        for z in zeros:
            c = sc.residue_constant(data, z)
            rows.append({"kind": "zero", "k_re": z.real, "k_im": z.imag, "c_re": c.real, "c_im": c.imag})
    n = int(cfg.get("contour_nodes", 32))
    th = sc.chebyshev_angles(tuple(cfg.get("arc", (0.05, math.pi - 0.05))), n)
    ks = np.exp(1j * th)
    keep = np.array([not sc.near_sixth_root(k, sc.EXCLUSION_RADIUS) for k in ks])
    r1, r2 = sc.reflection_batch(data, ks[keep])
    for t, a, b in zip(th[keep], r1, r2):
        rows.append({"kind": "reflection", "theta": t, "r1_re": a.real, "r1_im": a.imag,
                     "r2_re": b.real, "r2_im": b.imag})
    cols = ["kind", "k_re", "k_im", "c_re", "c_im", "theta", "r1_re", "r1_im", "r2_re", "r2_im"]
    _emit(args, cols, rows)
    return EXIT_OK


def cmd_modulate(args, cfg):
    spec = spectrum_from_config(cfg)
    table = table_from_config(cfg.get("reflection"))
    rows = []
    for z in _zetas(cfg):
        ctx = asy.build_modulation(z, table, spec)
        rows.append({"zeta": ctx.zeta, "k1_re": ctx.saddle.k1.real, "k1_im": ctx.saddle.k1.imag, "nu": ctx.nu,
                     "delta_modulus": ctx.delta_modulus_closed_form(), "arg_d0_at_t1": ctx.arg_d0(1.0)})
    _emit(args, ["zeta", "k1_re", "k1_im", "nu", "delta_modulus", "arg_d0_at_t1"], rows)
    return EXIT_OK


def cmd_asym(args, cfg):
    spec = spectrum_from_config(cfg)
    table = table_from_config(cfg.get("reflection"))
    eps = float(cfg.get("epsilon_S", 0.05))
    rows = []
    for z in _zetas(cfg):
        ctx = asy.build_modulation(z, table, spec)
        for t in _times(cfg):
            x = z * t
            usol = asy.u_sol(x, t, spec, ctx).u
            urad = asy.u_rad(x, t, spec, ctx).u / math.sqrt(t) if not table.zero_flag else 0.0
            lw = asy.sector2_leading(z, t, ctx, spec, epsilon=eps, warn=log.warning)
            rows.append({"zeta": z, "t": t, "u_sol": usol, "u_rad_over_sqrt_t": urad, "u_leading": lw.u_leading,
                         "A": lw.amplitude_A, "alpha": lw.phase_alpha})
    _emit(args, ["zeta", "t", "u_sol", "u_rad_over_sqrt_t", "u_leading", "A", "alpha"], rows)
    return EXIT_OK


def cmd_verify(args, cfg):
    suite = harness.SuiteConfig(seed=args.seed, include_scattering=not cfg.get("skip_scattering", False),
                                faults=frozenset(cfg.get("faults", [])))
    reports = harness.run_invariant_suite(suite)
    rows = [{"check_name": r.check_name, "measured": r.measured, "tolerance": r.tolerance, "passed": r.passed,
             "runtime_ms": r.runtime_ms} for r in reports]
    _emit(args, ["check_name", "measured", "tolerance", "passed", "runtime_ms"], rows)
    for r in reports:
        log.info(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VALIDATION


def cmd_compare(args, cfg):
    spec = spectrum_from_config(cfg)
    table = table_from_config(cfg.get("reflection"))
    res = harness.compare_asymptotics(spec, table, _zetas(cfg)[0], _times(cfg),
                                      tuple(cfg.get("offsets", [0.0])))
    cols = ["zeta", "t", "x", "u_exact", "u_sol", "u_rad_over_sqrt_t", "prediction", "deviation", "flag"]
    _emit(args, cols, res.rows, {"max_deviation": res.max_deviation, "radiation_slope": res.radiation_slope})
    if res.radiation_slope is not None:
        log.info("fitted radiation slope %.6f", res.radiation_slope)
    if res.max_deviation is not None and res.max_deviation > 1e-8:
        log.error("soliton term deviates from the exact solution by %.3e", res.max_deviation)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_plot(args, cfg):
    from .plotting import line_chart, series_by_time

    rows = _soliton_rows(cfg)
    figure = Path(args.out or "soliton.svg")
    data_path = figure.with_suffix(".csv")
    write_csv(data_path, ["x", "t", "u", "provenance"], rows)
    line_chart(series_by_time(rows), figure, title=cfg.get("title"))
    log.info("wrote %s and %s", figure, data_path)
    return EXIT_OK


COMMANDS = {"soliton": cmd_soliton, "scatter": cmd_scatter, "modulate": cmd_modulate, "asym": cmd_asym,
            "verify": cmd_verify, "compare": cmd_compare, "plot": cmd_plot}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bsqlab", description="Solitons, scattering data and long-time asymptotics "
                                "for the Boussinesq equation u_tt = u_xx + (u^2)_xx + u_xxxx.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", help="output path (stdout when omitted; figure path for plot)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else {}
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, NUMERICAL_ERRORS):
            log.error("numerical failure: %s", exc)
            return EXIT_NUMERICAL
        log.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
