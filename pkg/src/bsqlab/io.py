"""JSON configuration ingestion and CSV emission."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import scattering as sc
from .soliton import SolitonSpectrum, real_constant_with_modulus


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _complex(v, what: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict) and {"re", "im"} <= v.keys():
        return complex(float(v["re"]), float(v["im"]))
    raise ConfigError(f"{what}: expected a number, [re, im] or {{re, im}}, got {v!r}")


def _entry_complex(entry: dict, key: str, re_key: str, im_key: str, where: str) -> complex:
    if key in entry:
        return _complex(entry[key], f"{where}.{key}")
    if re_key in entry:
        return complex(float(entry[re_key]), float(entry.get(im_key, 0.0)))
    raise ConfigError(f"{where} needs '{key}' or '{re_key}'/'{im_key}'")


def spectrum_from_config(cfg: dict) -> SolitonSpectrum:
    """Read ``breathers`` and ``solitons``, optionally nested under ``spectrum``.

    Breathers: ``{lambda, c}`` or ``{re, im, c_re, c_im}``.
    Solitons: ``{k, c}``, ``{k, c_re, c_im}`` or ``{k, modulus}`` (constant chosen to make u real).
    """
    cfg = cfg.get("spectrum", cfg)
    breathers = []
    for i, b in enumerate(cfg.get("breathers", [])):
        where = f"breathers[{i}]"
        breathers.append((_entry_complex(b, "lambda", "re", "im", where), _entry_complex(b, "c", "c_re", "c_im", where)))
    solitons = []
    for i, s in enumerate(cfg.get("solitons", [])):
        k = float(s["k"])
        if "modulus" in s:
            c = real_constant_with_modulus(k, float(s["modulus"]))
        else:
            c = _entry_complex(s, "c", "c_re", "c_im", f"solitons[{i}]")
        solitons.append((k, c))
    return SolitonSpectrum(breathers=tuple(breathers), real_solitons=tuple(solitons))


def table_from_config(cfg: dict | None) -> sc.ReflectionTable:
    """``{"type": "zero"}``, ``{"type": "bump", ...BumpProfile fields}`` or ``{"type": "data", "data": {...}}``."""
    if not cfg or cfg == "zero":
        return sc.zero_table()
    if not isinstance(cfg, dict):
        raise ConfigError(f"reflection must be \"zero\" or an object, got {cfg!r}")
    kind = cfg.get("type", "zero")
    arc = tuple(cfg.get("arc", sc.DEFAULT_ARC))
    if kind == "zero":
        return sc.zero_table(arc)
    if kind == "bump":
        fields = {k: float(cfg[k]) for k in ("amplitude", "center", "width", "phase", "twist") if k in cfg}
        return sc.synthetic_table(sc.BumpProfile(**fields), arc, int(cfg.get("n_nodes", 48)))
    if kind == "data":
        return sc.build_reflection_table(data_from_config(cfg["data"]), arc, int(cfg.get("n_nodes", 32)))
    raise ConfigError(f"unknown reflection type {kind!r}")


def data_from_config(cfg: dict, base: Path | None = None) -> sc.InitialData:
    kind = cfg.get("type", cfg.get("family"))
    if kind == "zero":
        return sc.zero_data(float(cfg.get("support_radius", 1.0)))
    if kind == "gaussian":
        return sc.gaussian_data(float(cfg["amplitude"]), float(cfg.get("width", 1.0)), float(cfg.get("center", 0.0)),
                                float(cfg.get("u1_amplitude", 0.0)), float(cfg.get("support_radius", 8.0)))
    if kind == "seeded_soliton":
        k = float(cfg["k"])
        c = _complex(cfg["c"], "data.c") if "c" in cfg else real_constant_with_modulus(k, float(cfg.get("modulus", 0.1)))
        return sc.seeded_soliton_data(k, c, float(cfg.get("support_radius", 30.0)))
    if kind == "tabulated":
        path = Path(cfg["path"])
        if base is not None and not path.is_absolute():
            path = base / path
        radius = cfg.get("support_radius")
        return sc.read_tabulated_csv(str(path), None if radius is None else float(radius))
    raise ConfigError(f"unknown initial data type {kind!r}")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def write_csv(target, columns, rows) -> None:
    """Write rows (dicts) with a header; floats keep 17 significant digits."""
    own = isinstance(target, (str, Path))
    fh = open(target, "w", encoding="utf-8", newline="") if own else target
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])
    finally:
        if own:
            fh.close()


def read_csv(source) -> list[dict]:
    own = isinstance(source, (str, Path))
    fh = open(source, encoding="utf-8", newline="") if own else source
    try:
        return list(csv.DictReader(fh))
    finally:
        if own:
            fh.close()


def write_json(target, obj) -> None:
    text = json.dumps(obj, indent=2, default=_json_default)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text + "\n", encoding="utf-8")
    else:
        target.write(text + "\n")


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")
