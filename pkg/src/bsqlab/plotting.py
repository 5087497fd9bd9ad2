"""Line charts of field samples."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def line_chart(series: dict[str, tuple[list[float], list[float]]], path, xlabel: str = "x",
               ylabel: str = "u", title: str | None = None) -> Path:
    """Write one line per series; the format (SVG, PNG, PDF) follows the file extension."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, (xs, ys) in series.items():
        ax.plot(xs, ys, label=label, linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def series_by_time(rows, value: str = "u") -> dict[str, tuple[list[float], list[float]]]:
    """Group CSV-style rows (x, t, value) into one series per time."""
    out: dict[str, tuple[list[float], list[float]]] = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = out[f"t = {float(r['t']):g}"]
        xs.append(float(r["x"]))
        ys.append(float(r[value]))
    return dict(out)
