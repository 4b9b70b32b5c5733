"""Run persistence: delimited tables, plot data, figures, manifests.

All floats print with 17 significant digits so a written table read back
reproduces the doubles bit for bit, and files are written with fixed
newline and key ordering so identical runs produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import platform
from pathlib import Path

import numpy as np

__all__ = [
    "format_cell",
    "write_csv",
    "write_plot_data",
    "write_manifest",
    "render_figures",
    "sha256_file",
    "to_jsonable",
]


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} does not match header width {len(header)}")
        lines.append(",".join(format_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def write_plot_data(path, rows, series_keys) -> Path:
    """Long-format table (x, series, value), one row per curve point."""
    out = []
    for row in rows:
        for key in series_keys:
            out.append((row["x"], key, row[key]))
    return write_csv(path, ["x", "series", "value"], out)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def to_jsonable(value):
    """Recursively coerce numpy scalars, dataclasses, and containers into JSON types."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return None if math.isnan(v) else v
    return value


def write_manifest(path, *, config_digest, seed, workers, wall_time_s, diagnostics, outputs) -> Path:
    """Reproducibility record; every sibling output appears with its digest."""
    from . import __version__

    path = Path(path)
    data = {
        "config_digest": config_digest,
        "seed": int(seed),
        "workers": int(workers),
        "versions": {
            "bigjump": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "wall_time_s": round(float(wall_time_s), 3),
        "diagnostics": to_jsonable(diagnostics),
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
    }
    path.write_text(
        json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8", newline="\n"
    )
    return path


def _finite_curve(xs, ys):
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    keep = np.isfinite(ys) & (ys > 0.0)
    return xs[keep], ys[keep]


def render_figures(out_dir, rows, stem, extra_curves=()) -> list[Path]:
    """Survival-curve and ratio figures next to the tables.

    extra_curves: (label, key) pairs for additional probability columns
    (the ruin path adds its own curve this way).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    xs = [r["x"] for r in rows]
    written = []

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    lo = [r["ci_low"] for r in rows]
    hi = [r["ci_high"] for r in rows]
    ax.fill_between(xs, lo, hi, alpha=0.25, color="tab:blue", label="95% interval")
    for label, key, style in (
        ("empirical", "p_hat", "o-"),
        ("per-epoch series", "p_series", "s--"),
        ("closed form", "p_closed", "^:"),
    ):
        cx, cy = _finite_curve(xs, [r[key] for r in rows])
        if cy.size:
            ax.plot(cx, cy, style, label=label, markersize=4)
    for label, key in extra_curves:
        cx, cy = _finite_curve(xs, [r[key] for r in rows])
        if cy.size:
            ax.plot(cx, cy, "d-.", label=label, markersize=4)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("level x")
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    curve_path = out_dir / f"{stem}_curves.png"
    fig.savefig(curve_path, dpi=110)
    plt.close(fig)
    written.append(curve_path)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.axhspan(0.8, 1.25, alpha=0.15, color="tab:green", label="target band")
    ax.axhline(1.0, color="black", linewidth=0.8)
    for label, key in (
        ("empirical / series", "ratio_emp_series"),
        ("empirical / closed form", "ratio_emp_closed"),
    ):
        cx, cy = _finite_curve(xs, [r[key] for r in rows])
        if cy.size:
            ax.plot(cx, cy, "o-", label=label, markersize=4)
    ax.set_xscale("log")
    ax.set_xlabel("level x")
    ax.set_ylabel("ratio")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    ratio_path = out_dir / f"{stem}_ratios.png"
    fig.savefig(ratio_path, dpi=110)
    plt.close(fig)
    written.append(ratio_path)
    return written
