"""Batch front end: config in, tables, figures, and manifests out.

Subcommands: ``tail`` (rare-set entrance curve with series and closed-form
comparisons), ``ruin`` (adds the ruin curve and its asymptote), ``index``
(tail-index estimator report), ``validate`` (the acceptance suite), and
``geometry`` (rare-set diagnostics).  Exit codes: 0 success, 1 failed
validation criteria, 2 schema errors, 3 model-condition refusals, 4 I/O.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from ._rng import stream
from .asymptotics import (
    closed_form_inputs,
    evaluate_closed_form,
    moment_report,
    per_epoch_series,
    ruin_asymptotic,
    validation_report,
)
from .claims import mu_limit
from .config import ConfigError, ExperimentConfig, canonical_form, config_digest, load_config
from .dependence import Comonotone, HMixture, comonotone_product_law
from .engine import PremiumSpec, ruin_and_tail
from .report import render_figures, to_jsonable, write_csv, write_manifest, write_plot_data
from .sets import projection
from .tails import class_diagnostics, hill_estimate, karamata_lower_estimate, matuszewska_estimate

__all__ = ["main"]

TAIL_COLUMNS = [
    "x",
    "n",
    "p_hat",
    "ci_low",
    "ci_high",
    "p_series",
    "p_closed",
    "ratio_emp_series",
    "ratio_emp_closed",
]
RUIN_COLUMNS = [
    "x",
    "n",
    "p_hat",
    "ci_low",
    "ci_high",
    "psi_hat",
    "psi_ci_low",
    "psi_ci_high",
    "p_series",
    "p_closed",
    "ratio_emp_series",
    "ratio_emp_closed",
    "ruin_asymptotic",
]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bigjump",
        description="Rare-event Monte Carlo for discounted heavy-tailed claim sums.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="JSON experiment config")
        p.add_argument("--seed", type=int, metavar="U64", help="override mc.seed")
        p.add_argument("--samples", type=int, metavar="N", help="override mc.samples")
        p.add_argument("--workers", type=int, metavar="K", help="override worker count")
        p.add_argument("--out", metavar="DIR", help="override the output directory")

    common(sub.add_parser("tail", help="rare-set entrance curve vs asymptotics"))
    common(sub.add_parser("ruin", help="ruin curve with premiums vs asymptotics"))
    common(sub.add_parser("index", help="tail-index estimator report"))
    geometry = sub.add_parser("geometry", help="rare-set diagnostics report")
    common(geometry)
    validate = sub.add_parser("validate", help="run the acceptance criteria")
    common(validate)
    validate.add_argument(
        "--tolerance-scale",
        type=float,
        default=1.0,
        metavar="S",
        help="shrink or widen the statistical bands about their targets",
    )
    validate.add_argument("--list", action="store_true", help="print criterion names and exit")
    validate.add_argument(
        "--only",
        action="append",
        metavar="NAME",
        help="run only the named criterion (repeatable)",
    )
    return parser


def _resolve_workers(args, cfg: ExperimentConfig | None) -> int:
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("mc.workers: must be >= 1")
        return args.workers
    env = os.environ.get("BIGJUMP_WORKERS")
    if env is not None:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError("BIGJUMP_WORKERS: expected a positive integer") from None
        if workers < 1:
            raise ConfigError("BIGJUMP_WORKERS: expected a positive integer")
        return workers
    if cfg is not None and cfg.mc.workers is not None:
        return cfg.mc.workers
    return 1


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("config: --config is required for this command")
    return load_config(args.config)


def _resolve_run(args, cfg: ExperimentConfig):
    """Apply flag overrides; returns (seed, samples, workers, out_dir)."""
    seed = cfg.mc.seed if args.seed is None else args.seed
    if seed < 0:
        raise ConfigError("mc.seed: must be >= 0")
    samples = cfg.mc.samples if args.samples is None else args.samples
    if samples < 1:
        raise ConfigError("mc.samples: must be >= 1")
    workers = _resolve_workers(args, cfg)
    out_dir = Path(args.out or cfg.outputs.directory)
    return seed, samples, workers, out_dir


def _series_budget(cfg: ExperimentConfig, samples: int) -> int:
    if cfg.mc.series_samples is not None:
        return cfg.mc.series_samples
    return min(samples, 1_000_000)


def _require_model(cfg: ExperimentConfig):
    if cfg.bundle is None:
        raise ConfigError("dependence: this command needs a model bundle")
    if cfg.rare_set is None:
        raise ConfigError("set: this command needs a rare-set section")
    if not cfg.mc.x_grid:
        raise ConfigError("mc.x_grid: this command needs a non-empty level grid")


def cmd_tail(args) -> int:
    cfg = _load(args)
    _require_model(cfg)
    seed, samples, workers, out_dir = _resolve_run(args, cfg)
    started = time.perf_counter()
    report = validation_report(
        cfg.bundle,
        cfg.rare_set,
        cfg.mc.x_grid,
        samples,
        seed=seed,
        n_per_epoch=_series_budget(cfg, samples),
        tol=cfg.mc.series_tol,
        workers=workers,
    )
    rows = report["rows"]
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        write_csv(out_dir / "tail_report.csv", TAIL_COLUMNS, [[r[c] for c in TAIL_COLUMNS] for r in rows]),
        write_plot_data(out_dir / "tail_plot.csv", rows, TAIL_COLUMNS[2:]),
    ]
    if "png" in cfg.outputs.formats:
        written += render_figures(out_dir, rows, "tail")
    write_manifest(
        out_dir / "manifest.json",
        config_digest=config_digest(cfg),
        seed=seed,
        workers=workers,
        wall_time_s=time.perf_counter() - started,
        diagnostics={"command": "tail", "samples": samples, **report["diagnostics"]},
        outputs=written,
    )
    print(f"wrote {len(written) + 1} files to {out_dir}")
    return 0


def cmd_ruin(args) -> int:
    cfg = _load(args)
    if cfg.bundle is None:
        raise ConfigError("dependence: this command needs a model bundle")
    if cfg.ruin is None:
        raise ConfigError("set: ruin runs need preset ruin_per_line or ruin_aggregate")
    if not cfg.mc.x_grid:
        raise ConfigError("mc.x_grid: this command needs a non-empty level grid")
    seed, samples, workers, out_dir = _resolve_run(args, cfg)
    premiums = cfg.premiums or PremiumSpec(tuple(0.0 for _ in range(cfg.bundle.dim)))
    started = time.perf_counter()
    psi, tail = ruin_and_tail(
        cfg.bundle,
        premiums,
        cfg.ruin,
        cfg.mc.x_grid,
        samples,
        policy=cfg.mc.truncation,
        seed=seed,
        workers=workers,
    )
    S = cfg.rare_set
    try:
        inputs = closed_form_inputs(cfg.bundle, S)
    except (ValueError, TypeError):
        inputs = None
    rows = []
    for i, x in enumerate(tail.x_grid):
        series = per_epoch_series(
            cfg.bundle, S, x, n_per_epoch=_series_budget(cfg, samples), tol=cfg.mc.series_tol, seed=seed
        )
        closed = evaluate_closed_form(inputs, x) if inputs is not None else math.nan
        rows.append(
            {
                "x": float(x),
                "n": samples,
                "p_hat": tail.p_hat[i],
                "ci_low": tail.ci_low[i],
                "ci_high": tail.ci_high[i],
                "psi_hat": psi.p_hat[i],
                "psi_ci_low": psi.ci_low[i],
                "psi_ci_high": psi.ci_high[i],
                "p_series": series.value,
                "p_closed": closed,
                "ratio_emp_series": tail.p_hat[i] / series.value if series.value > 0.0 else math.nan,
                "ratio_emp_closed": tail.p_hat[i] / closed if closed > 0.0 else math.nan,
                "ruin_asymptotic": ruin_asymptotic(inputs, x) if inputs is not None else math.nan,
            }
        )
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        write_csv(out_dir / "ruin_report.csv", RUIN_COLUMNS, [[r[c] for c in RUIN_COLUMNS] for r in rows]),
        write_plot_data(out_dir / "ruin_plot.csv", rows, RUIN_COLUMNS[2:]),
    ]
    if "png" in cfg.outputs.formats:
        written += render_figures(out_dir, rows, "ruin", extra_curves=[("ruin", "psi_hat")])
    diagnostics = {
        "command": "ruin",
        "samples": samples,
        "regime": cfg.bundle.regime,
        "ruin_set": {"kind": cfg.ruin.kind, "l": list(cfg.ruin.l)},
        "premium_rates": list(premiums.rates),
        "mean_epochs": tail.mean_epochs,
        "max_residual_discount": tail.max_residual_discount,
        "truncation_suspect": tail.truncation_suspect,
        "moment": moment_report(cfg.bundle),
    }
    write_manifest(
        out_dir / "manifest.json",
        config_digest=config_digest(cfg),
        seed=seed,
        workers=workers,
        wall_time_s=time.perf_counter() - started,
        diagnostics=diagnostics,
        outputs=written,
    )
    print(f"wrote {len(written) + 1} files to {out_dir}")
    return 0


def _estimate_dict(est) -> dict:
    return {
        "value": est.value,
        "standard_error": est.standard_error,
        "method": est.method,
        "diverging": est.diverging,
        "details": est.details,
    }


def cmd_index(args) -> int:
    cfg = _load(args)
    if cfg.index is None:
        raise ConfigError("index: this command needs an index section")
    seed, samples, workers, out_dir = _resolve_run(args, cfg)
    started = time.perf_counter()
    report: dict = {"n": samples}
    if cfg.index.law is not None:
        law = cfg.index.law
        gen = stream(seed, "index-samples")
        data = law.sample(gen, samples)
        report["source"] = {"law": canonical_form(cfg).get("index", {}).get("law")}
    else:
        path = cfg.index.sample_file
        try:
            data = np.loadtxt(path, dtype=float, delimiter=",", ndmin=1)
        except ValueError as err:
            raise ConfigError(f"index.sample_file: {err}") from None
        if data.ndim > 1:
            data = data[:, 0]
        report["source"] = {"sample_file": str(path)}
        report["n"] = int(data.size)
        law = None
    k = cfg.index.hill_k if cfg.index.hill_k is not None else max(10, data.size // 100)
    if law is not None and not np.all(np.isfinite(data)):
        # draws beyond the float range mean the tail is too heavy for a
        # sample-based index; the law-based diagnostics below still apply
        report["hill"] = None
        report["hill_note"] = "draws overflowed the float range"
    else:
        try:
            report["hill"] = _estimate_dict(hill_estimate(data, k))
        except ValueError as err:
            raise ConfigError(f"index: {err}") from None
    if law is not None:
        mat = matuszewska_estimate(law)
        report["matuszewska"] = {
            "J_plus": _estimate_dict(mat["J_plus"]),
            "J_minus": _estimate_dict(mat["J_minus"]),
        }
        report["karamata_lower"] = _estimate_dict(karamata_lower_estimate(law))
        report["classes"] = class_diagnostics(law)
    else:
        report["note"] = "law-based index and class diagnostics need a law section"
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "index_report.json"
    import json

    report_path.write_text(
        json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    write_manifest(
        out_dir / "manifest.json",
        config_digest=config_digest(cfg),
        seed=seed,
        workers=workers,
        wall_time_s=time.perf_counter() - started,
        diagnostics={"command": "index", "hill_k": int(k)},
        outputs=[report_path],
    )
    print(json.dumps(to_jsonable(report), sort_keys=True, indent=2))
    return 0


def cmd_geometry(args) -> int:
    cfg = _load(args)
    if cfg.rare_set is None:
        raise ConfigError("set: this command needs a rare-set section")
    seed, samples, workers, out_dir = _resolve_run(args, cfg)
    started = time.perf_counter()
    S = cfg.rare_set
    ones = [1.0] * S.dim
    report = {
        "dim": S.dim,
        "n_directions": len(S.directions),
        "directions": [list(d) for d in S.directions],
        "ruin_preset": None if cfg.ruin is None else {"kind": cfg.ruin.kind, "l": list(cfg.ruin.l)},
        "projection_at_ones": projection(S, ones),
    }
    bundle = cfg.bundle
    if bundle is not None:
        if isinstance(bundle.dependence, Comonotone):
            law = comonotone_product_law(bundle.dependence, S)
            report["limit_measure"] = {
                "mode": "comonotone",
                "kappa": law["kappa"],
                "mu_hat": law["mu_hat"],
            }
        else:
            heavy = (
                bundle.dependence.heavy
                if isinstance(bundle.dependence, HMixture)
                else bundle.claims
            )
            report["limit_measure"] = mu_limit(heavy, S, n=min(samples, 1_000_000))
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "geometry_report.json"
    import json

    report_path.write_text(
        json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    write_manifest(
        out_dir / "manifest.json",
        config_digest=config_digest(cfg),
        seed=seed,
        workers=workers,
        wall_time_s=time.perf_counter() - started,
        diagnostics={"command": "geometry"},
        outputs=[report_path],
    )
    print(json.dumps(to_jsonable(report), sort_keys=True, indent=2))
    return 0


def cmd_validate(args) -> int:
    from . import acceptance

    if args.list:
        for name in acceptance.criterion_names():
            print(name)
        return 0
    if args.tolerance_scale <= 0.0:
        raise ConfigError("tolerance-scale: must be strictly positive")
    names = args.only
    if names:
        known = set(acceptance.criterion_names())
        for name in names:
            if name not in known:
                raise ConfigError(f"only: unknown criterion {name!r}")
    results = acceptance.run_criteria(
        names=names,
        seed=args.seed,
        tolerance_scale=args.tolerance_scale,
        workdir=args.out,
    )
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{status}  {r.name:<{width}}  value={r.value:.6g}  "
            f"band=[{r.lo:.6g}, {r.hi:.6g}]  {r.seconds:.1f}s"
        )
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


_HANDLERS = {
    "tail": cmd_tail,
    "ruin": cmd_ruin,
    "index": cmd_index,
    "geometry": cmd_geometry,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 4
    except (ValueError, TypeError) as err:
        print(f"refused: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
