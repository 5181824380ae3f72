"""End-to-end runs, benchmark grids and the desk-scale policy."""

from __future__ import annotations

import csv
import dataclasses
import logging
from pathlib import Path
from typing import Iterable

import numpy as np

from .config import ExperimentConfig, Seeds
from .estimator import PIELMSolver
from .metrics import ErrorReport, convergence_study, evaluate_error

__all__ = [
    "CSV_COLUMNS",
    "TABLES",
    "make_estimator",
    "run_experiment",
    "table_configs",
    "reproduce_table",
    "run_rates",
    "write_rows",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "table",
    "row",
    "problem",
    "d",
    "n_int",
    "n_sb",
    "n_tb",
    "n_s",
    "N",
    "activation",
    "beta1",
    "beta2",
    "relative_l2",
    "l2",
    "reference_stderr",
    "wall_time",
    "seed_weights",
    "seed_collocation",
    "seed_boundary_mc",
    "seed_test",
    "seed_oracle",
    "status",
    "message",
]

# Benchmark grids: (d, N, beta1, beta2) per row.
_HEAT_GRID = [(d, n, 1.0, 1.0) for d in (5, 10, 20, 50, 100) for n in (800, 1600, 3200)]
_BS_GRID = [
    (1, 800, 5.0, 10.0),
    (2, 800, 5.0, 10.0),
    (10, 800, 5.0, 10.0),
    (20, 3200, 5.0, 10.0),
    (50, 3200, 5.0, 100.0),
    (100, 3200, 5.0, 100.0),
]
_HESTON_GRID = [
    (2, 800, 800.0, 800.0),
    (4, 800, 5.0, 50.0),
    (10, 800, 5.0, 10.0),
    (30, 3200, 5.0, 10.0),
    (50, 3200, 10.0, 100.0),
    (100, 3200, 10.0, 100.0),
]
TABLES = {
    "T1": ("heat", "tanh", _HEAT_GRID),
    "T2": ("heat", "sigmoid", _HEAT_GRID),
    "T3": ("black_scholes", "tanh", _BS_GRID),
    "T4": ("black_scholes", "sigmoid", _BS_GRID),
    "T5": ("heston", "tanh", _HESTON_GRID),
}

# desk scale: cap d and N, quarter the Monte Carlo sample counts
DESK_MAX_D = 20
DESK_MAX_WIDTH = 1600
DESK_MC_DIVISOR = 4


def make_estimator(cfg: ExperimentConfig, problem=None) -> PIELMSolver:
    return PIELMSolver(
        problem=problem if problem is not None else cfg.build_problem(),
        width=cfg.width,
        activation=cfg.activation.value,
        weight_range=cfg.weight_range,
        n_int=cfg.n_int,
        n_sb=cfg.n_sb,
        n_tb=cfg.n_tb,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        backend=cfg.backend,
        solver=cfg.solver.value,
        rcond=cfg.rcond,
        random_state=cfg.seeds.weights,
        collocation_seed=cfg.seeds.collocation,
    )


def _row(cfg: ExperimentConfig, report: ErrorReport | None, wall_time: float | None, **extra) -> dict:
    s = cfg.seeds
    row = {
        "table": "",
        "row": "",
        "problem": cfg.problem,
        "d": cfg.d,
        "n_int": cfg.n_int,
        "n_sb": cfg.n_sb,
        "n_tb": cfg.n_tb,
        "n_s": cfg.n_s,
        "N": cfg.width,
        "activation": cfg.activation.value,
        "beta1": cfg.beta1,
        "beta2": cfg.beta2,
        "relative_l2": report.relative_l2 if report else "",
        "l2": report.l2_error if report else "",
        "reference_stderr": report.reference_stderr if report else "",
        "wall_time": f"{wall_time:.3f}" if wall_time is not None else "",
        "seed_weights": s.weights,
        "seed_collocation": s.collocation,
        "seed_boundary_mc": s.boundary_mc,
        "seed_test": s.test,
        "seed_oracle": s.oracle,
        "status": "ok",
        "message": "",
    }
    row.update(extra)
    return row


def run_experiment(cfg: ExperimentConfig) -> tuple[ErrorReport, dict]:
    """Sample, assemble, solve and evaluate one configuration.

    Returns the error report and its CSV row. ``wall_time`` covers training
    (sampling, Monte Carlo boundary data, assembly and the solve).
    """
    problem = cfg.build_problem()
    est = make_estimator(cfg, problem).fit()
    report = evaluate_error(
        problem, est.network_, cfg.n_test, cfg.seeds.test, seed_bundle=dataclasses.asdict(cfg.seeds)
    )
    log.info(
        "%s d=%d N=%d %s: relative L2 %.3e (train %.2fs)",
        cfg.problem,
        cfg.d,
        cfg.width,
        cfg.activation.value,
        report.relative_l2,
        est.fit_time_,
    )
    return report, _row(cfg, report, est.fit_time_)


def table_configs(table_id: str, scale: str = "desk", n_test: int | None = None) -> list[ExperimentConfig]:
    """Row configurations of a benchmark grid at ``full`` or ``desk`` scale."""
    key = str(table_id).upper()
    if key not in TABLES:
        raise ValueError(f"unknown table {table_id!r}; expected one of {sorted(TABLES)}")
    if scale not in ("full", "desk"):
        raise ValueError(f"unknown scale {scale!r}; expected 'full' or 'desk'")
    problem, activation, grid = TABLES[key]
    configs, seen = [], set()
    for d, width, b1, b2 in grid:
        if scale == "desk":
            if d > DESK_MAX_D:
                continue
            width = min(width, DESK_MAX_WIDTH)
        if (d, width) in seen:
            continue
        seen.add((d, width))
        row = len(configs)
        # fixed per-row seeds keep every row reproducible on its own
        seeds = Seeds(*(100 * row + k for k in range(1, 6)))
        overrides = dict(activation=activation, width=width, beta1=b1, beta2=b2, seeds=seeds)
        cfg = ExperimentConfig.for_problem(problem, d, **overrides)
        if scale == "desk" and problem != "heat":
            cfg = dataclasses.replace(
                cfg, n_s=cfg.n_s // DESK_MC_DIVISOR, oracle_samples=cfg.oracle_samples // DESK_MC_DIVISOR
            )
        elif scale == "full" and problem != "heat":
            cfg = dataclasses.replace(cfg, n_test=100_000)
        if n_test is not None:
            cfg = dataclasses.replace(cfg, n_test=n_test)
        configs.append(cfg)
    return configs


def write_rows(rows: Iterable[dict], out) -> None:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def reproduce_table(table_id: str, scale: str = "desk", out=None, n_test: int | None = None) -> list[dict]:
    """Run every row of a table; failed rows are recorded, not raised."""
    key = str(table_id).upper()
    rows = []
    for i, cfg in enumerate(table_configs(key, scale, n_test)):
        try:
            _, row = run_experiment(cfg)
        except Exception as exc:  # noqa: BLE001 - one bad row must not lose the rest
            log.exception("table %s row %d failed", key, i)
            row = _row(cfg, None, None, status="error", message=f"{type(exc).__name__}: {exc}")
        row.update(table=key, row=i)
        rows.append(row)
    if out is not None:
        write_rows(rows, out)
    return rows


def run_rates(cfg: ExperimentConfig, widths, repeats: int = 1) -> tuple[list[dict], float | None]:
    """Width sweep of ``cfg``; one summary row per width plus the fitted log-log slope."""
    est = make_estimator(cfg)
    seeds = [cfg.seeds.shifted(r).weights for r in range(repeats)]
    rows, slope = convergence_study(est, widths, repeats, seeds, cfg.n_test, cfg.seeds.test)
    for row in rows:
        row["errors"] = ";".join(repr(float(e)) for e in row["errors"])
    log.info("fitted slope of log(error) vs log(width): %s", slope)
    return rows, slope


def median_relative_error(cfg: ExperimentConfig, repeats: int = 5) -> tuple[float, list[ErrorReport], list[dict]]:
    """Median relative L2 over ``repeats`` seed-shifted runs."""
    reports, rows = [], []
    for r in range(repeats):
        report, row = run_experiment(cfg.for_repeat(r))
        reports.append(report)
        rows.append(row)
    return float(np.median([rep.relative_l2 for rep in reports])), reports, rows
