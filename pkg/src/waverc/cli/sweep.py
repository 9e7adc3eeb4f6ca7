"""Field x interval sweep runner with an idempotent per-cell store.

Cells are enumerated in a deterministic order and each completed cell is
persisted as one JSON file keyed by the config digest, so reruns skip
finished work and the results CSV is regenerated in canonical order
after every flush.  Only the orchestrating process writes files; workers
return rows.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

from ..metrics import MetricsReport
from ..tasks import run_prediction_task, run_stm_task
from .config import ExperimentConfig

__all__ = ["run_sweep", "enumerate_cells", "cell_name"]

logger = logging.getLogger(__name__)


def enumerate_cells(config: ExperimentConfig) -> list[tuple]:
    """Deterministic cell order: field-major, then interval, detectors,
    interference, seed."""
    return [
        (field, interval, mode, interference, seed)
        for field in config.sweep_fields
        for interval in config.sweep_intervals
        for mode in config.sweep_detector_modes
        for interference in config.sweep_interference_modes
        for seed in config.sweep_seeds
    ]


def cell_name(cell: tuple) -> str:
    field, interval, mode, interference, seed = cell
    return f"f{field!r}_i{interval!r}_d{mode}_x{int(interference)}_s{seed}"


def _run_cell(config: ExperimentConfig, cell: tuple) -> dict:
    field, interval, mode, interference, seed = cell
    spec = dataclasses.replace(
        config.task, field=field, interval=interval, detectors_used=mode,
        interference=interference, seed=seed,
    )
    report_kwargs = dict(kind=spec.kind, field=field, interval=interval,
                         detectors=mode, interference=interference, seed=seed)
    try:
        runner = run_stm_task if spec.kind == "stm_delay" else run_prediction_task
        report = runner(spec, config.medium)
    except Exception as exc:  # per-cell failures land in the CSV error column
        logger.warning("cell %s failed: %s", cell_name(cell), exc)
        report = MetricsReport(**report_kwargs, error=str(exc))
    row = {name: getattr(report, name) for name in MetricsReport.CSV_FIELDS}
    if report.forgetting_curve is not None:
        row["forgetting_curve"] = [float(v) for v in report.forgetting_curve]
    return row


def _write_csv(path: Path, config: ExperimentConfig, store: Path) -> int:
    """Rebuild the results CSV from completed cell files, canonical order."""
    written = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MetricsReport.CSV_FIELDS)
        for cell in enumerate_cells(config):
            cell_file = store / f"{cell_name(cell)}.json"
            if not cell_file.exists():
                continue
            row = json.loads(cell_file.read_text())
            report = MetricsReport(
                **{k: v for k, v in row.items() if k in MetricsReport.CSV_FIELDS}
            )
            writer.writerow(report.csv_row())
            written += 1
    return written


def run_sweep(config: ExperimentConfig, jobs: int = 1, force: bool = False,
              out_dir=None) -> Path:
    """Run every cell of the grid; returns the results CSV path.

    Completed cells (keyed by the config content digest) are skipped
    unless ``force``; partial results are flushed to the CSV as cells
    finish, and a rerun over a completed store performs zero new
    simulations and rewrites an identical CSV.
    """
    base = Path(out_dir if out_dir is not None else config.output_dir)
    store = base / f"cells-{config.digest()}"
    store.mkdir(parents=True, exist_ok=True)
    csv_path = base / "results.csv"

    cells = enumerate_cells(config)
    pending = []
    for cell in cells:
        cell_file = store / f"{cell_name(cell)}.json"
        if force or not cell_file.exists():
            pending.append(cell)
    logger.info("sweep: %d cells, %d pending, store %s",
                len(cells), len(pending), store)

    def flush(row: dict, cell: tuple) -> None:
        (store / f"{cell_name(cell)}.json").write_text(json.dumps(row))
        _write_csv(csv_path, config, store)

    if jobs <= 1 or len(pending) <= 1:
        for cell in pending:
            flush(_run_cell(config, cell), cell)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_cell, config, cell): cell
                       for cell in pending}
            for fut in as_completed(futures):
                flush(fut.result(), futures[fut])

    _write_csv(csv_path, config, store)
    return csv_path
