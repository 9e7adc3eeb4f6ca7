"""Command-line entry point: task, sweep, mnist, stm, lyapunov, validate-config."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from ..encoding import hold_encode, random_input
from ..lyapunov import (EmbeddingSpec, lyapunov_spectrum, phase_portrait,
                        save_convergence_csv, save_phase_portrait_csv)
from ..medium import simulate
from ..metrics import MetricsReport, save_forgetting_curve
from ..tasks import (TaskSpec, run_mnist_task, run_prediction_task,
                     run_stm_task, stm_task_spec)
from .config import ExperimentConfig, load_config
from .mnist_io import (load_mnist_idx, synthetic_digits, write_idx_images,
                       write_idx_labels)
from .sweep import run_sweep

log = logging.getLogger("waverc")


def _load_or_default(path) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return load_config(path)


def _write_single_report(out_dir: Path, report: MetricsReport) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "results.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MetricsReport.CSV_FIELDS)
        writer.writerow(report.csv_row())
    return path


def _cmd_task(args) -> int:
    config = _load_or_default(args.config)
    spec = config.task
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    runner = run_stm_task if spec.kind == "stm_delay" else run_prediction_task
    report = runner(spec, config.medium)
    path = _write_single_report(Path(args.out or config.output_dir), report)
    print(f"{spec.kind}: nmse_test={report.nmse_test} "
          f"nmse_var_test={report.nmse_var_test} c_stm={report.c_stm}")
    print(f"wrote {path}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    path = run_sweep(config, jobs=args.jobs, force=args.force, out_dir=args.out)
    print(f"wrote {path}")
    return 0


def _cmd_stm(args) -> int:
    config = _load_or_default(args.config)
    spec = stm_task_spec(
        interval=config.task.interval,
        detectors_used=config.task.detectors_used,
        interference=config.task.interference,
        nodes_per_input_step=config.task.nodes_per_input_step,
        ridge_lambda=config.task.ridge_lambda,
        tau_max=args.tau_max,
        seed=args.seed if args.seed is not None else config.task.seed,
    )
    report = run_stm_task(spec, config.medium)
    out_dir = Path(args.out or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / "forgetting_curve.csv"
    save_forgetting_curve(curve_path, report.forgetting_curve, report.c_stm)
    print(f"c_stm={report.c_stm:.4f} over tau=1..{args.tau_max}")
    print(f"wrote {curve_path}")
    return 0


def _cmd_mnist(args) -> int:
    config = _load_or_default(args.config)
    train = load_mnist_idx(args.train_images, args.train_labels)
    test = load_mnist_idx(args.test_images, args.test_labels)
    n_train = min(args.limit_train or len(train), len(train))
    n_test = min(args.limit_test or len(test), len(test))
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else None
    spec = TaskSpec(kind="mnist", detectors_used=args.detectors,
                    interference=not args.no_interference,
                    ridge_lambda=config.task.ridge_lambda,
                    seed=config.task.seed)
    result = run_mnist_task(
        train.images[:n_train], train.labels[:n_train],
        test.images[:n_test], test.labels[:n_test],
        spec=spec, medium=config.medium, sizes=sizes,
    )
    print(f"accuracy: train={result.accuracy_train:.4f} "
          f"test={result.accuracy_test:.4f} "
          f"({result.n_features} features, {result.n_train} train / "
          f"{result.n_test} test)")
    out_dir = Path(args.out or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "mnist_accuracy.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["train_size", "accuracy"])
        for size, acc in result.size_curve:
            writer.writerow([size, repr(acc)])
        writer.writerow([result.n_train, repr(result.accuracy_test)])
    print(f"wrote {path}")
    return 0


def _cmd_lyapunov(args) -> int:
    config = _load_or_default(args.config)
    if args.trace:
        series = np.loadtxt(args.trace, delimiter=",", ndmin=1)
        if series.ndim > 1:
            series = series[:, 0]
    else:
        # fresh simulation: drive both exciters with a seeded random hold
        u = random_input(args.sim_steps, args.seed if args.seed is not None else 1)
        cfg = config.medium
        plan = [hold_encode(u, config.task.interval, cfg.dt, port=p)
                for p in (0, 1)]
        duration = len(u) * config.task.interval
        series = simulate(cfg, plan, duration)[0]
    spec = EmbeddingSpec(dimension=args.dimension, lag=args.lag,
                         epsilon=args.epsilon, evolution_steps=args.steps,
                         max_iterations=args.max_iterations)
    result = lyapunov_spectrum(series, spec)
    out_dir = Path(args.out or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_convergence_csv(out_dir / "lyapunov_convergence.csv", result)
    save_phase_portrait_csv(out_dir / "phase_portrait.csv",
                            phase_portrait(series, args.lag))
    lams = ", ".join(f"{v:.4f}" for v in result.exponents)
    print(f"lyapunov exponents (per sample step): [{lams}]")
    print(f"skipped {result.skipped_fraction:.1%} of points; "
          f"wrote CSVs under {out_dir}")
    return 0


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    cells = (len(config.sweep_fields) * len(config.sweep_intervals)
             * len(config.sweep_detector_modes)
             * len(config.sweep_interference_modes) * len(config.sweep_seeds))
    print(f"ok: schema_version={config.schema_version}, "
          f"digest={config.digest()}, sweep cells={cells}")
    return 0


def _cmd_synth_digits(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    train = synthetic_digits(args.train, seed=args.seed or 0)
    test = synthetic_digits(args.test, seed=(args.seed or 0) + 1)
    write_idx_images(out_dir / "train-images-idx3-ubyte", train.images)
    write_idx_labels(out_dir / "train-labels-idx1-ubyte", train.labels)
    write_idx_images(out_dir / "t10k-images-idx3-ubyte", test.images)
    write_idx_labels(out_dir / "t10k-labels-idx1-ubyte", test.labels)
    print(f"wrote {args.train} train / {args.test} test digits to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waverc",
        description="Wave-lattice reservoir computing benchmark toolkit",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="enable info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=False):
        p.add_argument("--config", required=config_required,
                       help="TOML experiment file")
        p.add_argument("--seed", type=int, help="override the task seed")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("task", help="run one task cell")
    add_common(p)
    p.set_defaults(func=_cmd_task)

    p = sub.add_parser("sweep", help="run the field x interval grid")
    p.add_argument("--config", required=True, help="TOML experiment file")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--force", action="store_true",
                   help="recompute completed cells")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("stm", help="forgetting curve and memory capacity")
    add_common(p)
    p.add_argument("--tau-max", type=int, default=30, help="largest delay")
    p.set_defaults(func=_cmd_stm)

    p = sub.add_parser("mnist", help="digit-recognition pipeline on IDX files")
    add_common(p)
    p.add_argument("--train-images", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test-images", required=True)
    p.add_argument("--test-labels", required=True)
    p.add_argument("--limit-train", type=int, help="cap training samples")
    p.add_argument("--limit-test", type=int, help="cap test samples")
    p.add_argument("--sizes", help="comma list for the accuracy-vs-size curve")
    p.add_argument("--detectors", default="a", choices=["a", "b", "both"])
    p.add_argument("--no-interference", action="store_true",
                   help="drive exciter A only")
    p.set_defaults(func=_cmd_mnist)

    p = sub.add_parser("lyapunov", help="spectrum and phase portrait")
    add_common(p)
    p.add_argument("--trace", help="CSV file with a scalar trace "
                                   "(default: fresh simulation)")
    p.add_argument("--dimension", type=int, default=3)
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("--steps", type=int, default=1, help="evolution steps s")
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--sim-steps", type=int, default=2000,
                   help="input steps for the fresh simulation")
    p.set_defaults(func=_cmd_lyapunov)

    p = sub.add_parser("validate-config", help="check a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("synth-digits",
                       help="write synthetic stand-in digit IDX files")
    p.add_argument("--out", required=True)
    p.add_argument("--train", type=int, default=10000)
    p.add_argument("--test", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth_digits)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints usage; keep the exit code
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
