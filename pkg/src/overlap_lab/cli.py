"""``overlap-lab`` command line interface."""

from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
import warnings
from pathlib import Path

from . import __version__, kernels
from .config import RunConfig, load_config, parse_range, parse_tau
from .errors import ConfigError, NumericalWarning, OverlapLabError, ResourceBudgetError
from .reports import (
    EMPDIM_COLUMNS,
    OVERLAP_COLUMNS,
    SPECTRUM_COLUMNS,
    SWEEP_COLUMNS,
    bound_results,
    envelope,
    resolve_log_o,
    run_analyze,
    run_empdim,
    run_overlap,
    run_spectrum,
    run_sweep,
    structure_results,
    to_json,
    write_csv,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_NUMERICAL = 4

GNUPLOT = {
    "overlap": ("depth", "mean_log_count", 1, 2),
    "empdim": ("log2(1/delta) level", "box count", 1, 3),
    "spectrum": ("value", "multiplicity", 1, 2),
    "sweep": ("lambda", "o estimate", 1, 3),
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", help="output file (CSV or JSON by command)")
    p.add_argument("--strict", action="store_true", help="treat numerical warnings as failures")
    p.add_argument("--threads", type=int, help="worker threads (default $OVERLAP_LAB_THREADS or 1)")
    p.add_argument("--no-timestamp", action="store_true", help="omit generated_at from JSON")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script next to --out")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="overlap-lab",
        description="Overlap numbers and dimension bounds for affine iterated function systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="estimate, closed forms and bounds (JSON)")

    p = sub.add_parser("overlap", parents=[common], help="Monte Carlo overlap number (CSV)")
    p.add_argument("--depths", help="start:stop:step, inclusive")
    p.add_argument("--samples", type=int)
    p.add_argument("--tau", help="Birkhoff tolerance, or inf")

    p = sub.add_parser("spectrum", parents=[common], help="value spectrum (CSV)")
    p.add_argument("--depth", type=int)
    p.add_argument("--budget", type=int)

    p = sub.add_parser("structure", parents=[common], help="blocks and overlap families (JSON)")
    p.add_argument("--p", type=int, dest="p")
    p.add_argument("--kmax", type=int)
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("bound", parents=[common], help="dimension bounds (JSON)")
    p.add_argument(
        "--log-o",
        default="from:estimate",
        help="from:estimate | from:blocks | from:closed-form | <value>",
    )

    p = sub.add_parser("empdim", parents=[common], help="empirical box dimension (CSV)")
    p.add_argument("--samples", type=int)
    p.add_argument("--scales", help="levels k with delta = |hull| 2^-k, as start:stop")
    p.add_argument("--fit", help="fit window first:last")
    p.add_argument("--mass", type=float)

    p = sub.add_parser("sweep", parents=[common], help="grid over lambda (CSV)")
    p.add_argument("--lambdas", help="start:stop:step over lambda (float mode)")
    return parser


def _threads(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("OVERLAP_LAB_THREADS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"OVERLAP_LAB_THREADS must be an integer, got {env!r}") from exc
    return 1


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.threads = _threads(args.threads)
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    cmd = args.command
    if cmd == "overlap":
        if args.depths:
            cfg.depths = parse_range(args.depths)
        if args.samples is not None:
            cfg.samples = args.samples
        if args.tau is not None:
            cfg.tau = parse_tau(args.tau)
    elif cmd == "spectrum":
        if args.depth is not None:
            cfg.spectrum_depth = args.depth
        if args.budget is not None:
            cfg.budget = args.budget
    elif cmd == "structure":
        if args.p is not None:
            cfg.structure_p = args.p
        if args.kmax is not None:
            cfg.structure_kmax = args.kmax
        if args.threshold is not None:
            cfg.threshold = args.threshold
    elif cmd == "empdim":
        if args.samples is not None:
            cfg.empdim_samples = args.samples
        if args.scales:
            cfg.empdim_levels = parse_range(args.scales)
        if args.fit:
            f = parse_range(args.fit)
            cfg.empdim_fit = (f[0], f[-1])
        if args.mass is not None:
            cfg.mass = args.mass
    elif cmd == "sweep":
        if args.lambdas:
            cfg.sweep_lambdas = parse_range(args.lambdas, float)
    if cfg.samples < 1 or cfg.empdim_samples < 1:
        raise ConfigError("samples must be >= 1")
    if cfg.depths != sorted(set(cfg.depths)) or cfg.depths[0] < 1:
        raise ConfigError("depths must be positive and strictly increasing")
    if not 0.5 < cfg.mass < 1:
        raise ConfigError("mass must lie in (0.5, 1)")
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(summary: dict, out: str | None) -> None:
    # stdout carries the CSV itself when there is no --out
    (sys.stdout if out else sys.stderr).write(to_json(summary))


def _gnuplot(command: str, out: str) -> None:
    xlabel, ylabel, xcol, ycol = GNUPLOT[command]
    script = (
        "set datafile separator ','\n"
        f"set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
        + ("set logscale y\n" if command == "empdim" else "")
        + f"plot '{Path(out).name}' every ::1 using {xcol}:{ycol} with linespoints title '{command}'\n"
    )
    Path(out).with_suffix(".gp").write_text(script)


def dispatch(cfg: RunConfig, args) -> None:
    cmd = args.command
    stamp = None if args.no_timestamp else _dt.datetime.now(_dt.timezone.utc).isoformat()
    csv_text = None
    if cmd == "overlap":
        _, rows, summary = run_overlap(cfg)
        csv_text = write_csv(rows, OVERLAP_COLUMNS)
        _summary(summary, args.out)
    elif cmd == "spectrum":
        _, rows, summary = run_spectrum(cfg)
        csv_text = write_csv(rows, SPECTRUM_COLUMNS)
        _summary(summary, args.out)
    elif cmd == "empdim":
        _, rows, summary = run_empdim(cfg)
        csv_text = write_csv(rows, EMPDIM_COLUMNS)
        _summary(summary, args.out)
    elif cmd == "sweep":
        rows = run_sweep(cfg)
        csv_text = write_csv(rows, SWEEP_COLUMNS)
    elif cmd == "structure":
        _emit(to_json(envelope(cmd, cfg, structure_results(cfg), stamp)), args.out)
    elif cmd == "bound":
        log_o, source = resolve_log_o(cfg, args.log_o)
        _emit(to_json(envelope(cmd, cfg, bound_results(cfg, log_o, source), stamp)), args.out)
    elif cmd == "analyze":
        _emit(to_json(envelope(cmd, cfg, run_analyze(cfg), stamp)), args.out)
    if csv_text is not None:
        _emit(csv_text, args.out)
        if args.gnuplot and args.out:
            _gnuplot(cmd, args.out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings():
        if args.strict:
            warnings.simplefilter("error", NumericalWarning)
        try:
            cfg = apply_overrides(load_config(args.config), args)
            dispatch(cfg, args)
        except ConfigError as exc:
            print(f"overlap-lab: config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except ResourceBudgetError as exc:
            print(f"overlap-lab: resource budget exceeded: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        except NumericalWarning as exc:
            print(f"overlap-lab: numerical warning (strict): {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        except OverlapLabError as exc:
            print(f"overlap-lab: error: {exc}", file=sys.stderr)
            return EXIT_ERROR
    return EXIT_OK


def run(command: str, config_path, *extra: str) -> int:
    """Programmatic entry point: ``run("overlap", "sys.toml", "--out", "o.csv")``."""
    return main([command, "--config", str(config_path), *extra])


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "run", "build_parser", "kernels"]
