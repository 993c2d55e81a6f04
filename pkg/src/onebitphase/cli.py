"""Command line interface.

Subcommands:
  sweep        run a Monte Carlo Es/N0 sweep, write CSV (and optionally a figure)
  validate     run the oracle/property self-checks
  show-config  print the fully resolved configuration
  plot         render a previously written sweep CSV to an image
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ConfigError, dump_config, load_config
from .experiments import ExperimentConfig, run_sweep
from .framing import FramingError
from .waveform import WaveformError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebitphase",
        description="Phase noise tracking study for 1-bit quantized receivers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run an Es/N0 sweep and write CSV")
    sweep.add_argument("--config", help="configuration file (defaults when omitted)")
    sweep.add_argument("--out", help="CSV output path (stdout when omitted)")
    sweep.add_argument("--trials", type=int, help="override trial count")
    sweep.add_argument("--seed", type=int, help="override master seed")
    sweep.add_argument("--modes", help="comma separated: pilot_only,kalman,rts")
    sweep.add_argument("--algorithms", help="comma separated: ls,em,scoring")
    sweep.add_argument("--plot", help="also render the curves to this image file")

    val = sub.add_parser("validate", help="run the oracle/property suites")
    val.add_argument("--quick", action="store_true", help="smaller Monte Carlo sizes")

    show = sub.add_parser("show-config", help="print the resolved configuration")
    show.add_argument("--config", help="configuration file (defaults when omitted)")

    plot = sub.add_parser("plot", help="render a sweep CSV to an image")
    plot.add_argument("--csv", required=True, help="input CSV from `sweep`")
    plot.add_argument("--out", required=True, help="output image path")
    plot.add_argument("--title", help="figure title")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "modes", None):
        overrides["modes"] = tuple(m.strip() for m in args.modes.split(",") if m.strip())
    if getattr(args, "algorithms", None):
        overrides["algorithms"] = tuple(
            a.strip() for a in args.algorithms.split(",") if a.strip()
        )
    return replace(cfg, **overrides) if overrides else cfg


def _cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    result = run_sweep(cfg)
    if args.out:
        result.write_csv(args.out)
        print(f"wrote {len(result.rows)} rows to {args.out}")
    else:
        sys.stdout.write(result.to_csv())
    for name, count in sorted(result.diagnostics.items()):
        if count:
            print(f"diagnostic: {name} = {count}", file=sys.stderr)
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(result, args.plot)
        print(f"wrote figure to {args.plot}")
    return 0


def _cmd_validate(args) -> int:
    from .validation import run_all

    results = run_all(quick=args.quick)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.detail}")
        failed += not res.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def _cmd_show_config(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    sys.stdout.write(dump_config(cfg))
    return 0


def _cmd_plot(args) -> int:
    from .plotting import plot_rows, read_rows_csv

    rows = read_rows_csv(args.csv)
    plot_rows(rows, args.out, title=args.title)
    print(f"wrote figure to {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "validate": _cmd_validate,
        "show-config": _cmd_show_config,
        "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FramingError, WaveformError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
