"""Command line interface.

Exit codes: 0 success, 1 config error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import date

from .errors import ConfigError, DataError
from .experiment import (
    ExperimentConfig,
    emit_plot_data,
    load_run,
    records_from_frame,
    run_experiment,
    summarize,
    write_summary,
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrunoff",
        description="Quantile-calibrated rainfall-runoff experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full experiment from a config")
    p_run.add_argument("config", help="YAML config file")

    p_val = sub.add_parser("validate-config", help="check a config and exit")
    p_val.add_argument("config", help="YAML config file")

    p_sum = sub.add_parser("summarize", help="rebuild summary tables for a run")
    p_sum.add_argument("run_dir", help="output directory of a finished run")

    p_plot = sub.add_parser("plot-data", help="emit plot-ready CSV files")
    p_plot.add_argument("run_dir", help="output directory of a finished run")
    p_plot.add_argument("--basin", help="basin id for the hydrograph window")
    p_plot.add_argument("--from", dest="start", type=date.fromisoformat,
                        help="window start (ISO date)")
    p_plot.add_argument("--to", dest="end", type=date.fromisoformat,
                        help="window end (ISO date)")
    p_plot.add_argument("--model", action="append", dest="models",
                        help="restrict to a model (repeatable)")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_file(args.config)
    artifacts = run_experiment(config)
    n_basins = len(artifacts.manifest["basins_run"])
    print(f"run complete: {n_basins} basin(s), "
          f"{artifacts.manifest['n_parameter_rows']} parameter rows "
          f"-> {artifacts.output_dir}")
    for basin, reason in artifacts.skipped.items():
        print(f"skipped {basin}: {reason}", file=sys.stderr)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_file(args.config)
    print(f"config ok (hash {config.config_hash()[:16]})")
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    run = load_run(args.run_dir)
    tables = summarize(records_from_frame(run.scores), run.config)
    write_summary(tables, run.run_dir / "summary", run.manifest["config_hash"])
    print(f"summary tables written under {run.run_dir / 'summary'}")
    return 0


def _cmd_plot_data(args: argparse.Namespace) -> int:
    written = emit_plot_data(
        args.run_dir,
        basin_id=args.basin,
        start=args.start,
        end=args.end,
        models=args.models,
    )
    for path in written:
        print(path)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "validate-config": _cmd_validate,
    "summarize": _cmd_summarize,
    "plot-data": _cmd_plot_data,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        logger.exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
