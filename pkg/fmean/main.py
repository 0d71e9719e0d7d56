#!/usr/bin/env python3
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from .core.config import RunConfig, configure_logging, make_debug
from .core.exceptions import FMeanError, NumericalError, ValidationError
from .core.filesystem import write_result_files
from .core.scenario import ScenarioConfig
from .workflows.reporting import render, render_csv, render_structured
from .workflows.scenario_workflow import ScenarioWorkflow

LOGGER = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    """Create the command line argument parser."""
    parser = argparse.ArgumentParser(
        description="Quasi-arithmetic means, f-conditional expectation and certainty equivalents",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Run the command named in a scenario file
  python -m fmean.main --config scenarios/geometric_mean.json

  # Write a structured result file (and a CSV of any tables) next to the table output
  python -m fmean.main --config scenarios/exit_time.json --out results/exit_time.json

  # Override the seed and parallelism of a Monte Carlo scenario
  python -m fmean.main --config scenarios/clt.json --seed 7 --workers 4

Environment Variables:
  FMEAN_LOG       Log level: error, info or debug (default: error)
  FMEAN_WORKERS   Default worker count for Monte Carlo commands

Exit codes:
  0 success, 1 a verification reported FAIL or an unexpected error,
  2 invalid input,
  3 numerical failure, 130 interrupted
        """,
    )
    parser.add_argument(
        "--config",
        dest="config_path",
        type=Path,
        required=True,
        help="Scenario file (JSON)",
    )
    parser.add_argument(
        "--out",
        dest="out_path",
        type=Path,
        help="Write a structured result file here",
    )
    parser.add_argument("--seed", type=int, help="Override the scenario seed")
    parser.add_argument("--workers", type=int, help="Override the worker count")
    parser.add_argument("--tol", type=float, help="Override the verification tolerance")
    parser.add_argument(
        "--format",
        dest="output_format",
        choices=["table", "csv", "structured"],
        default="table",
        help="Standard output format (default: table)",
    )
    parser.add_argument(
        "--debug",
        dest="debug",
        action="store_true",
        help="Enable debug logging (same as FMEAN_LOG=debug)",
    )
    return parser


def run(config_path: Path, overrides: Mapping[str, Any] | None = None) -> int:
    """Run one scenario file and return the exit code.

    `overrides` takes the RunConfig keys: out_path, output_format, seed,
    workers, tol and log_level.
    """
    values = {k: v for k, v in (overrides or {}).items() if k != "config_path"}
    config = RunConfig.from_args(config_path=config_path, **values)
    configure_logging(config)
    debug = make_debug(config)

    scenario = ScenarioConfig.load(Path(config_path)).apply_overrides(
        **config.scenario_overrides
    )
    debug(f"loaded scenario {config_path} ({scenario.command})")
    result = ScenarioWorkflow(scenario, debug=debug).run()

    sys.stdout.write(render(result, config.output_format))
    if config.out_path is not None:
        written = write_result_files(
            config.out_path, render_structured(result), render_csv(result)
        )
        for path in written:
            debug(f"wrote {path}")

    if result.failed:
        print("FAIL", file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)
    overrides: dict[str, Any] = {
        "out_path": args.out_path,
        "output_format": args.output_format,
        "seed": args.seed,
        "workers": args.workers,
        "tol": args.tol,
        "log_level": "debug" if args.debug else None,
    }

    try:
        return run(args.config_path, overrides)
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 130
    except ValidationError as e:
        print(f"Validation error: {e}", file=sys.stderr)
        return e.exit_code
    except NumericalError as e:
        print(f"Numerical error: {e}", file=sys.stderr)
        return e.exit_code
    except FMeanError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        if args.debug:
            LOGGER.exception("Unhandled exception in fmean main")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
