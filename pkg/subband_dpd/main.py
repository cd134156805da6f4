"""Command-line entry point: ``subband-dpd run`` and ``subband-dpd sweep``."""

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Optional

from subband_dpd import __version__
from subband_dpd.config import get_settings
from subband_dpd.core.exceptions import SubbandDpdError
from subband_dpd.schemas.scenario import SweepVariable
from subband_dpd.services.scenario_runner import run_scenario, sweep

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser for both subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="Scenario file (JSON)")
    common.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    common.add_argument("--out", default=None, help="Output directory for artifacts")
    common.add_argument(
        "--quiet", action="store_true", help="Only log warnings and errors"
    )

    parser = argparse.ArgumentParser(
        prog="subband-dpd",
        description="Sub-band digital predistortion simulator for dual-carrier transmitters",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser(
        "run",
        parents=[common],
        help="Run one scenario and write its artifacts",
    )

    sweep_parser = commands.add_parser(
        "sweep",
        parents=[common],
        help="Run a scenario over a range of one variable",
    )
    sweep_parser.add_argument(
        "--var", required=True, choices=SweepVariable.names(), help="Swept variable"
    )
    sweep_parser.add_argument("--from", dest="start", type=float, required=True)
    sweep_parser.add_argument("--to", dest="stop", type=float, required=True)
    sweep_parser.add_argument("--steps", type=int, default=5)
    return parser


def configure_logging(quiet: bool) -> None:
    level = logging.WARNING if quiet else get_settings().log_level.upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the process exit status."""
    args = build_parser().parse_args(argv)
    configure_logging(args.quiet)

    try:
        if args.command == "run":
            summary = run_scenario(args.config, output_dir=args.out, seed=args.seed)
            for result in summary.sub_bands:
                logger.info(
                    f"{result.sub_band}: {result.imr_before_dbc:.2f} -> "
                    f"{result.imr_after_dbc:.2f} dBc"
                )
        else:
            rows = sweep(
                args.config,
                args.var,
                args.start,
                args.stop,
                args.steps,
                output_dir=args.out,
                seed=args.seed,
            )
            logger.info(f"Sweep finished with {len(rows)} rows")
    except SubbandDpdError as exc:
        logger.error(f"{exc.error_code}: {exc.message}")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
