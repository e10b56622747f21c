"""
Command-line entry point:

    fredholm-backstepping [-v] <command> <config> [--out DIR]

Commands: simulate, spectrum, fattorini, synthesize, closed-loop, convergence.
"""

import argparse
import logging
import sys
from typing import Optional

from fredholm_backstepping import engine
from fredholm_backstepping.config import load_config
from fredholm_backstepping.enums import ExitCode
from fredholm_backstepping.exceptions import (
    BacksteppingError,
    DegenerateSpectrumError,
    NotControllableError,
    SingularTransformError,
)

logger = logging.getLogger(__name__)

_EXIT_CODES = (
    (NotControllableError, ExitCode.NOT_CONTROLLABLE),
    (DegenerateSpectrumError, ExitCode.DEGENERATE_SPECTRUM),
    (SingularTransformError, ExitCode.SINGULAR_TRANSFORM),
)

_HELP = {
    "simulate": "open-loop Dirichlet or periodic run (trajectory CSV)",
    "spectrum": "eigenvalues and observation values for |k| <= N",
    "fattorini": "controllability verdict with the per-k values",
    "synthesize": "backstepping kernel, its boundary data and diagnostics",
    "closed-loop": "full pipeline up to the closed-loop metric report",
    "convergence": "closed-loop metric report over doublings of n and N",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fredholm-backstepping",
        description="Finite-time stabilization of transport equations with a Fredholm integral term.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in engine.COMMANDS:
        sub = commands.add_parser(name, help=_HELP[name])
        sub.add_argument("config", help="key=value configuration file")
        sub.add_argument("--out", default=None, help="output directory (overrides out.dir)")
    return parser


def exit_code_for(error: BaseException) -> ExitCode:
    for error_type, code in _EXIT_CODES:
        if isinstance(error, error_type):
            return code
    return ExitCode.FAILURE


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = load_config(args.config)
        written = engine.run(args.command, config, args.out)
    except (BacksteppingError, OSError) as e:
        code = exit_code_for(e)
        logger.error(f"{args.command} failed ({code.name.lower()}): {e}")
        return int(code)
    for path in written:
        logger.info(f"wrote {path}")
    return int(ExitCode.OK)


if __name__ == "__main__":
    sys.exit(main())
