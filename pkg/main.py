import argparse
import logging
import sys

from pydantic import ValidationError

from fctlp import __version__, config
from fctlp.commands import COMMANDS
from fctlp.errors import ConfigValidationError, FCTError, UnknownProblemError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fctlp",
        description="Flux-corrected transport solvers with limiters from linear programming",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", dest="log_level", default=config.LOG_LEVEL,
                        help="Logging level (default from FCT_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    # Configure logging
    logging.basicConfig(
        level=args.log_level.upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    logger.debug(f"[CLI] command={args.command}")

    try:
        return args.handler(args)
    except (ConfigValidationError, UnknownProblemError, ValidationError, ValueError, OSError) as e:
        logger.error(f"[CLI] invalid input: {str(e)}")
        return EXIT_VALIDATION
    except FCTError as e:
        logger.error(f"[CLI] solver failure: {str(e)}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
