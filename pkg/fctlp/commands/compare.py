import argparse
import logging

from fctlp import services

logger = logging.getLogger(__name__)

NAME = "compare"


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help="L1 distance between two solution CSVs")
    parser.add_argument("first")
    parser.add_argument("second")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    logger.debug(f"[CLI] compare {args.first} {args.second}")
    result = services.compare_solutions(args.first, args.second)
    print(result.model_dump_json())
    return 0
