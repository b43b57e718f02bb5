import argparse
import logging

from fctlp import services

logger = logging.getLogger(__name__)

NAME = "selftest"


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help="Randomized solver consistency checks")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lps", type=int, default=200, help="Random linear programs to check")
    parser.add_argument("--fields", type=int, default=50, help="Random fields to limit")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    report = services.self_test(args.seed, args.lps, args.fields)
    print(report.model_dump_json())
    if not report.passed:
        logger.warning(f"[CLI] self test failed: {report.model_dump_json()}")
        return 3
    return 0
