import argparse
import logging

from fctlp import services

logger = logging.getLogger(__name__)

NAME = "bench"


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help="Reproduce a benchmark table")
    parser.add_argument("table_id", choices=services.BENCH_IDS, help="Benchmark id")
    parser.add_argument("--out", help="Output root directory")
    parser.add_argument("--jobs", type=int, help="Worker processes")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    logger.info(f"[CLI] bench {args.table_id}")
    rows = services.run_bench(args.table_id, args.out, args.jobs)
    for row in rows:
        published = f"{row.published_l1_error:.4e}" if row.published_l1_error is not None else "-"
        print(f"{row.segment:<18} t={row.t:<4g} sigma={row.sigma:<4g} {row.mode:<11} "
              f"l1={row.l1_error:.4e} (published {published}) y_max={row.y_max:.4f}")
    return 0
