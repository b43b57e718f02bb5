import argparse
import json
import logging
import os

from fctlp import config, services
from fctlp.errors import ConfigValidationError
from fctlp.schemas import LimiterMode

logger = logging.getLogger(__name__)

NAME = "run"

# flag destination -> RunConfig field
_OVERRIDES = ("problem", "mode", "sigma", "cells", "dt", "t_end", "high_flux", "low_flux", "out")


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help="Run one problem and write solution snapshots and metrics")
    parser.add_argument("--config", help="JSON file mirroring RunConfig; flags override its values")
    parser.add_argument("--problem", help="Problem name")
    parser.add_argument("--mode", choices=[m.value for m in LimiterMode], help="Limiter mode")
    parser.add_argument("--sigma", type=float, help="Time weight in [0, 1]")
    parser.add_argument("--cells", type=int, help="Cells per axis")
    parser.add_argument("--dt", type=float, help="Time step")
    parser.add_argument("--t-end", dest="t_end", type=float, help="End time")
    parser.add_argument("--high-flux", dest="high_flux", choices=["centered", "quick"])
    parser.add_argument("--low-flux", dest="low_flux", choices=["upwind", "rusanov", "godunov"])
    parser.add_argument("--out", help="Output directory")
    parser.set_defaults(handler=handle)


def _read_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigValidationError(f"config: cannot read {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigValidationError("config: expected a JSON object")
    return data


def build_run_config(args: argparse.Namespace):
    data = _read_config_file(args.config) if getattr(args, "config", None) else {}
    for name in _OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if "problem" not in data:
        raise ConfigValidationError("problem: field required")
    return services.load_run_config(data)


def handle(args: argparse.Namespace) -> int:
    run = build_run_config(args)
    logger.info(f"[CLI] run {run.problem} mode={run.mode.value} sigma={run.sigma}")
    outcome = services.execute_run(run)
    out_dir = run.out or os.path.join(config.OUTPUT_DIR, f"{run.problem}_{run.mode.value}_sigma{run.sigma:g}")
    files = services.write_artifacts(outcome, out_dir)
    logger.info(f"[CLI] run finished: {len(files)} files in {out_dir}")
    print(services.metrics_summary(outcome.metrics))
    return 0
