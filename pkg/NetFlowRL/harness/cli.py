"""
Command-line entry point.

    netflowrl train --config exp.json --out runs/mcf
    netflowrl eval --config exp.json --checkpoint runs/mcf/checkpoint.json
    netflowrl sweep-s-type --config scim.json
    netflowrl bench-timing --out runs/timing
    netflowrl make-synthetic-trips --out trips.csv --days 5

Failures print ``{"error", "message", "field"}`` as JSON on stderr and exit
with status 1; usage errors exit with status 2.
"""

import argparse
import json
import logging
import os
import sys

from ..envs import DvrConfig, DvrEnv, make_synthetic_trips
from ..exceptions import NetFlowRLError
from .config import ExperimentConfig, load_config
from .runner import run_eval, run_sweep, run_train
from .timing import DEFAULT_WIDTHS, timing_benchmark

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _experiment(args):
    config = load_config(args.config) if args.config else ExperimentConfig().validate()
    if args.seed is not None:
        config.seed = args.seed
        config.train.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    return config


def _cmd_train(args):
    config = _experiment(args)
    trainer = run_train(config, resume=args.checkpoint)
    return {"updates": trainer.update, "out_dir": config.out_dir,
            "checkpoint": os.path.join(config.out_dir, "checkpoint.json")}


def _cmd_eval(args):
    config = _experiment(args)
    return run_eval(config, checkpoint=args.checkpoint).to_dict()


def _cmd_sweep(args):
    config = _experiment(args)
    result = run_sweep(config)
    return {"warehouse_level": result.best.warehouse, "store_level": result.best.store,
            "mean_profit": result.best_profit,
            "surface": os.path.join(config.out_dir, "s_type_surface.csv")}


def _cmd_timing(args):
    config = _experiment(args)
    timing = config.timing or {}
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "timing.csv")
    frame = timing_benchmark(timing.get("widths", DEFAULT_WIDTHS), timing.get("decisions", 20), config.seed,
                             config.eval_penalty_weight, config.backend, config.oracle_backend, path=path)
    return {"sizes": len(frame), "csv": path}


def _cmd_trips(args):
    cfg = DvrConfig()
    if args.config:
        config = load_config(args.config)
        if config.env == "dvr":
            cfg = config.env_config
    env = DvrEnv(cfg)
    path = args.out or "trips.csv"
    frame = make_synthetic_trips(env.rates, path, seed=args.seed or 0, bin_seconds=cfg.bin_seconds,
                                 stations=env.graph.nodes, price=env.price, travel_steps=env.trip_steps,
                                 days=args.days)
    return {"trips": len(frame), "csv": path}


COMMANDS = {
    "train": (_cmd_train, "train the graph policy"),
    "eval": (_cmd_eval, "evaluate a policy against the random and oracle references"),
    "sweep-s-type": (_cmd_sweep, "exhaustive order-up-to level search"),
    "bench-timing": (_cmd_timing, "per-decision timing of bi-level control against the oracle"),
    "make-synthetic-trips": (_cmd_trips, "sample a trip-record CSV from the vehicle-routing rates"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="netflowrl", description="Bi-level graph control experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, text) in COMMANDS.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--out", help="output directory (output file for make-synthetic-trips)")
        p.add_argument("--checkpoint", help="policy checkpoint (train: resume from it)")
        p.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)
        if name == "make-synthetic-trips":
            p.add_argument("--days", type=int, default=1, help="days of trips to sample")
    return parser


def _error(exc):
    return {"error": type(exc).__name__, "message": str(exc), "field": getattr(exc, "field", None)}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    handler = COMMANDS[args.command][0]
    try:
        result = handler(args)
    except (NetFlowRLError, OSError) as exc:
        logger.debug("command %s failed", args.command, exc_info=True)
        print(json.dumps(_error(exc)), file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
