"""Command line entry point: ``hdrbench <command> --config FILE [--seed N] [--workers K] [--out DIR]``.

The log level is read from the HDRBENCH_LOG_LEVEL environment variable (default INFO).
Exit status is 0 on success and 1 if any stage or scene failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from . import pipeline
from .config import BenchConfig

COMMANDS = {
    "simulate": pipeline.cmd_simulate,
    "baselines": pipeline.cmd_baselines,
    "evaluate": pipeline.cmd_evaluate,
    "rank": pipeline.cmd_rank,
    "export-vdp": pipeline.cmd_export_vdp,
}

log = logging.getLogger("hdrbench")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdrbench", description="Single-image HDR reconstruction benchmark")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON benchmark config")
    parser.add_argument("--seed", type=int, help="override the global seed")
    parser.add_argument("--workers", type=int, help="scene-level worker processes")
    parser.add_argument("--out", help="override the output root")
    parser.add_argument("--ingest", help="export-vdp only: CSV of scene,method,q_jod to fold into the scores")
    parser.add_argument("--camera", help="export-vdp only: restrict to one camera config")
    return parser


def load_config(args) -> BenchConfig:
    cfg = BenchConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise ValueError("--workers must be at least 1")
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["output_root"] = os.path.abspath(args.out)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = os.environ.get("HDRBENCH_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if args.command != "export-vdp" and (args.ingest or args.camera):
        log.error("--ingest and --camera only apply to export-vdp")
        return 2
    try:
        cfg = load_config(args)
        if args.command == "export-vdp":
            failures = pipeline.cmd_export_vdp(cfg, ingest=args.ingest, camera=args.camera)
        else:
            failures = COMMANDS[args.command](cfg)
    except Exception as exc:  # noqa: BLE001 - any error maps to a nonzero exit
        log.error("%s: %s", args.command, exc)
        log.debug("traceback", exc_info=True)
        return 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
