"""Command line entry point.

    fkhull solve-short --config golden.ini --out results
    fkhull verify --config golden.ini --hull results/hull.coeffs
    fkhull batch a.ini b.ini --workers 2
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .entities.config import RunConfig, RunMode, load_config, override
from .exceptions import FKHullException
from .harness import Harness, run_batch
from .serialization import report_items

logger = logging.getLogger(__name__)

COMMANDS: Dict[str, RunMode] = {
    "solve-short": RunMode.SHORT,
    "solve-long": RunMode.LONG,
    "continue": RunMode.LADDER,
    "verify": RunMode.VERIFY,
    "oracle-compare": RunMode.ORACLE,
}
VERBOSITY = ("WARNING", "INFO", "DEBUG")


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="fkhull", description="Hull functions of Frenkel-Kontorova chains.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug output")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, mode in COMMANDS.items():
        command = commands.add_parser(name, help=f"run a {mode.value} job")
        command.add_argument("--config", type=Path, required=True, help="INI configuration file")
        command.add_argument("--out", type=Path, default=None, help="output directory (default: [run] out)")
        if mode is RunMode.VERIFY:
            command.add_argument("--hull", type=Path, default=None, help="hull dump to check (default: [run] hull)")
            command.add_argument("--long", action="store_true", help="check against the long-range model")
    batch = commands.add_parser("batch", help="run independent configurations concurrently")
    batch.add_argument("configs", type=Path, nargs="+", help="INI configuration files")
    batch.add_argument("--workers", type=int, default=None, help="thread pool size")
    return parser.parse_args(argv)


def _configure_logging(verbose: int, config: Optional[RunConfig] = None) -> None:
    level = VERBOSITY[min(verbose, len(VERBOSITY) - 1)]
    if not verbose and config is not None:
        level = config.run.log_level
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _print_report(items: List[Tuple[str, str]]) -> None:
    width = max((len(key) for key, _ in items), default=0)
    for key, value in items:
        print(f"{key.ljust(width)} : {value}")
    print()
    for key, value in items:
        print(f"{key}={value}")


def _run_one(args: argparse.Namespace) -> int:
    mode = COMMANDS[args.command]
    config = load_config(args.config)
    _configure_logging(args.verbose, config)
    if mode is RunMode.VERIFY:
        config = override(config, mode=mode, hull=args.hull, long=args.long or None)
    else:
        config = override(config, mode=mode)
    result = Harness(config, args.out).run()
    if mode is RunMode.VERIFY:
        _print_report(report_items(result.report))
    else:
        for path in result.files:
            print(path)
    return 0


def _run_batch(args: argparse.Namespace) -> int:
    _configure_logging(args.verbose)
    results = asyncio.run(run_batch([str(path) for path in args.configs], args.workers))
    failed = 0
    for item in results:
        if item.ok:
            print(f"{item.source}: ok")
        else:
            failed += 1
            print(f"{item.source}: {item.error}", file=sys.stderr)
    return 1 if failed else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        return _run_batch(args) if args.command == "batch" else _run_one(args)
    except FKHullException as err:
        logger.error("%s failed: %s", args.command, err.detail)
        print(f"error: {err.detail}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
