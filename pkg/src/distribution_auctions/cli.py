#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command-line interface

Examples:
  python -m distribution_auctions stats --instance i1.json --engine exact
  python -m distribution_auctions run-pm --instance i1.json --k 1
  python -m distribution_auctions reproduce iid --n 2 --dist '{"kind":"degenerate","value":1}'
  python -m distribution_auctions sweep --count 1000 --K 1 2 3 --seed 7 --output csv

Exit codes: 0 ok, 1 usage, 2 validation, 3 capacity, 4 audit failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import Config
from .distributions import Distribution, Instance, distribution_from_json, instance_from_json
from .errors import AuctionError, UsageError, ValidationError
from .runner import REPRODUCE_TARGETS, AuditRunner, RunConfig

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting"""

    def error(self, message):
        raise UsageError(message)


# === INPUT PARSING ===

def parse_json_argument(source: str, what: str):
    """
    Load JSON from an inline string or a file path

    Args:
        source: Inline JSON (starting with '{' or '[') or a path
        what: Field name for error messages
    """
    text = source
    if not source.lstrip().startswith(("{", "[")):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as e:
            raise ValidationError(f"cannot read {source}: {e.strerror}", what)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}", what)


def parse_instance(source: str) -> Instance:
    """Validated Instance from a path or inline JSON"""
    return instance_from_json(parse_json_argument(source, "instance"))


def parse_distribution(source: str) -> Distribution:
    return distribution_from_json(parse_json_argument(source, "dist"), "dist")


def parse_class(source: str) -> List[Distribution]:
    raw = parse_json_argument(source, "class")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("class must be a non-empty JSON list of distributions", "class")
    return [distribution_from_json(item, f"class[{k}]") for k, item in enumerate(raw)]


def parse_mechanism(source: str) -> dict:
    raw = parse_json_argument(source, "mech")
    if not isinstance(raw, dict):
        raise ValidationError("mechanism config must be a JSON object", "mech")
    return raw


# === PARSER ===

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--cap", type=int, help="Joint-support cap for the exact engine")
    common.add_argument("--seed", type=int, default=0, help="Root seed (64-bit unsigned)")
    common.add_argument("--output", choices=["json", "csv"], default="json", help="Report format")
    common.add_argument("--output-path", help="Report file (stdout when omitted)")
    common.add_argument("--workers", type=int, default=1, help="Sweep threads; 0 = physical cores")
    common.add_argument("--log-level", default=None, help="Logging level (default WARNING)")

    parser = _Parser(
        prog="distribution_auctions",
        description="Distribution-reporting auction mechanisms: benchmarks and audits",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n\n", 1)[1],
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    stats = sub.add_parser("stats", parents=[common], help="Per-buyer w, s, r with WEL and base revenue")
    stats.add_argument("--instance", required=True, help="Instance JSON (path or inline)")
    stats.add_argument("--engine", choices=["exact", "mc"], default="exact")
    stats.add_argument("--samples", type=int, default=100_000)
    stats.add_argument("--model", choices=["spa", "vcg"])

    for name, helptext in (("run-pm", "Peer-Max revenue and either-or check"),
                           ("run-pw", "Peer-Welfare revenue and either-or check")):
        peer = sub.add_parser(name, parents=[common], help=helptext)
        peer.add_argument("--instance", required=True)
        peer.add_argument("--k", type=int, default=1)

    iid = sub.add_parser("run-iid", parents=[common], help="Peer-report fee mechanism revenue")
    iid.add_argument("--instance", required=True)

    audit = sub.add_parser("ic-audit", parents=[common], help="Exhaustive deviation search")
    audit.add_argument("--mech", required=True, help='e.g. {"mech":"peer_max","k":1}')
    audit.add_argument("--class", dest="distribution_class", required=True,
                       help="JSON list of distributions (path or inline)")
    audit.add_argument("--n", type=int, default=2)

    reproduce = sub.add_parser("reproduce", parents=[common], help="Named reproduction suites")
    reproduce.add_argument("target", choices=REPRODUCE_TARGETS)
    reproduce.add_argument("--n", type=int)
    reproduce.add_argument("--dist", help="Buyer law for the iid target")
    reproduce.add_argument("--trials", type=int)
    reproduce.add_argument("--count", type=int)
    reproduce.add_argument("--k", type=int, default=1)
    reproduce.add_argument("--K", type=int, nargs="+")

    sweeper = sub.add_parser("sweep", parents=[common], help="Either-or sweep over random instances")
    sweeper.add_argument("--count", type=int, default=1000)
    sweeper.add_argument("--n-min", type=int, default=2)
    sweeper.add_argument("--n-max", type=int, default=5)
    sweeper.add_argument("--k-min", type=int, default=1)
    sweeper.add_argument("--k-max", type=int, default=3)
    sweeper.add_argument("--K", type=int, nargs="+", default=[1])
    sweeper.add_argument("--model", choices=["spa", "vcg"], default="spa")
    sweeper.add_argument("--vmax", type=float, default=10.0)
    sweeper.add_argument("--m-max", type=int, default=3)
    sweeper.add_argument("--d-max", type=int, default=2)
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Turn parsed flags into a validated RunConfig"""
    options = vars(args)
    run = RunConfig(
        subcommand=args.subcommand,
        target=options.get("target"),
        engine=options.get("engine", "exact"),
        model=options.get("model"),
        samples=options.get("samples", 100_000),
        seed=args.seed,
        cap=args.cap,
        output=args.output,
        output_path=args.output_path,
        k=options.get("k", 1),
        n=options.get("n"),
        trials=options.get("trials"),
        count=options.get("count"),
        workers=args.workers,
    )
    if options.get("instance"):
        run.instance = parse_instance(args.instance)
    if options.get("mech"):
        run.mechanism = parse_mechanism(args.mech)
    if options.get("distribution_class"):
        run.distribution_class = parse_class(args.distribution_class)
    if options.get("dist"):
        run.dist = parse_distribution(args.dist)
    if options.get("K"):
        run.K = tuple(options["K"])
    if args.subcommand == "sweep":
        run.n_range = (args.n_min, args.n_max)
        run.k_range = (args.k_min, args.k_max)
        run.vmax = args.vmax
        run.m_max = args.m_max
        run.d_max = args.d_max
    return run


def _configure_logging(level: Optional[str], config: Config):
    name = (level or config.LOG_LEVEL).upper()
    numeric = getattr(logging, name, None)
    if not isinstance(numeric, int):
        raise UsageError(f"unknown log level {level!r}")
    logging.basicConfig(level=numeric, format="%(message)s", stream=sys.stderr)
    logging.getLogger().setLevel(numeric)


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI entry point

    Args:
        argv: Arguments (defaults to sys.argv[1:])

    Returns:
        int: Exit status
    """
    config = Config()
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.log_level, config)
        run = build_run_config(args)
        return AuditRunner(config).run(run)
    except AuctionError as e:
        logging.basicConfig(format="%(message)s", stream=sys.stderr)
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("🛑 Interrupted")
        return 130
