"""Command-line front end: generate, evaluate, summarize, export-lp.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 partial (some
instances failed or timed out).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .channel import config_from_dict
from .errors import ConfigError, ToolkitError
from .harness import DEFAULT_METHODS, cmd_evaluate, cmd_export_lp, cmd_generate, cmd_summarize
from .partitioners import METHODS

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3

# CLI flag -> ExperimentConfig field, for the generate subcommand.
_CONFIG_FLAGS = {
    "nodes": "num_nodes",
    "antennas": "num_antennas",
    "pilots": "num_pilots",
    "groups": "num_groups",
    "snr_db": "snr_db",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _methods_arg(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    for method in methods:
        if method not in METHODS:
            raise argparse.ArgumentTypeError(
                f"unknown method {method!r}; choose from {', '.join(METHODS)}"
            )
    if not methods:
        raise argparse.ArgumentTypeError("need at least one method")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimopart",
                     description="Directional node-grouping experiment toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[], help="generate channel instances",
                         description="Generate random channel instances plus a manifest.")
    gen.add_argument("--nodes", type=int, help="number of nodes per instance")
    gen.add_argument("--antennas", type=int, help="number of base station antennas")
    gen.add_argument("--pilots", type=int, help="pilots per coherence block")
    gen.add_argument("--groups", type=int, help="number of groups")
    gen.add_argument("--snr-db", dest="snr_db", type=float, help="per-node SNR in dB")
    gen.add_argument("--instances", type=int, default=20, help="instance count (default 20)")
    gen.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    gen.add_argument("--config", type=Path, help="JSON config file; flags override it")
    gen.add_argument("--out", type=Path, required=True, help="output directory")

    ev = sub.add_parser("evaluate", help="run partitioners and SINR evaluation",
                        description="Evaluate every (instance, method) pair into a results CSV.")
    ev.add_argument("--in", dest="in_dir", type=Path, required=True,
                    help="directory of instance files")
    ev.add_argument("--methods", type=_methods_arg, default=list(DEFAULT_METHODS),
                    help=f"comma-separated subset of {{{','.join(METHODS)}}}")
    ev.add_argument("--groups", type=int, help="group count (default: instance config)")
    ev.add_argument("--pilots", type=int, help="pilot count (default: instance config)")
    ev.add_argument("--timeout", type=float, default=300.0,
                    help="exact-solver budget per instance, seconds (default 300)")
    ev.add_argument("--workers", type=int, default=1, help="parallel workers (default 1)")
    ev.add_argument("--out", type=Path, required=True, help="results CSV path")

    summ = sub.add_parser("summarize", help="aggregate a results CSV",
                          description="Aggregate results per node count, method and metric.")
    summ.add_argument("--in", dest="in_csv", type=Path, required=True, help="results CSV")
    summ.add_argument("--out", type=Path, required=True, help="summary CSV path")

    exp = sub.add_parser("export-lp", help="emit the grouping MILP as an LP file",
                         description="Export the grouping model of one instance as LP text.")
    exp.add_argument("--in", dest="in_path", type=Path, required=True, help="instance file")
    exp.add_argument("--groups", type=int, help="group count (default: instance config)")
    exp.add_argument("--pilots", type=int, help="pilot count (default: instance config)")
    exp.add_argument("--verbatim", action="store_true",
                     help="emit the uncancelled textbook rows instead of the repaired model")
    exp.add_argument("--out", type=Path, required=True, help="LP file path")

    return parser


def _generate(args: argparse.Namespace) -> int:
    settings: dict = {}
    if args.config is not None:
        settings.update(json.loads(args.config.read_text()))
    for flag, field in _CONFIG_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            settings[field] = value
    if "num_nodes" not in settings:
        print("mimopart generate: error: --nodes (or num_nodes in --config) is required",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        config = config_from_dict(settings)
    except TypeError as exc:  # unknown field in the config file
        raise ConfigError(str(exc)) from None
    manifest = cmd_generate(config, args.seed, args.instances, args.out)
    print(f"wrote {len(manifest['instances'])} instances and manifest.json to {args.out}")
    return EXIT_OK


def _evaluate(args: argparse.Namespace) -> int:
    stats = cmd_evaluate(args.in_dir, args.methods, args.groups, args.pilots,
                         args.timeout, args.workers, args.out)
    for message in stats["messages"]:
        print(f"error: {message}", file=sys.stderr)
    print(f"wrote {stats['rows']} rows to {stats['out']} "
          f"({stats['timeouts']} timeouts, {stats['errors']} errors)")
    if stats["timeouts"] or stats["errors"]:
        return EXIT_PARTIAL
    return EXIT_OK


def _summarize(args: argparse.Namespace) -> int:
    written = cmd_summarize(args.in_csv, args.out)
    print(f"wrote {written} summary rows to {args.out}")
    return EXIT_OK


def _export_lp(args: argparse.Namespace) -> int:
    path = cmd_export_lp(args.in_path, args.groups, args.pilots, args.out,
                         repaired=not args.verbatim)
    print(f"wrote {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _generate,
        "evaluate": _evaluate,
        "summarize": _summarize,
        "export-lp": _export_lp,
    }
    try:
        return handlers[args.command](args)
    except (ToolkitError, OSError, json.JSONDecodeError) as exc:
        print(f"mimopart {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
