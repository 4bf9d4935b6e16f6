"""Command-line runs of SSH-chain quenches, phase diagrams and beam-array replicas.

Usage::

    sshdpt quench --preset quench-i --out runs/qi --svg --png
    sshdpt sweep --config my_sweep.json --workers 4
    sshdpt presets

A run's config is assembled from the preset (if any), then the ``--config``
file (nested objects are merged key by key), then the command-line flags.
The worker count falls back to ``$SSHDPT_WORKERS`` and then to 1.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import COMMANDS, ConfigError, load_file, load_preset, merge, preset_names, resolve
from .drivers import RUNNERS
from .phasemap import WORKERS_ENV, resolve_workers

log = logging.getLogger("sshdpt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sshdpt", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "quench": "edge-state quench: Loschmidt trace, critical times, DPT report",
        "disorder": "disordered-chain ensemble: PGP traces and critical-time statistics",
        "sweep": "dynamical phase diagram and boundary bisection",
        "mech": "carrier-level oscillator replica against tight-binding evolution",
        "spectrum": "eigenmodes, edge-state occupations and response spectrum",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", type=Path, metavar="PATH", help="JSON config file")
        p.add_argument("--preset", metavar="NAME", help="bundled preset (see `sshdpt presets`)")
        p.add_argument("--out", type=Path, metavar="DIR", help="output directory")
        p.add_argument("--workers", type=int, metavar="N",
                       help=f"worker threads (default: ${WORKERS_ENV} or 1)")
        p.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
        p.add_argument("--png", action="store_true", default=None,
                       help="also write matplotlib PNG figures")
    sub.add_parser("presets", help="list bundled presets")
    return parser


def assemble_config(args) -> dict:
    raw = {"command": args.command}
    if args.preset:
        preset = load_preset(args.preset)
        if preset.get("command") != args.command:
            raise ConfigError(f"preset {args.preset!r} is for `{preset.get('command')}`, "
                              f"not `{args.command}`")
        raw = merge(raw, preset)
    if args.config:
        doc = load_file(args.config)
        if doc.get("command", args.command) != args.command:
            raise ConfigError(f"{args.config}: config.command is {doc['command']!r}, "
                              f"not {args.command!r}")
        raw = merge(raw, doc)
    for flag in ("svg", "png"):
        if getattr(args, flag) is not None:
            raw[flag] = getattr(args, flag)
    if args.out is not None:
        raw["out"] = str(args.out)
    cfg = resolve(raw)
    cfg["workers"] = resolve_workers(args.workers if args.workers is not None else cfg["workers"])
    if cfg["out"] is None:
        cfg["out"] = str(Path("runs") / args.command)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.command == "presets":
        for name in preset_names():
            print(f"{name}\t{load_preset(name)['command']}")
        return 0
    try:
        cfg = assemble_config(args)
    except ConfigError as exc:
        print(f"sshdpt: invalid configuration: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        written = RUNNERS[args.command](cfg, out)
    except ValueError as exc:
        print(f"sshdpt {args.command}: {exc}", file=sys.stderr)
        return 1
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - start)
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
