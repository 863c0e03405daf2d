"""Command-line entry point.

Subcommands:

``run``             execute every scenario in a config (optionally filtered)
``diagnose``        run only diagnostics and condition-check scenarios
``estimate-g``      run only dominating-coefficient scenarios
``list-scenarios``  print the scenario table of a config

All behaviour is controlled by flags; no environment variables are read.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness


def _add_common(p: argparse.ArgumentParser, with_out: bool = True) -> None:
    p.add_argument("--config", required=True, type=Path, help="TOML scenario file")
    if with_out:
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override every scenario seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (never changes results)")
        p.add_argument("--samples-scale", type=float, default=1.0,
                       help="global multiplier on sample counts for quick runs")
        p.add_argument("--scenario", action="append", default=None,
                       help="run only this scenario id (repeatable)")


def _load(path: Path):
    text = path.read_text()
    return text, harness.parse_config(text)


def _execute(args, kinds=None) -> int:
    text, configs = _load(args.config)
    if kinds is not None:
        configs = [c for c in configs if c.kind in kinds]
    if args.scenario:
        wanted = set(args.scenario)
        configs = [c for c in configs if c.id in wanted]
        missing = wanted - {c.id for c in configs}
        if missing:
            print(f"unknown scenario id(s): {sorted(missing)}", file=sys.stderr)
            return 2
    if not configs:
        print("no scenarios selected", file=sys.stderr)
        return 2
    results = harness.run_config(configs, parallelism=args.threads,
                                 samples_scale=args.samples_scale,
                                 seed_override=args.seed)
    harness.emit_outputs(results, args.out, config_text=text,
                         seed_override=args.seed)
    failed = 0
    for res in results:
        status = res.verdict or "done"
        if res.error:
            status = f"Error ({res.error})"
            failed += 1
        print(f"{res.config.id:32s} {res.config.kind:20s} {status}")
    print(f"outputs written to {args.out}")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bigjump")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("run", help="run all scenarios in a config"))
    _add_common(sub.add_parser("diagnose", help="run diagnostics/condition scenarios"))
    _add_common(sub.add_parser("estimate-g", help="run dominating-coefficient scenarios"))
    _add_common(sub.add_parser("list-scenarios", help="list scenarios"), with_out=False)

    args = parser.parse_args(argv)
    if args.command == "list-scenarios":
        _text, configs = _load(args.config)
        for cfg in configs:
            print(f"{cfg.id:32s} {cfg.kind:20s} seed={cfg.seed}")
        return 0
    kinds = None
    if args.command == "diagnose":
        kinds = {"diagnostics", "condition_check"}
    elif args.command == "estimate-g":
        kinds = {"dominating_estimate"}
    return _execute(args, kinds)


if __name__ == "__main__":
    raise SystemExit(main())
