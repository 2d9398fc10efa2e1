"""Command line interface: ``moebiuskit run`` and ``moebiuskit list-examples``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigInvalid
from .runner import list_examples, run_scenario, to_json

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moebiuskit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file and emit a JSON report")
    run.add_argument("scenario", help="path to the scenario JSON ('-' for stdin)")
    run.add_argument("--tol-scale", type=float, default=1.0, help="multiply every upper tolerance")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--no-timestamp", action="store_true",
                     help="omit the timestamp and wall times so reports are byte-reproducible")
    run.add_argument("--out", default="-", help="report path (default: stdout)")

    lst = sub.add_parser("list-examples", help="show the example catalog")
    lst.add_argument("--json", action="store_true", help="emit JSON")
    lst.add_argument("--n", type=int, default=5, help="dimension used for the domain windows")
    return parser


def _emit(text: str, path: str):
    if path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _cmd_run(args) -> int:
    try:
        if args.scenario == "-":
            raw = json.load(sys.stdin)
        else:
            with open(args.scenario, encoding="utf-8") as fh:
                raw = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"error: ConfigInvalid at $: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_scenario(raw, tol_scale=args.tol_scale, seed=args.seed, timestamp=not args.no_timestamp)
    except ConfigInvalid as exc:
        print(f"error: ConfigInvalid at {exc.path}", file=sys.stderr)
        print(f"  {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(to_json(report), args.out)
    for r in report["checks"]:
        tag = r["status"].upper()
        extra = f" ({r['error']['name']})" if r["error"] else ""
        print(f"{tag:5s} {r['check']} [{r['target']}]{extra}", file=sys.stderr)
    return EXIT_PASS if report["summary"]["all_pass"] else EXIT_FAIL


def _cmd_list(args) -> int:
    catalog = list_examples(args.n)
    if args.json:
        print(to_json(catalog))
        return EXIT_PASS
    for entry in catalog:
        params = ", ".join(f"{k}: {v}" for k, v in entry["params"].items()) or "none"
        print(f"{entry['id']}")
        print(f"  {entry['description']}")
        print(f"  n: {entry['n']['min']}..{entry['n']['max']} (default {entry['n']['default']})")
        print(f"  params: {params}")
        print(f"  variables: {', '.join(entry['variables'])}")
        print(f"  default window: {entry['default_window']}")
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_list(args)


if __name__ == "__main__":
    sys.exit(main())
