"""Command line: ``asymlab run|list|validate``.

Exit codes: 0 success, 2 schema error (field name on stderr), 3 numerical
failure (module error payload as JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import AsymlabError
from . import catalog
from .config import SchemaError, load_spec, parse_tolerance_flags
from .runner import run

EXIT_SCHEMA = 2
EXIT_NUMERIC = 3


def _load(target: str):
    if not Path(target).exists():
        entry = catalog.get(target)
        if entry is not None:
            return entry.spec()
    return load_spec(target)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymlab", description="Truncation-ladder experiments on asymptotes of operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a spec file (or a built-in name)")
    p_run.add_argument("spec")
    p_run.add_argument("--out", help="output directory (overrides output_dir)")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes for ladder rungs")
    p_run.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    sub.add_parser("list", help="print the built-in experiments")
    p_val = sub.add_parser("validate", help="check a spec file without running it")
    p_val.add_argument("spec")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(catalog.render_catalog())
        return 0
    try:
        spec = _load(args.spec)
        if args.command == "validate":
            print(f"ok: {spec.name} ({spec.kind}, {len(spec.truncation_ladder)} rungs)")
            return 0
        tol = parse_tolerance_flags(args.tol)
        if args.jobs < 1:
            raise SchemaError("--jobs", "must be at least 1")
        if args.out:
            spec.output_dir = Path(args.out)
    except SchemaError as exc:
        print(f"schema error in field '{exc.field}': {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        manifest = run(spec, jobs=args.jobs, tol=tol)
    except AsymlabError as exc:
        print(json.dumps(exc.payload, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, ValueError, FloatingPointError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {len(manifest.files)} files to {spec.output_dir}")
    for key in sorted(manifest.verdicts):
        print(f"  {key}: {manifest.verdicts[key]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
