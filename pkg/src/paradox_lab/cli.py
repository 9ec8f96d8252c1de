"""Command-line front end: ``paradox-lab run | explain | selftest``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dsl, harness
from .logic import BoundExhausted


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paradox-lab", description="Agents reasoning about each other in box world and quantum theory.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and search for contradictions")
    run.add_argument("file")
    run.add_argument("--trace", metavar="OUT", help="write the derivation log and certificate slices")
    run.add_argument("--json", metavar="OUT", help="write the report as JSON ('-' for stdout)")
    run.add_argument("--depth", type=int, default=4, help="maximum knowledge nesting (default 4)")
    run.add_argument("--ignore-select", action="store_true", help="drop the SELECT block")
    run.add_argument("--dump-state", action="store_true", help="include the full state after each event")
    run.add_argument("--explain-update", action="store_true", help="print each memory update matrix in block form")

    exp = sub.add_parser("explain", help="print what each agent describes at a given time")
    exp.add_argument("file")
    exp.add_argument("--at", type=int, required=True, metavar="T")
    exp.add_argument("--agent", metavar="NAME")

    st = sub.add_parser("selftest", help="run the built-in physics and logic checks")
    for scope in ("theorems", "quantum", "logic", "all"):
        st.add_argument(f"--{scope}", action="append_const", const=scope, dest="scopes")
    return p


def _explain_updates(path: str) -> str:
    from .memory import build_memory_update

    exp = dsl.load_file(harness.resolve_path(path))
    out = []
    for m in exp.models:
        update = build_memory_update(policy=m.policy) if exp.theory == "boxworld" else None
        if update is None:
            out.append(f"{m.outsider} models {m.target}: CNOT onto a fresh |0> memory qubit")
            continue
        out.append(f"{m.outsider} models {m.target} ({m.policy}):")
        out.append(update.pretty())
    return "\n".join(out) + "\n"


def _run(args) -> int:
    if args.depth < 1:
        print("error: --depth must be at least 1", file=sys.stderr)
        return harness.EXIT_USAGE
    report = harness.run(args.file, depth=args.depth, ignore_select=args.ignore_select, dump_states=args.dump_state)
    if args.explain_update:
        sys.stdout.write(_explain_updates(args.file))
    if args.json == "-":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.to_text())
        if args.json:
            Path(args.json).write_text(report.to_json(), encoding="utf-8")
    if args.trace:
        Path(args.trace).write_text(report.trace_text(), encoding="utf-8")
    return report.exit_status


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return harness.EXIT_USAGE if exc.code else 0
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "explain":
            sys.stdout.write(harness.explain(args.file, args.at, args.agent))
            return 0
        ok, lines = harness.selftest(args.scopes or ["all"])
        print("\n".join(lines))
        return 0 if ok else 1
    except FileNotFoundError as exc:
        print(f"error: no such experiment file: {exc}", file=sys.stderr)
        return harness.EXIT_USAGE
    except dsl.ValidationError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d.line}: {d.code}: {d.message}", file=sys.stderr)
        return harness.EXIT_USAGE
    except dsl.DSLError as exc:
        detail = f" (expected one of: {', '.join(exc.expected)})" if exc.expected else ""
        print(f"{args.file}:{exc.line}:{exc.col}: {exc.kind} error: {exc.message}{detail}", file=sys.stderr)
        return harness.EXIT_USAGE
    except harness.PhysicsError as exc:
        print(f"{args.file}: physics error: {exc}", file=sys.stderr)
        return harness.EXIT_PHYSICS
    except BoundExhausted as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return harness.EXIT_PHYSICS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
