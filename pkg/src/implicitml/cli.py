"""Command-line driver.

    implicitml check FILE        type-check and print top-level signatures
    implicitml elaborate FILE    print the implicit-free core program
    implicitml run FILE          check, elaborate and evaluate
    implicitml trace FILE        check and print the resolution trace

FILE may be `-` for standard input.  Exit status: 0 on success, 1 on a
diagnostic or runtime error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .builtins import RuntimeFailure
from .diagnostics import CompileError, render
from .pipeline import compile_source, run_program
from .resolve import DEFAULT_MAX_DEPTH

COMMANDS = ("check", "elaborate", "run", "trace")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def depth(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--max-depth must be a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"--max-depth must be at least 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="implicitml", description="A small ML with modular implicits.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file", help="source file, or - for standard input")
    p.add_argument("--trace-resolution", action="store_true", help="print resolution events to standard error")
    p.add_argument("--json", action="store_true", help="print diagnostics as JSON")
    p.add_argument("--max-depth", type=depth, default=None, help=f"functor nesting cap (default {DEFAULT_MAX_DEPTH})")
    p.add_argument("--no-color", action="store_true", help="never colour diagnostics")
    return p


def read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        max_depth = args.max_depth
        if max_depth is None:
            env = os.environ.get("IMPLICITML_MAX_DEPTH")
            max_depth = depth(env) if env else DEFAULT_MAX_DEPTH
        source = read_source(args.file)
    except (UsageError, argparse.ArgumentTypeError) as e:
        print(f"implicitml: usage error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"implicitml: usage error: cannot read {e.filename}: {e.strerror}", file=sys.stderr)
        return 2

    filename = "<stdin>" if args.file == "-" else args.file
    tracing = args.trace_resolution or args.command == "trace"
    trace = (lambda line: print(line, file=sys.stderr)) if tracing else None
    color = not args.no_color and sys.stderr.isatty() and "NO_COLOR" not in os.environ

    try:
        comp = compile_source(source, max_depth=max_depth, trace=trace)
    except CompileError as e:
        print(render(e.diagnostic, "json" if args.json else "human", filename, color), file=sys.stderr)
        return 1

    if args.command in ("check", "trace"):
        for line in comp.checker.signatures():
            print(line)
    elif args.command == "elaborate":
        sys.stdout.write(comp.core_text)
    else:
        try:
            result = run_program(comp.core)
        except RuntimeFailure as e:
            sys.stdout.write(getattr(e, "partial_output", ""))
            if args.json:
                print(json.dumps({"runtime_error": str(e)}, sort_keys=True), file=sys.stderr)
            else:
                print(f"{filename}: runtime error: {e}", file=sys.stderr)
            return 1
        sys.stdout.write(result.stdout)
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
