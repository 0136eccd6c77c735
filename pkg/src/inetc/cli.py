"""Command-line front end: check, compile, and run .inet programs.

Exit codes: 0 success, 1 semantic error (ill-formed rules, conflicting
rules, step limit), 2 parse or I/O failure, 3 usage error (including a run
without a net declaration).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .check import verify_well_formed
from .diagnostics import ConflictingRulesError, InetError, ParseError, StepLimitExceeded
from .parser import parse_program
from .printer import canonical_net, format_program
from .runtime import DEFAULT_MAX_STEPS, instantiate, readback, reduce
from .translate import translate_program

EXIT_OK = 0
EXIT_SEMANTIC = 1
EXIT_PARSE_IO = 2
EXIT_USAGE = 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="inetc", description="interaction net compiler and runtime")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="verify well-formedness of a program")
    p_check.add_argument("file")

    p_compile = sub.add_parser("compile", help="translate nested rules to ordinary rules")
    p_compile.add_argument("file")
    p_compile.add_argument("-o", "--output", required=True, help="output .inet file")

    p_run = sub.add_parser("run", help="reduce the program's net to normal form")
    p_run.add_argument("file")
    p_run.add_argument("--mode", choices=["orn", "direct"], default="orn")
    p_run.add_argument("--strategy", choices=["fifo", "lifo", "random"], default="fifo")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--max-steps", type=int, default=None)
    p_run.add_argument("--trace", action="store_true")
    return parser


def _print_diagnostics(diags, path: str):
    for diag in diags:
        print(diag.format(path), file=sys.stderr)


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        print(f"error[IO] {path}: {exc.strerror or exc}", file=sys.stderr)
        return None
    return text


def cmd_check(path: str) -> int:
    text = _load(path)
    if text is None:
        return EXIT_PARSE_IO
    try:
        program = parse_program(text)
    except ParseError as exc:
        _print_diagnostics(exc.diagnostics, path)
        return EXIT_PARSE_IO
    except InetError as exc:
        _print_diagnostics(exc.diagnostics, path)
        return EXIT_PARSE_IO
    diags = verify_well_formed(program.rules)
    _print_diagnostics(diags, path)
    if any(d.severity == "error" for d in diags):
        return EXIT_SEMANTIC
    return EXIT_OK


def _compile_rules(path: str):
    """Parse, verify, and translate; returns (program, rules) or an exit code."""
    text = _load(path)
    if text is None:
        return EXIT_PARSE_IO
    try:
        program = parse_program(text)
    except InetError as exc:
        _print_diagnostics(exc.diagnostics, path)
        return EXIT_PARSE_IO
    diags = verify_well_formed(program.rules)
    _print_diagnostics(diags, path)
    if any(d.severity == "error" for d in diags):
        return EXIT_SEMANTIC
    try:
        translated = translate_program(program.rules, program.symbols)
    except (ConflictingRulesError, InetError) as exc:
        _print_diagnostics(exc.diagnostics, path)
        return EXIT_SEMANTIC
    return program, translated


def cmd_compile(path: str, out_path: str) -> int:
    result = _compile_rules(path)
    if isinstance(result, int):
        return result
    program, translated = result
    text = format_program(translated, program.initial_net)
    try:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        print(f"error[IO] {out_path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_PARSE_IO
    return EXIT_OK


def cmd_run(
    path: str,
    mode: str = "orn",
    strategy: str = "fifo",
    seed: int = 0,
    max_steps: Optional[int] = None,
    trace: bool = False,
) -> int:
    if max_steps is None:
        env = os.environ.get("INETC_MAX_STEPS")
        max_steps = int(env) if env else DEFAULT_MAX_STEPS

    if mode == "orn":
        result = _compile_rules(path)
        if isinstance(result, int):
            return result
        program, rules = result
    else:
        text = _load(path)
        if text is None:
            return EXIT_PARSE_IO
        try:
            program = parse_program(text)
        except InetError as exc:
            _print_diagnostics(exc.diagnostics, path)
            return EXIT_PARSE_IO
        diags = verify_well_formed(program.rules)
        _print_diagnostics(diags, path)
        if any(d.severity == "error" for d in diags):
            return EXIT_SEMANTIC
        rules = program.rules

    if program.initial_net is None:
        print(f"error[USAGE] {path}: program has no 'net' declaration", file=sys.stderr)
        return EXIT_USAGE

    rn = instantiate(program.initial_net)
    try:
        _, run_trace = reduce(rn, rules, mode=mode, max_steps=max_steps, strategy=strategy, seed=seed)
    except StepLimitExceeded as exc:
        if trace and exc.trace is not None:
            for step in exc.trace.steps:
                print(step.line())
        print("step limit exceeded")
        return EXIT_SEMANTIC
    if trace:
        for line in run_trace.lines():
            print(line)
    else:
        print(run_trace.final_line())
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "check":
        return cmd_check(args.file)
    if args.command == "compile":
        return cmd_compile(args.file, args.output)
    if args.command == "run":
        return cmd_run(
            args.file,
            mode=args.mode,
            strategy=args.strategy,
            seed=args.seed,
            max_steps=args.max_steps,
            trace=args.trace,
        )
    return EXIT_USAGE


def entry():
    sys.exit(main())
