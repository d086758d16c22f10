"""End-to-end entry points: parse, check, elaborate, re-check, run."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .builtins import RuntimeFailure
from .elaborate import elaborate, make_explicit
from .evaluate import Evaluator
from .infer import Checker
from .resolve import DEFAULT_MAX_DEPTH
from .surface import syntax as S
from .surface.parser import parse
from .surface.pretty import pretty


@dataclass
class Compilation:
    program: S.Program
    checker: Checker
    core: S.Program

    @property
    def core_text(self) -> str:
        return pretty(self.core)

    def explicit_text(self) -> str:
        return pretty(make_explicit(self.checker, self.program))


def compile_source(source: str, max_depth: int = DEFAULT_MAX_DEPTH,
                   trace: Optional[Callable[[str], None]] = None) -> Compilation:
    """Parse, type-check and elaborate.  Raises CompileError."""
    program = parse(source)
    checker = Checker(max_depth=max_depth, trace=trace)
    checker.check_program(program)
    return Compilation(program, checker, elaborate(checker, program))


def check_core(core: S.Program) -> Checker:
    """Type-check an elaborated program with implicits disabled."""
    checker = Checker(implicits=False)
    checker.check_program(core)
    return checker


@dataclass
class RunResult:
    value: object
    stdout: str


def run_program(core: S.Program) -> RunResult:
    ev = Evaluator()
    try:
        value = ev.run(core)
    except RuntimeFailure as e:
        e.partial_output = ev.stdout
        raise
    return RunResult(value, ev.stdout)


def run_source(source: str, max_depth: int = DEFAULT_MAX_DEPTH) -> RunResult:
    return run_program(compile_source(source, max_depth).core)
