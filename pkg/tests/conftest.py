import re
from pathlib import Path

import pytest

from implicitml.diagnostics import CompileError
from implicitml.infer import Checker
from implicitml.pipeline import compile_source, run_program
from implicitml.surface.parser import parse

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

_EXPECT = re.compile(r"\(\* expect: (E-[A-Z-]+) \*\)")


def corpus_programs():
    """Source files of the corpus, without the explicit variants."""
    return sorted(p for p in CORPUS.glob("*.iml") if not p.name.endswith(".explicit.iml"))


def expected_code(source: str):
    m = _EXPECT.match(source)
    return m.group(1) if m else None


def runnable_programs():
    return [p for p in corpus_programs() if expected_code(p.read_text()) is None]


def failing_programs():
    return [p for p in corpus_programs() if expected_code(p.read_text()) is not None]


def read(name: str) -> str:
    return (CORPUS / name).read_text()


def checked(source: str, **kw):
    """Type-check `source`; returns (checker, final environment)."""
    c = Checker(**kw)
    env = c.check_program(parse(source))
    return c, env


def error_of(source: str, **kw):
    with pytest.raises(CompileError) as info:
        compile_source(source, **kw)
    return info.value.diagnostic


def output_of(source: str) -> str:
    return run_program(compile_source(source).core).stdout


def sigs(source: str) -> list:
    c, _ = checked(source)
    return c.signatures()


SHOW_PRELUDE = """
module type Show = sig
  type t
  val show : t -> string
end

let show {S : Show} x = S.show x

implicit module Show_int = struct
  type t = int
  let show = string_of_int
end

implicit module Show_float = struct
  type t = float
  let show = string_of_float
end

implicit module Show_list {S : Show} = struct
  type t = S.t list
  let show l = "[" ^ String.concat ", " (List.map S.show l) ^ "]"
end
"""


# PASS/FAIL lines from the acceptance suite, echoed in the summary.
RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
