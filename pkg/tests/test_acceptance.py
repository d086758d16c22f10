"""The acceptance criteria, one test each.

Every test records a PASS or FAIL line; pytest prints them in its summary
and `python tests/test_acceptance.py` prints them directly."""
import sys
import traceback
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from implicitml.diagnostics import CompileError  # noqa: E402
from implicitml.pipeline import check_core, compile_source, run_program, run_source  # noqa: E402
from implicitml.resolve import Ambiguous, Unique  # noqa: E402
from implicitml.surface import syntax as S  # noqa: E402

from conftest import CORPUS, RESULTS, checked, read, runnable_programs  # noqa: E402


def code_of(source):
    try:
        compile_source(source)
    except CompileError as e:
        return e.diagnostic
    raise AssertionError("program was accepted")


def declarations(name):
    src = read(name)
    return src[:src.rindex("\nlet () =")]


def output(name):
    return run_source(read(name)).stdout


def criterion_1():
    assert output("show_basics.iml").splitlines() == [
        "Show an int: 5", "Show a float: 1.5", "Show a list of ints: [1, 2, 3]",
    ]
    lines = []
    compile_source(read("show_basics.iml"), trace=lines.append)
    chosen = [ln.split()[2] for ln in lines if ln.startswith("OUTCOME")]
    assert chosen == ["Show_int", "Show_float", "Show_list(Show_int)"], chosen


def criterion_2():
    c, _ = checked(read("monad.iml"))
    sigs = c.signatures()
    for line in [
        "val map : {M : Monad} -> 'a M.t -> ('a -> 'b) -> 'b M.t",
        "val join : {M : Monad} -> 'a M.t M.t -> 'a M.t",
        "val unless : {M : Monad} -> bool -> unit M.t -> unit M.t",
    ]:
        assert line in sigs, line
    d = code_of(read("monad_map_unparameterized.iml"))
    assert d.code == "E-AMBIGUOUS"
    assert [x["normal_form"] for x in d.payload["candidates"]] == ["Monad_list", "Monad_option"]


def criterion_3():
    cases = [
        ("show_basics.iml", "Show with type t = int", "Show_int"),
        ("show_basics.iml", "Show with type t = int list", "Show_list(Show_int)"),
        ("show_basics.iml", "Show with type t = int list list", "Show_list(Show_list(Show_int))"),
        ("diamond_alias.iml", "Eq with type t = int list", "Eq_list(Eq_int)"),
    ]
    for program, goal, expected in cases:
        c, env = checked(declarations(program))
        out = c.query(env, goal)
        assert isinstance(out, Unique) and out.normal_form == expected, (goal, out)
    c, env = checked(declarations("diamond_bad.iml"))
    out = c.query(env, "Eq with type t = int list")
    assert isinstance(out, Ambiguous)
    assert [nf for nf, _ in out.solutions] == ["Eq_list(Ord_int)", "Ord_list(Ord_int)"]


def criterion_4():
    d = code_of(read("show_it.iml"))
    assert d.code == "E-TERMINATION"
    assert d.payload["previous"] == d.payload["incoming"] == {"t": "int list list"}
    assert output("show_this_that.iml") == "[<[1, 2]>, <[3]>]\n"
    assert code_of(read("deep_list.iml")).code == "E-DEPTH-CAP"


def criterion_5():
    d = code_of(read("diamond_bad.iml"))
    assert d.code == "E-AMBIGUOUS"
    assert [x["normal_form"] for x in d.payload["candidates"]] == ["Eq_list(Ord_int)", "Ord_list(Ord_int)"]
    c, env = checked(declarations("diamond_alias.iml"))
    assert c.query(env, "Eq with type t = int list").normal_form == "Eq_list(Eq_int)"
    assert output("diamond_alias.iml").splitlines()[0] == "false"


def criterion_6():
    c, _ = checked(read("sqrt_double.iml"))
    sigs = c.signatures()
    for name in ["sqrt_double", "double_sqrt_ascribed", "double_sqrt_split"]:
        assert f"val {name} : float -> float" in sigs, name
    assert code_of(read("double_sqrt.iml")).code == "E-AMBIGUOUS"


def criterion_7():
    comp = compile_source(read("widen.iml"))
    assert [cand.text() for cand in comp.checker.resolutions.values()] == ["Widen_opt(Widen_int_float)"]
    assert run_program(comp.core).stdout == "Some 3.\n"
    assert output("backtracking.iml") == "1 + -2i (floating)\n"
    assert code_of(read("backtracking_ambiguous.iml")).code == "E-AMBIGUOUS"


def criterion_8():
    comp = compile_source(read("structural.iml"))
    used = {cand.text() for cand in comp.checker.resolutions.values()}
    assert {"Num_int", "Num_float", "Add_string"} <= used, used
    lines = run_program(comp.core).stdout.splitlines()
    assert lines[2] == "concat"
    assert lines[3] == str(1 * 3 + 2 * 4)


def criterion_9():
    for path in runnable_programs():
        comp = compile_source(path.read_text())
        assert S.implicit_constructs(comp.core) == [], path.name
        check_core(comp.core)
        expected = path.with_suffix(".out").read_text()
        assert run_program(comp.core).stdout == expected, path.name
        explicit = (CORPUS / f"{path.name[:-4]}.explicit.iml").read_text()
        assert run_source(explicit).stdout == expected, path.name


def criterion_10():
    import test_coherence as tc
    tc.test_scope_order_is_irrelevant()
    tc.test_irrelevant_entries_change_nothing()
    tc.test_agrees_with_brute_force()


def criterion_11():
    d = code_of(read("show_three_missing.iml"))
    assert d.code == "E-MISSING-ANNOT" and (d.span.line, d.span.col) == (21, 16)
    assert code_of(read("impure_functor.iml")).code == "E-IMPURE-FUNCTOR"
    both = read("compose_show_int1.iml") + "\n" + read("compose_show_int2.iml")
    assert code_of(both).code == "E-AMBIGUOUS"


CRITERIA = [
    (1, "show corpus output and resolutions", criterion_1),
    (2, "monad corpus types; unparameterized map is ambiguous", criterion_2),
    (3, "resolution unit examples", criterion_3),
    (4, "termination check and depth cap", criterion_4),
    (5, "diamond encodings", criterion_5),
    (6, "order of resolution", criterion_6),
    (7, "multi-type instances and backtracking", criterion_7),
    (8, "structural matching", criterion_8),
    (9, "elaboration properties over the corpus", criterion_9),
    (10, "coherence properties", criterion_10),
    (11, "negative suite", criterion_11),
]


def record(number, title, fn):
    try:
        fn()
    except Exception as e:
        line = f"FAIL criterion {number}: {title}: {type(e).__name__}: {e}"
        RESULTS.append(line)
        print(line)
        raise
    line = f"PASS criterion {number}: {title}"
    RESULTS.append(line)
    print(line)


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn):
    record(number, title, fn)


if __name__ == "__main__":
    failed = 0
    for number, title, fn in CRITERIA:
        try:
            record(number, title, fn)
        except Exception:
            failed += 1
            traceback.print_exc(limit=3)
    sys.exit(1 if failed else 0)
