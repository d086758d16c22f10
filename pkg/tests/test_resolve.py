import pytest

from implicitml.resolve import (
    Ambiguous, Constraint, NoSolution, TerminationFailure, Unique, decreases, snapshot,
)
from implicitml.types import INT, PApply, Subst, list_of, path_str

from conftest import SHOW_PRELUDE, checked, error_of, read


def declarations(name):
    """The corpus program without its final `let () = ...` driver, which
    for the rejected programs is where resolution fails."""
    src = read(name)
    return src[:src.rindex("\nlet () =")]


def session(source):
    lines = []
    c, env = checked(source, trace=lines.append)
    lines.clear()
    return c, env, lines


# ---------------------------------------------------------------- resolve


@pytest.mark.parametrize("program, goal, expected", [
    ("show_basics.iml", "Show with type t = int", "Show_int"),
    ("show_basics.iml", "Show with type t = int list", "Show_list(Show_int)"),
    ("show_basics.iml", "Show with type t = int list list", "Show_list(Show_list(Show_int))"),
    ("diamond_alias.iml", "Eq with type t = int list", "Eq_list(Eq_int)"),
    ("monad.iml", "Monad with type 'a t = 'a list", "Monad_list"),
])
def test_unique(program, goal, expected):
    c, env = checked(declarations(program))
    out = c.query(env, goal)
    assert isinstance(out, Unique)
    assert out.normal_form == expected


def test_diamond_is_ambiguous():
    c, env = checked(declarations("diamond_bad.iml"))
    out = c.query(env, "Eq with type t = int list")
    assert isinstance(out, Ambiguous)
    assert [nf for nf, _ in out.solutions] == ["Eq_list(Ord_int)", "Ord_list(Ord_int)"]


def test_no_solution():
    c, env = checked(declarations("show_basics.iml"))
    out = c.query(env, "Show with type t = string")
    assert isinstance(out, NoSolution)
    assert out.explored > 0


def test_alias_paths_count_once():
    c, env, trace = session(declarations("diamond_alias.iml"))
    c.query(env, "Eq with type t = int list")
    found = [line for line in trace if line.startswith("SOLUTION")]
    assert len(found) > 1
    assert set(found) == {"SOLUTION Eq_list(Eq_int) FOR #1"}
    assert trace[-1] == "OUTCOME Unique Eq_list(Eq_int) FOR #1"


# ---------------------------------------------------------------- leaves


def test_leaf_instantiates_constraint_variables():
    c, env = checked(declarations("monad.iml"))
    ob = c.goal_obligation(env, "Monad with type 'a t = int list")
    out = c.resolver.resolve(ob, c.subst)
    assert out.normal_form == "Monad_list"
    ((arg,), ) = [k.args for k in ob.constraints]
    assert out.subst.zonk(arg) == INT


def test_leaf_mismatch_prunes():
    c, env, trace = session(SHOW_PRELUDE)
    c.query(env, "Show with type t = float")
    assert "PRUNE Show_int FOR #1: constraint t = float but found int" in trace


def test_enclosing_parameter_answers():
    c, env = checked(read("show_pair.iml"))
    assert "X" in [cand.text() for cand in c.resolutions.values()]


# ---------------------------------------------------------------- functors


def test_show_list_subgoal():
    c, env, trace = session(SHOW_PRELUDE)
    c.query(env, "Show with type t = int list")
    assert "SUBGOAL #1.1 : S : Show {t = int}" in trace


def test_widen_subgoal_has_both_members():
    c, env, trace = session(declarations("widen.iml"))
    out = c.query(env, "Widen with type slim = int option and type wide = float option")
    assert out.normal_form == "Widen_opt(Widen_int_float)"
    assert any(line.endswith(": A : Widen {slim = int, wide = float}") for line in trace)


def test_backtracking_keeps_the_applicable_functor():
    c, env, trace = session(declarations("backtracking.iml"))
    out = c.query(env, "Complex with type t = S.s * S.s")
    assert out.normal_form == "Complex_cartesian_floating(Floating_s)"
    # the integral branch was expanded and then found no argument
    assert any("N : Integral" in line for line in trace)


def test_backtracking_ambiguous_with_both_instances():
    c, env = checked(declarations("backtracking_ambiguous.iml"))
    out = c.query(env, "Complex with type t = S.s * S.s")
    assert [nf for nf, _ in out.solutions] == [
        "Complex_cartesian_floating(Floating_s)",
        "Complex_cartesian_integral(Integral_s)",
    ]


# ---------------------------------------------------------------- termination


def test_show_it_snapshots_are_equal():
    c, env = checked(declarations("show_it.iml"))
    out = c.query(env, "Show with type t = int list list")
    assert isinstance(out, TerminationFailure)
    assert out.functor == "Show_it"
    assert out.previous == out.incoming == {"t": "int list list"}
    assert not out.depth_cap


def test_show_it_diagnostic():
    d = error_of(read("show_it.iml"))
    assert d.code == "E-TERMINATION"
    assert d.payload["previous"] == d.payload["incoming"] == {"t": "int list list"}


def sizes(**members):
    return snapshot([Constraint((), k, (), v) for k, v in members.items()], Subst())


def test_decreases_pointwise():
    assert decreases(sizes(t=INT), sizes(t=list_of(INT)))
    assert not decreases(sizes(t=list_of(INT)), sizes(t=list_of(INT)))
    assert decreases(sizes(t=list_of(INT), u=INT), sizes(t=list_of(list_of(INT)), u=INT))
    # members only one side mentions are ignored
    assert decreases(sizes(t=INT, v=list_of(INT)), sizes(t=list_of(INT)))
    # one member grows while another shrinks: not point-wise smaller
    assert not decreases(sizes(t=INT, u=list_of(list_of(INT))), sizes(t=list_of(INT), u=list_of(INT)))


def test_interleaved_functors_compare_to_their_own_frames():
    c, env, trace = session(declarations("show_this_that.iml"))
    out = c.query(env, "Show_a with type t = int list list")
    assert out.normal_form == "Show_this(Show_that(Show_this(Show_int)))"
    # Show_this re-enters with t = int list right after Show_that did, so a
    # comparison against the latest frame of any functor would have stopped.
    assert "SUBGOAL #1.1.1 : S : Show_a {t = int list}" in trace
    assert not decreases(sizes(t=list_of(INT)), sizes(t=list_of(INT)))
    assert not any("termination" in line for line in trace)


def test_depth_cap():
    src = SHOW_PRELUDE + "let s = show [[[1]]]"
    c, env = checked(src, max_depth=3)
    assert error_of(src, max_depth=2).code == "E-DEPTH-CAP"
    assert error_of(read("deep_list.iml")).code == "E-DEPTH-CAP"


def test_termination_aborts_even_with_a_solution():
    # Show_int answers directly, but Show_it can be applied forever.
    src = read("show_it.iml").replace("show [[1; 2]; [3]]", "show 1")
    d = error_of(src)
    assert d.code == "E-TERMINATION"


# ---------------------------------------------------------------- normal forms


def test_normalize_expands_aliases():
    c, env = checked(declarations("diamond_alias.iml"))
    m = env.modules
    reg = c.registry
    assert path_str(reg.normalize(PApply(m["Eq_ord"], m["Ord_int"]))) == "Eq_int"
    eq_of_ord_list = PApply(m["Eq_ord"], PApply(m["Ord_list"], m["Ord_int"]))
    assert path_str(reg.normalize(eq_of_ord_list)) == "Eq_list(Eq_int)"
    assert path_str(reg.normalize(m["Ord_int"])) == "Ord_int"


def test_normalize_alias_functor():
    c, env = checked(declarations("show_alias.iml"))
    m = env.modules
    assert path_str(c.registry.normalize(PApply(m["Show_l"], m["Show_int"]))) == "Show_list(Show_int)"


def test_duplicate_instance_is_ambiguous():
    assert checked(SHOW_PRELUDE + "let s = show 1")[0].resolutions[1].text() == "Show_int"
    twin = SHOW_PRELUDE + """
implicit module Show_int_again = struct
  type t = int
  let show n = "#" ^ string_of_int n
end
let s = show 1"""
    d = error_of(twin)
    assert d.code == "E-AMBIGUOUS"
    assert [x["normal_form"] for x in d.payload["candidates"]] == ["Show_int", "Show_int_again"]


def test_alias_of_instance_is_not_ambiguous():
    src = SHOW_PRELUDE + "implicit module Show_i = Show_int\nlet s = show 1"
    c, _ = checked(src)
    assert c.resolutions[1].text() in ("Show_int", "Show_i")
