import pytest
from hypothesis import given, settings, strategies as st

from implicitml.diagnostics import CompileError
from implicitml.surface import syntax as S
from implicitml.surface.parser import parse, parse_modtype, parse_type
from implicitml.surface.pretty import pretty

from conftest import corpus_programs, output_of, read


def test_implicit_parameter_binding():
    prog = parse("let show {S : Show} x = S.show x")
    (d,) = prog.decls
    assert isinstance(d, S.DLet)
    b = d.binding
    assert b.pat.name == "show"
    assert [type(p).__name__ for p in b.params] == ["ImplicitParam", "PatParam"]
    assert b.params[0].name == "S"
    assert b.params[0].mtype == S.MTName("Show")


def test_empty_source():
    assert parse("").decls == ()
    assert parse("(* only a comment (* nested *) *)").decls == ()


def test_explicit_module_argument():
    (d,) = parse("show {Show_int} 3").decls
    app = d.expr
    assert isinstance(app, S.App)
    assert app.fn == S.Var((), "show")
    first, second = app.args
    assert isinstance(first, S.ModArg)
    assert first.mexpr == S.MPath(("Show_int",))
    assert second == S.Const("int", 3)


def test_pretty_empty_and_trivial():
    assert pretty(parse("")) == ""
    assert pretty(parse("let   x =\n 5")).strip() == "let x = 5"


@pytest.mark.parametrize("path", corpus_programs(), ids=lambda p: p.name)
def test_round_trip(path):
    prog = parse(path.read_text())
    assert parse(pretty(prog)) == prog


def test_round_trip_is_a_fixpoint():
    text = pretty(parse((corpus_programs()[0]).read_text()))
    assert pretty(parse(text)) == text


def test_implicit_functor_application_syntax():
    (d,) = parse("module M = Eq_list{O.Eq}").decls
    assert d.mexpr.implicit
    assert d.mexpr.arg == S.MPath(("O", "Eq"))
    braces = read("diamond_alias.iml").replace("Eq_list(O.Eq)", "Eq_list{O.Eq}")
    assert braces != read("diamond_alias.iml")
    assert output_of(braces) == output_of(read("diamond_alias.iml"))


def test_type_forms():
    t = parse_type("{M : Monad} -> 'a M.t -> ('a -> 'b) -> 'b M.t")
    assert isinstance(t, S.TyImplicit)
    string = S.TyCon(args=(), path=(), name="string")
    assert parse_type("int * string list") == S.TyTuple((
        S.TyCon(args=(), path=(), name="int"),
        S.TyCon(args=(string,), path=(), name="list"),
    ))


def test_parameterised_with_type():
    mt = parse_modtype("Monad with type 'a t = 'a list")
    assert isinstance(mt, S.MTWith)


def test_tuple_ending_in_if():
    (d,) = parse("let p b = (1, if b then 2 else 3)").decls
    assert isinstance(d.binding.expr, S.Tuple)
    assert isinstance(d.binding.expr.items[1], S.If)


def test_tuple_pattern_binding_round_trips():
    prog = parse("let f () = let (a, b) = (1, 2) in a + b")
    assert parse(pretty(prog)) == prog


def test_syntax_error_position_and_expected():
    with pytest.raises(CompileError) as info:
        parse("let x = \n  (1 + ")
    d = info.value.diagnostic
    assert d.code == "E-SYNTAX"
    assert (d.span.line, d.span.col) == (2, 8)
    assert d.payload["expected"]


def _spans_nest(node):
    for child in S.children(node):
        if child.span is not None and node.span is not None:
            assert node.span.contains(child.span), (type(node).__name__, type(child).__name__)
        _spans_nest(child)


@pytest.mark.parametrize("path", corpus_programs(), ids=lambda p: p.name)
def test_every_node_has_a_nested_span(path):
    prog = parse(path.read_text())
    for n in S.walk(prog):
        assert n.span is not None, type(n).__name__
    _spans_nest(prog)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=60))
def test_arbitrary_bytes_never_crash(data):
    text = data.decode("utf-8", errors="replace")
    try:
        parse(text)
    except CompileError as e:
        assert e.diagnostic.code == "E-SYNTAX"


TOKENS = ["let", "x", "=", "(", ")", "{", "}", "S", ":", "Show", "->", "1", "in",
          "module", "struct", "end", "sig", "type", "t", "implicit", ";", ",", "fun",
          "[", "]", "match", "with", "|", "'a", "\"s\"", "+", "*", "."]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(TOKENS), max_size=14))
def test_token_soup_parses_or_reports(tokens):
    try:
        prog = parse(" ".join(tokens))
    except CompileError as e:
        assert e.diagnostic.code == "E-SYNTAX"
        return
    assert parse(pretty(prog)) == prog
