import pytest

from implicitml.pipeline import check_core, compile_source, run_program, run_source
from implicitml.surface import syntax as S
from implicitml.surface.parser import parse
from implicitml.surface.pretty import pretty

from conftest import CORPUS, SHOW_PRELUDE, read, runnable_programs

RUNNABLE = runnable_programs()
ids = [p.name for p in RUNNABLE]


@pytest.fixture(scope="module")
def compiled():
    return {p.name: compile_source(p.read_text()) for p in RUNNABLE}


@pytest.mark.parametrize("name", ids)
def test_core_is_implicit_free(compiled, name):
    core = compiled[name].core
    assert S.implicit_constructs(core) == []
    # and so is its printed form once read back
    assert S.implicit_constructs(parse(pretty(core))) == []


@pytest.mark.parametrize("name", ids)
def test_core_checks_without_implicits(compiled, name):
    check_core(compiled[name].core)
    check_core(parse(compiled[name].core_text))


@pytest.mark.parametrize("name", ids)
def test_output_matches_explicit_variant(compiled, name):
    stem = name[:-len(".iml")]
    expected = (CORPUS / f"{stem}.out").read_text()
    assert run_program(compiled[name].core).stdout == expected
    explicit = (CORPUS / f"{stem}.explicit.iml").read_text()
    assert run_source(explicit).stdout == expected


@pytest.mark.parametrize("name", ids)
def test_explicit_variant_leaves_nothing_to_resolve(compiled, name):
    stem = name[:-len(".iml")]
    explicit = compile_source((CORPUS / f"{stem}.explicit.iml").read_text())
    assert explicit.checker.obligations == {}


def test_empty_program():
    c = compile_source("")
    assert c.core_text == ""
    assert run_program(c.core).stdout == ""


def test_capture():
    c = compile_source(read("capture.iml"))
    text = c.core_text
    assert "let module F_3 = (val show) in" in text
    assert "let module R_3 = F_3(Show_list(Show_int)) in" in text
    assert run_program(c.core).stdout == (CORPUS / "capture.out").read_text()


def test_constant_body():
    text = compile_source(SHOW_PRELUDE + "let zero {S : Show} = 0").core_text
    assert "let zero = (module functor (S : Show) -> struct\n    let value = 0\n  end)" in text


def test_show_definition():
    text = compile_source(SHOW_PRELUDE).core_text
    assert "let show = (module functor (S : Show) -> struct\n    let value = fun x -> S.show x\n  end)" in text


def test_application_unpacks_then_applies():
    text = compile_source(SHOW_PRELUDE + "let s = show {Show_int} 3").core_text
    assert "let s = (let module F_1 = (val show) in\n  let module R_1 = F_1(Show_int) in\n  R_1.value) 3" in text


def test_resolved_argument_is_written_in():
    text = compile_source(read("widen.iml")).core_text
    assert "F_1(Widen_opt(Widen_int_float))" in text


def test_nested_implicit_type():
    src = SHOW_PRELUDE + 'let show_three (sh : {S : Show} -> S.t -> string) = "x"'
    text = compile_source(src).core_text
    assert (
        "let show_three (sh : (module functor (S : Show) -> sig\n"
        "  val value : S.t -> string\n"
        "end)) = \"x\""
    ) in text


def test_implicit_module_becomes_plain_functor():
    text = compile_source(SHOW_PRELUDE).core_text
    assert "module Show_list (S : Show) = struct" in text
    assert "implicit" not in text


def test_open_implicit_is_removed():
    src = read("open_implicit.iml")
    assert "open implicit" in src
    text = compile_source(src).core_text
    assert "open" not in text
    assert "let quiet = (let module F_1 = (val show) in" in text


def test_local_implicit_module_becomes_local_module():
    src = SHOW_PRELUDE + """
let s =
  let implicit module Show_unit = struct type t = unit let show () = "()" end in
  show ()"""
    text = compile_source(src).core_text
    assert "let module Show_unit = struct" in text
    assert "F_1(Show_unit)" in text


def test_elaboration_is_deterministic():
    a = compile_source(read("structural.iml")).core_text
    b = compile_source(read("structural.iml")).core_text
    assert a == b
