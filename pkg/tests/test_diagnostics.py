import json

import pytest

from implicitml.diagnostics import CODES, Diagnostic, render, render_human
from implicitml.surface.syntax import Span

from conftest import error_of, failing_programs, read


def human(name):
    return render(error_of(read(name)), "human", f"corpus/{name}")


def test_diamond_render():
    assert human("diamond_bad.iml") == (
        "corpus/diamond_bad.iml:36:41: error[E-AMBIGUOUS]: ambiguous implicit argument "
        "for E : Eq with {t = int list}\n"
        "  candidates:\n"
        "    Eq_list(Ord_int)\n"
        "    Ord_list(Ord_int)\n"
        "  constraints: t = int list"
    )


def test_show_it_render():
    text = human("show_it.iml")
    assert text.splitlines()[0].startswith("corpus/show_it.iml:25:25: error[E-TERMINATION]: ")
    assert text.splitlines()[1:] == [
        "  functor: Show_it",
        "  previous: {t = int list list}",
        "  incoming: {t = int list list}",
        "  constraints: t = int list list",
    ]


def test_show_three_render():
    assert human("show_three_missing.iml").splitlines()[0] == (
        "corpus/show_three_missing.iml:21:16: error[E-MISSING-ANNOT]: sh is given an "
        "explicit module argument, so its type must be annotated with an implicit arrow"
    )


def test_variables_are_renumbered():
    d = error_of(read("double_sqrt.iml"))
    assert d.payload["constraints"] == ["t = 'a"]


def test_candidates_are_sorted_and_show_their_source():
    d = Diagnostic("E-AMBIGUOUS", Span(1, 1, 1, 5), "ambiguous", {"candidates": [
        {"normal_form": "Show_list(Show_int)", "expr": "Show_l(Show_int)"},
        {"normal_form": "Show_int", "expr": "Show_int"},
    ]})
    assert render_human(d).splitlines()[1:] == [
        "  candidates:",
        "    Show_int",
        "    Show_list(Show_int)  (from Show_l(Show_int))",
    ]


def test_color_only_on_request():
    d = Diagnostic("E-TYPE", Span(2, 3, 2, 4), "bad")
    assert render_human(d, "f.iml") == "f.iml:2:3: error[E-TYPE]: bad"
    assert "\x1b[1;31m" in render_human(d, "f.iml", color=True)


def test_unknown_code_is_refused():
    with pytest.raises(ValueError):
        Diagnostic("E-NOPE", None, "x")


@pytest.mark.parametrize("path", failing_programs(), ids=lambda p: p.name)
def test_json_schema(path):
    d = error_of(path.read_text())
    doc = json.loads(render(d, "json"))
    assert set(doc) == {"code", "span", "message", "payload"}
    assert doc["code"] in CODES
    assert set(doc["span"]) == {"line", "col", "end_line", "end_col"}
    assert isinstance(doc["message"], str) and isinstance(doc["payload"], dict)


@pytest.mark.parametrize("path", failing_programs(), ids=lambda p: p.name)
def test_rendering_is_byte_stable(path):
    src = path.read_text()
    a, b = error_of(src), error_of(src)
    assert render(a, "json") == render(b, "json")
    assert render(a) == render(b)


def test_termination_payload():
    p = error_of(read("show_it.iml")).payload
    assert p["functor"] == "Show_it"
    assert p["partial_solutions"] == []


def test_depth_cap_payload():
    p = error_of(read("deep_list.iml")).payload
    assert p["max_depth"] == 64
    assert p["functor"] == "Show_list"


def test_syntax_payload():
    d = error_of("let = 3")
    assert d.code == "E-SYNTAX"
    assert d.payload["expected"]
    assert "expected: " in render(d)
