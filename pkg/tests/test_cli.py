import io
import json
import shutil
import subprocess
import sys

import pytest

from implicitml.cli import main

from conftest import CORPUS, read


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_show_basics(capsys):
    code, out, err = run(capsys, "run", str(CORPUS / "show_basics.iml"))
    assert code == 0
    assert out == (CORPUS / "show_basics.out").read_text()
    assert err == ""


def test_trace_resolution_shows_choices(capsys):
    code, out, err = run(capsys, "run", "--trace-resolution", str(CORPUS / "show_basics.iml"))
    assert code == 0
    outcomes = [line for line in err.splitlines() if line.startswith("OUTCOME")]
    assert [line.split(" FOR ")[0] for line in outcomes] == [
        "OUTCOME Unique Show_int",
        "OUTCOME Unique Show_float",
        "OUTCOME Unique Show_list(Show_int)",
    ]
    assert "OUTCOME" not in out


def test_check_prints_signatures(capsys):
    code, out, _ = run(capsys, "check", str(CORPUS / "monad.iml"))
    assert code == 0
    assert "val map : {M : Monad} -> 'a M.t -> ('a -> 'b) -> 'b M.t" in out.splitlines()


def test_check_rejects_with_one(capsys):
    code, out, err = run(capsys, "check", str(CORPUS / "diamond_bad.iml"))
    assert code == 1
    assert out == ""
    assert "error[E-AMBIGUOUS]" in err


def test_run_never_executes_a_rejected_program(capsys):
    code, out, _ = run(capsys, "run", str(CORPUS / "diamond_bad.iml"))
    assert code == 1 and out == ""


def test_elaborate_shows_functor(capsys):
    code, out, _ = run(capsys, "elaborate", str(CORPUS / "show_basics.iml"))
    assert code == 0
    assert "functor (S : Show)" in out
    assert "implicit" not in out


def test_trace_command(capsys):
    code, out, err = run(capsys, "trace", str(CORPUS / "widen.iml"))
    assert code == 0
    assert "SUBGOAL" in err
    assert out.startswith("val ")


@pytest.mark.parametrize("argv", [
    ["frobnicate", "x.iml"],
    ["run"],
    ["run", "x.iml", "--max-depth", "0"],
    ["run", "x.iml", "--max-depth", "deep"],
    ["run", "x.iml", "--colour"],
    ["run", "/nonexistent/x.iml"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("implicitml: usage error:")


def test_usage_error_names_the_flag(capsys):
    _, _, err = run(capsys, "run", "x.iml", "--max-depth", "0")
    assert "--max-depth" in err


def test_max_depth_flag_and_environment(capsys, monkeypatch):
    path = str(CORPUS / "show_nested.iml")
    assert run(capsys, "check", path)[0] == 0
    code, _, err = run(capsys, "check", "--max-depth", "1", path)
    assert code == 1 and "E-DEPTH-CAP" in err
    monkeypatch.setenv("IMPLICITML_MAX_DEPTH", "1")
    code, _, err = run(capsys, "check", path)
    assert code == 1 and "E-DEPTH-CAP" in err
    # the flag wins over the environment
    assert run(capsys, "check", "--max-depth", "64", path)[0] == 0
    monkeypatch.setenv("IMPLICITML_MAX_DEPTH", "0")
    assert run(capsys, "check", path)[0] == 2


def test_json_diagnostic(capsys):
    code, _, err = run(capsys, "check", "--json", str(CORPUS / "diamond_bad.iml"))
    assert code == 1
    d = json.loads(err)
    assert d["code"] == "E-AMBIGUOUS"
    assert [c["normal_form"] for c in d["payload"]["candidates"]] == [
        "Eq_list(Ord_int)", "Ord_list(Ord_int)",
    ]


def test_standard_input(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(read("show_basics.iml")))
    code, out, _ = run(capsys, "run", "-")
    assert code == 0
    assert out.startswith("Show an int: 5\n")


def test_stdin_diagnostic_names_stdin(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("let x = y"))
    code, _, err = run(capsys, "check", "-")
    assert code == 1
    assert err.startswith("<stdin>:1:9: error[E-UNBOUND]")


def test_runtime_error(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO('let () = print_string "a"\nlet x = 1 / 0'))
    code, out, err = run(capsys, "run", "-")
    assert code == 1
    assert out == "a"
    assert "runtime error" in err


def test_no_color_never_escapes(capsys):
    _, _, err = run(capsys, "check", "--no-color", str(CORPUS / "diamond_bad.iml"))
    assert "\x1b[" not in err


@pytest.mark.skipif(shutil.which("implicitml") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["implicitml", "run", str(CORPUS / "widen.iml")],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert p.stdout == (CORPUS / "widen.out").read_text()
