"""Command line behaviour, driven in-process through main()."""

import io
import json
import subprocess
import sys

import pytest

from surgecheck import cli
from surgecheck.lts import import_lts

from conftest import FIXTURES

TRAFFIC = str(FIXTURES / "traffic_light.sbm")
MUTANT = str(FIXTURES / "traffic_light_mutant.sbm")
SAFETY = str(FIXTURES / "safety.mcf")
LIVENESS = str(FIXTURES / "liveness.mcf")
DEFAULT_SCN = str(FIXTURES / "default.scn")


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def test_parse_summary():
    code, text = run("parse", TRAFFIC)
    assert code == cli.OK
    assert "ok" in text and "proc P/1" in text


def test_explore_counts(tmp_path):
    target = tmp_path / "t.ltx"
    code, text = run("explore", TRAFFIC, "--workers", "1", "-o", str(target), "--stats")
    assert code == cli.OK
    assert "states: 4" in text and "transitions: 6" in text
    assert "seconds:" in text
    lts = import_lts(target.read_text())
    assert (lts.num_states, lts.num_transitions) == (4, 6)


def test_check_holds():
    code, text = run("check", TRAFFIC, "-f", SAFETY)
    assert code == cli.OK
    assert text.strip() == "holds: true"
    assert run("check", TRAFFIC, "-f", LIVENESS)[0] == cli.OK


def test_check_violation_with_trace():
    code, text = run("check", MUTANT, "-f", SAFETY, "--trace")
    assert code == cli.FAIL
    lines = text.splitlines()
    assert lines[0] == "holds: false"
    assert lines[1] == "trace:"
    steps = [l.strip() for l in lines[2:]]
    assert steps == ["red_button", "set_red", "red_button", "set_red"]


def test_check_inline_formula_and_stats():
    code, text = run("check", TRAFFIC, "-f", "<true*.set_green>true", "--stats")
    assert code == cli.OK
    assert "equations:" in text and "check seconds:" in text


def test_check_on_ltx(tmp_path):
    target = tmp_path / "m.ltx"
    assert run("export", MUTANT, "-o", str(target))[0] == cli.OK
    code, text = run("check", str(target), "-f", SAFETY, "--trace")
    assert code == cli.FAIL
    assert "set_red" in text


def test_export_to_stdout():
    code, text = run("export", TRAFFIC)
    assert code == cli.OK
    assert text.startswith("lts 0 6 4")


def test_missing_file_is_usage_error():
    assert run("parse", "/nonexistent/model.sbm")[0] == cli.USAGE


def test_bad_model_is_usage_error(tmp_path):
    bad = tmp_path / "bad.sbm"
    bad.write_text("act a;\ninit a . ;\n")
    assert run("parse", str(bad))[0] == cli.USAGE


def test_bad_formula_is_usage_error():
    assert run("check", TRAFFIC, "-f", "[true*.nosuchaction]false")[0] == cli.USAGE


def test_state_limit():
    assert run("explore", TRAFFIC, "--max-states", "2")[0] == cli.LIMIT


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["explore"], ["explore", TRAFFIC, "--max-states", "0"],
    ["check", TRAFFIC],
])
def test_argument_errors(argv):
    assert run(*argv)[0] == cli.USAGE


def test_workers_env(monkeypatch):
    monkeypatch.setenv("SURGECHECK_WORKERS", "3")
    assert cli.default_workers() == 3
    monkeypatch.setenv("SURGECHECK_WORKERS", "zero")
    assert run("explore", TRAFFIC)[0] == cli.USAGE
    monkeypatch.delenv("SURGECHECK_WORKERS")
    assert cli.default_workers() >= 1


def test_gen_writes_model(tmp_path):
    target = tmp_path / "besw.sbm"
    assert run("gen", DEFAULT_SCN, "-o", str(target))[0] == cli.OK
    code, text = run("parse", str(target))
    assert code == cli.OK and "proc Dock/2" in text


def test_gen_bad_scenario(tmp_path):
    scn = tmp_path / "x.scn"
    scn.write_text("failedPumps = dock0, dock1\n")
    assert run("gen", str(scn))[0] == cli.USAGE


def test_suite_json_records():
    code, text = run("suite", DEFAULT_SCN, "--json", "--only", "P10", "--only", "P6-naive",
                     "--workers", "2")
    assert code == cli.OK
    recs = [json.loads(l) for l in text.splitlines()]
    assert [r["id"] for r in recs] == ["P6-naive", "P10"]
    naive = recs[0]
    assert naive["expected"] is False and naive["verdict"] is False


def test_suite_table():
    code, text = run("suite", DEFAULT_SCN, "--only", "P1")
    assert code == cli.OK
    assert "all expectations met" in text


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "surgecheck", "check", MUTANT, "-f", SAFETY],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout.strip() == "holds: false"
