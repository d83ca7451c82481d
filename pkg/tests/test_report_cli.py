import io
import json
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

from otcheck.causality import StampedOp
from otcheck.cli import main
from otcheck.doc_state import OpKind, OpSignature, make_window
from otcheck.explorer import Counterexample, ExplorerConfig, Model, TraceStep, explore
from otcheck.report import (
    SchemaError,
    load_scenario,
    render_trace_table,
    render_window,
    save_counterexample,
)
from otcheck.transform import AlgorithmId

I, D, N = OpKind.INS, OpKind.DEL, OpKind.NOP

FIXTURE = Path(__file__).parent.parent / "src" / "otcheck" / "fixtures" / "suleiman_four_op_divergence.json"


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def table3_counterexample():
    cfg = ExplorerConfig(nb_sites=3, iters=(1, 1, 1), alg=AlgorithmId.ELLIS, model=Model.SYMBOLIC)
    zeros = (0, 0, 0)
    sigs = (
        StampedOp(0, 0, zeros, OpSignature(D, 0)),
        StampedOp(1, 1, zeros, OpSignature(I, 0, 0)),
        StampedOp(2, 2, zeros, OpSignature(I, 1, 0)),
    )
    return Counterexample(
        config=cfg,
        signatures=sigs,
        site_a=0,
        site_b=1,
        trace_a=(TraceStep(0, D, 0, 0), TraceStep(1, I, 0, 0), TraceStep(2, N, 1, 0)),
        trace_b=(TraceStep(1, I, 0, 0), TraceStep(0, D, 1, 0), TraceStep(2, I, 1, 0)),
        text_a=make_window([0], 6),
        text_b=make_window([0, 0], 6),
        divergent_cells=(1,),
    )


# -- rendering ------------------------------------------------------------------


def test_render_window_elides_trailing_empties():
    assert render_window(make_window([0], 6)) == "0 -1 ..."
    assert render_window(make_window([0, 0], 6)) == "0 0 -1 ..."
    assert render_window(make_window([0, 0], 3)) == "0 0 -1"
    assert render_window(make_window((), 3)) == "-1 ..."


def test_trace_table_shape():
    table = render_trace_table(table3_counterexample())
    lines = table.splitlines()
    assert lines[0].startswith("variables")
    assert "site 0" in lines[0] and "site 1" in lines[0]
    assert any(line.startswith("operations") for line in lines)
    assert any(line.startswith("list") for line in lines)
    text_row = next(line for line in lines if line.startswith("text"))
    assert "0 -1 ..." in text_row and "0 0 -1 ..." in text_row
    assert any("Nop" in line for line in lines)
    assert any("0  Del 1" in line for line in lines)


# -- serialization round trips -----------------------------------------------------


def test_save_load_round_trip(tmp_path):
    ce = table3_counterexample()
    path = tmp_path / "scenario.json"
    save_counterexample(ce, path)
    assert load_scenario(path) == ce


def test_explorer_output_round_trips(tmp_path):
    result = explore(
        ExplorerConfig(nb_sites=3, iters=(1, 1, 1), alg=AlgorithmId.ELLIS, model=Model.SYMBOLIC)
    )
    path = tmp_path / "found.json"
    save_counterexample(result.counterexample, path)
    assert load_scenario(path) == result.counterexample


def test_fixture_round_trips(tmp_path):
    ce = load_scenario(FIXTURE)
    path = tmp_path / "copy.json"
    save_counterexample(ce, path)
    assert load_scenario(path) == ce


def test_schema_error_names_the_field(tmp_path):
    doc = json.loads(FIXTURE.read_text())
    del doc["signatures"][1]["pos"]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match=r"signatures\[1\]\.pos"):
        load_scenario(path)


def test_schema_error_on_unknown_algorithm(tmp_path):
    doc = json.loads(FIXTURE.read_text())
    doc["config"]["alg"] = "nonsense"
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="config.alg"):
        load_scenario(path)


# -- CLI ----------------------------------------------------------------------------


def test_cli_divergence_exit_code_and_report():
    code, out, err = run_cli("--alg", "ellis", "--sites", "3", "--iters", "1,1,1", "--model", "symbolic")
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"] == "Diverged"
    assert doc["signatures"] and doc["sites"] and doc["divergentCells"]
    assert "Diverged" in err and "variables" in err


def test_cli_convergence_exit_code():
    code, out, _ = run_cli("--alg", "suleiman", "--sites", "2", "--iters", "1,1", "--model", "symbolic")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "Converged"
    assert doc["counterexample"] is None if "counterexample" in doc else True
    assert doc["signatures"] is None


def test_cli_aborted_exit_code():
    code, out, _ = run_cli(
        "--alg", "suleiman", "--sites", "3", "--iters", "1,1,1",
        "--model", "symbolic", "--budget-states", "40",
    )
    assert code == 3
    assert json.loads(out)["verdict"] == "Aborted"


def test_cli_property_checks():
    assert run_cli("--check", "tp1", "--alg", "suleiman", "--pmax", "4")[0] == 0
    assert run_cli("--check", "tp1", "--alg", "ellis", "--pmax", "4")[0] == 1
    code, out, _ = run_cli("--check", "tp2", "--alg", "suleiman", "--pmax", "2")
    assert code == 1
    assert json.loads(out)["violation"]["property"] == "TP2"


def test_cli_flag_validation():
    # deps with a non-fixed-deps model is a usage error
    code, _, err = run_cli("--alg", "ellis", "--sites", "3", "--iters", "1,1,1", "--deps", "0>1")
    assert code == 2
    assert "error:" in err and err.count("\n") == 1


def test_cli_missing_flags():
    code, _, err = run_cli("--sites", "3", "--iters", "1,1,1")
    assert code == 2
    assert "--alg" in err


def test_cli_replay_fixture():
    code, out, err = run_cli("--replay", str(FIXTURE))
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"] == "Diverged"
    texts = {site["id"]: site["finalText"] for site in doc["sites"]}
    assert texts[1] == [0, 0, 0, 0, 1, -1, -1, -1]
    assert texts[2] == [0, 0, 0, 0, 1, 0, -1, -1]
    assert doc["divergentCells"] == [5]


def test_cli_replay_detects_tampered_windows(tmp_path):
    doc = json.loads(FIXTURE.read_text())
    doc["sites"][0]["finalText"][0] = 1
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli("--replay", str(path))
    assert code == 2
    assert "replays to" in err


def test_cli_replay_rejects_dependency_violation(tmp_path):
    doc = json.loads(FIXTURE.read_text())
    site = doc["sites"][0]
    order = [st["opId"] for st in site["trace"]]
    a, b = order.index(0), order.index(1)
    site["trace"][a], site["trace"][b] = site["trace"][b], site["trace"][a]
    path = tmp_path / "invalid.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli("--replay", str(path))
    assert code == 2
    assert "0->1" in err


def test_cli_out_file_carries_the_json(tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(
        "--alg", "ellis", "--sites", "2", "--iters", "1,1",
        "--model", "symbolic", "--out", str(target),
    )
    assert code == 1
    assert json.loads(target.read_text())["verdict"] == "Diverged"
    assert "variables" in out  # human table on stdout when --out is given


def test_cli_byte_determinism():
    args = ("--alg", "ressel", "--sites", "3", "--iters", "1,1,1", "--model", "symbolic")
    first = run_cli(*args)
    second = run_cli(*args)
    assert first[0] == second[0] == 1
    assert first[1] == second[1]


def test_module_entry_point_exit_codes():
    proc = subprocess.run(
        [sys.executable, "-m", "otcheck", "--alg", "sun", "--sites", "3",
         "--iters", "1,1,1", "--model", "symbolic"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    usage = subprocess.run(
        [sys.executable, "-m", "otcheck", "--alg", "sun", "--sites", "3", "--iters", "1,1"],
        capture_output=True,
        text=True,
    )
    assert usage.returncode == 2
