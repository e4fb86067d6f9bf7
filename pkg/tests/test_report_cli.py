import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from mivckit import models
from mivckit.cli import run
from mivckit.report import load_schema

ROOT = Path(__file__).resolve().parents[1]
FIXED = str(models.path("altitude3_fixed"))
ALTITUDE = str(models.path("altitude"))

TWO_PROPERTIES = """
node N(a: int) returns (b: int);
(*@contract
  assume "A: positive" a > 0;
  guarantee "P1: positive" b > 0;
  guarantee "P2: at least a" b >= a;
*)
let b = a; tel
"""


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def without_timings(doc):
    for p in doc["properties"]:
        p["timings"], p["stats"] = {}, {}
    return doc


def test_published_schema_matches_the_bundled_one():
    docs = json.loads((ROOT / "docs" / "report.schema.json").read_text())
    assert docs == load_schema()


@pytest.mark.parametrize(
    "argv",
    [["check"], ["ivc", "--all"], ["ivc", "--approximate", "--must"], ["mcs", "--max-cardinality", "1"], ["must"]],
)
def test_json_reports_validate(argv):
    code, out, _ = cli(*argv, FIXED, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema())
    assert doc["exit_code"] == 0 and doc["command"] == argv[0]


def test_json_is_deterministic_apart_from_timings():
    a = without_timings(json.loads(cli("mcs", "--all", FIXED, "--format", "json")[1]))
    b = without_timings(json.loads(cli("mcs", "--all", FIXED, "--format", "json")[1]))
    assert a == b
    sets = a["properties"][0]["mcs"]["sets"]
    assert sets == sorted(sets, key=lambda s: (len(s), s))


def test_text_report_groups_cut_sets_by_cardinality():
    code, out, _ = cli("mcs", FIXED)
    assert code == 0
    assert "MCSs (9, all, up to 14, complete):" in out
    assert "cardinality 1:" in out and "cardinality 2:" in out
    assert "{SystemModel.S1 (9:3-10:50), SystemModel.S2 (11:3-12:50)}" in out


def test_text_report_for_all_mivcs():
    code, out, _ = cli("ivc", "--all", ALTITUDE)
    assert code == 0
    assert "MIVCs (1, complete):" in out
    assert "MAY (0):" in out and "IRR (5):" in out


def test_unsafe_model_exits_10_with_a_counterexample(tmp_path):
    # without the controller guarantee nothing keeps the aircraft low
    src = models.source("altitude").replace("alt > LIMIT => pitch < 0.0", "true")
    path = tmp_path / "unsafe.lus"
    path.write_text(src)
    code, out, _ = cli("check", str(path))
    assert code == 10
    assert "unsafe" in out and "counterexample" in out


def test_timeouts_exit_20():
    code, out, _ = cli("ivc", "--all", FIXED, "--timeout", "1", "--format", "json")
    assert code == 20
    assert json.loads(out)["exit_code"] == 20


def test_usage_errors_exit_2():
    assert cli("explain", FIXED)[0] == 2
    assert cli("check", FIXED, "--elements", "everything")[0] == 2
    assert cli("mcs", "--all", "--smallest", FIXED)[0] == 2
    assert cli("--help")[0] == 0


def test_input_errors_exit_3(tmp_path):
    assert cli("check", str(tmp_path / "missing.lus"))[0] == 3
    bad = tmp_path / "bad.lus"
    bad.write_text("node N(a: int) returns (b: int);\nlet b = a + true; tel\n")
    code, _, err = cli("check", str(bad))
    assert code == 3
    assert f"{bad}:2:" in err


def test_solver_errors_exit_4():
    assert cli("check", FIXED, "--solver-cmd", "/nonexistent/solver")[0] == 4


def test_output_file_and_dump(tmp_path):
    target = tmp_path / "report.json"
    code, out, err = cli("check", FIXED, "--format", "json", "--output", str(target), "--dump-ts")
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["properties"][0]["verdict"] == "safe"
    assert "transition system SystemModel" in err


def test_parallel_properties_keep_source_order(tmp_path):
    path = tmp_path / "two.lus"
    path.write_text(TWO_PROPERTIES)
    code, out, _ = cli("ivc", str(path), "--jobs", "2", "--format", "json")
    assert code == 0
    props = json.loads(out)["properties"]
    assert [p["label"] for p in props] == ["N.P1", "N.P2"]
    assert props[0]["ivc"]["elements"] == ["N.A"]
    assert props[1]["ivc"]["elements"] == []


def test_module_and_console_script_entry_points():
    r = subprocess.run([sys.executable, "-m", "mivckit", "check", ALTITUDE], capture_output=True, text=True)
    assert r.returncode == 0 and "safe (k=1)" in r.stdout
    exe = shutil.which("mivc-kit")
    if exe is None:
        pytest.skip("package not installed with its console script")
    r = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "ivc" in r.stdout
