import json
import subprocess
import sys

import pytest

from conftest import CORPUS, ROOT
from modat.cli import main
from modat.parser import parse_model

STAMP = str(CORPUS / "stamp" / "stamp.modat")
FAMILY = str(CORPUS / "family" / "family.modat")


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_clean(capsys):
    assert cli(capsys, "check", STAMP) == (0, "", "")


def test_check_depth_two(capsys):
    code, out, err = cli(capsys, "check", CORPUS / "bad_depth.modat")
    lines = err.strip().splitlines()
    assert code == 1 and out == ""
    assert len(lines) == 1 and "E001" in lines[0] and lines[0].startswith(str(CORPUS / "bad_depth.modat") + ":")


def test_check_json(capsys):
    code, _, err = cli(capsys, "--json", "check", CORPUS / "mutants" / "outside_write.modat")
    recs = [json.loads(x) for x in err.strip().splitlines()]
    assert code == 1 and [r["code"] for r in recs if r["severity"] == "error"] == ["E004"]


def test_check_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.modat"
    bad.write_text("block {")
    code, _, err = cli(capsys, "check", bad)
    assert code == 2 and "E1" in err


def test_missing_file_and_usage(capsys):
    assert cli(capsys, "check", "/nonexistent.modat")[0] == 4
    assert cli(capsys, "frobnicate")[0] == 4
    assert cli(capsys)[0] == 4
    assert cli(capsys, "sim", STAMP)[0] == 4


def test_version(capsys):
    code, out, _ = cli(capsys, "--version")
    assert code == 0 and out.startswith("modat-lc 0.1.0") and "modat v1" in out


def test_sim_pass(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = cli(capsys, "sim", STAMP, CORPUS / "stamp" / "extend40.scn", "--trace", trace)
    assert code == 0 and out.strip().splitlines()[-1] == "PASS 3/3 assertions"
    recs = [json.loads(x) for x in trace.read_text().splitlines()]
    assert [r["cycle"] for r in recs] == [0, 1, 2, 3, 4]


def test_sim_fail_and_divergence(capsys, tmp_path):
    scn = tmp_path / "x.scn"
    scn.write_text("invoke stamp.run()\nmaxcycles 3\nat 1 expect stamp.cycles == 1\n")
    code, out, _ = cli(capsys, "sim", STAMP, scn)
    assert code == 3 and "FAIL cycle 1" in out and "diverged" in out and out.endswith("FAIL 0/1 assertions\n")


@pytest.mark.parametrize("text, code", [("invoke (", 2), ("invoke stamp.fly()", 1)])
def test_sim_bad_scenario(capsys, tmp_path, text, code):
    scn = tmp_path / "x.scn"
    scn.write_text(text)
    assert cli(capsys, "sim", STAMP, scn)[0] == code


def test_gen_matches_golden(capsys, tmp_path):
    out_file, sym = tmp_path / "o.st", tmp_path / "s.json"
    assert cli(capsys, "gen", STAMP, "--oop", "-o", out_file, "--symbols", sym)[0] == 0
    assert out_file.read_text() == (CORPUS / "stamp" / "golden" / "stamp.oop.st").read_text()
    assert "stamp.stampCylinder:extend" in json.loads(sym.read_text())["entries"]
    code, out, _ = cli(capsys, "gen", STAMP)
    assert code == 0 and out == (CORPUS / "stamp" / "golden" / "stamp.flat.st").read_text()


def test_gen_refuses_invalid(capsys):
    code, out, err = cli(capsys, "gen", CORPUS / "bad_depth.modat")
    assert code == 1 and out == "" and "E001" in err


def test_rebase_family(capsys, tmp_path):
    dst = tmp_path / "r.modat"
    code, out, _ = cli(capsys, "rebase", FAMILY, "Block_X", "Block_X_Variant3", "-o", dst)
    assert code == 0
    assert out.startswith("// renamed Block_X -> Block_X_Classic\n// renamed Block_X_Variant3 -> Block_X\n")
    assert "+variant Block_X_Classic of Block_X {" in out
    assert cli(capsys, "check", dst) == (0, "", "")


def test_rebase_refused(capsys):
    code, out, err = cli(capsys, "rebase", STAMP, "Cylinder", "StampCylinder")
    assert code == 1 and out == "" and "rebase refused" in err


def test_fmt_round_trip(capsys):
    code, out, _ = cli(capsys, "fmt", CORPUS / "bad_depth.modat")
    assert code == 0
    assert parse_model(out) == parse_model((CORPUS / "bad_depth.modat").read_text())


def test_stats(capsys):
    code, out, _ = cli(capsys, "--json", "stats", STAMP)
    st = json.loads(out)
    assert code == 0 and st["instances"] == 13 and st["io"] == {"input": 5, "output": 5, "total": 10}
    assert st["variants"] == 2 and st["variants_per_base"]["2"] == 1
    code, out, _ = cli(capsys, "stats", STAMP)
    assert "instances   13" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modat.cli", "check", STAMP], capture_output=True,
                          text=True, cwd=ROOT)
    assert proc.returncode == 0 and proc.stdout == ""
