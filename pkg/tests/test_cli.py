import json
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from displaylab import cli
from displaylab import linalg as L
from displaylab.display import Display, enumerate_parabolics, twist_conjugate
from displaylab.rings import GF
from displaylab.wittring import WittVector

GOLDEN = Path(__file__).parent / "golden"
CASES = json.loads((GOLDEN / "cases.json").read_text())
K3 = GF(3)


def invoke(argv, **kw):
    args = [str(GOLDEN / a) if (GOLDEN / a).is_file() else a for a in argv]
    return CliRunner().invoke(cli.main, args, catch_exceptions=False, **kw)


@pytest.mark.parametrize("case", CASES, ids=[c["name"] for c in CASES])
def test_golden_reproduces(case):
    expected = (GOLDEN / case["output"]).read_text(encoding="utf-8")
    first, second = invoke(case["argv"]), invoke(case["argv"])
    assert first.exit_code == case["exit"]
    assert first.stdout == expected
    assert second.stdout == first.stdout


def test_console_entry_point_matches_golden():
    case = next(c for c in CASES if c["name"] == "newton")
    args = [str(GOLDEN / a) if (GOLDEN / a).is_file() else a for a in case["argv"]]
    out = subprocess.run([sys.executable, "-m", "displaylab.cli", *args], capture_output=True, check=True)
    assert out.stdout == (GOLDEN / case["output"]).read_bytes()


def test_every_output_carries_the_seed():
    for case in CASES:
        text = (GOLDEN / case["output"]).read_text()
        assert text.startswith("# seed=") or '"seed":' in text


# -- witt ------------------------------------------------------------------


def test_witt_results_in_order():
    res = json.loads(invoke(["witt", "witt_exprs.txt"]).stdout)["results"]
    assert WittVector.from_json(res[0]) == WittVector.from_int(K3, 3, 2)
    assert WittVector.from_json(res[1]) == WittVector(K3, (1, 0)) + WittVector(K3, (1, 0))
    assert res[3] == {"ghost": [2, 2**3 + 3]}


def test_witt_parse_error(tmp_path):
    res = invoke(["witt", "witt_bad.txt"])
    assert res.exit_code == 1
    assert "1:1: unclosed '('" in res.stderr
    bad = tmp_path / "op.txt"
    bad.write_text("\n  (frob 1)\n")
    res = invoke(["witt", str(bad)])
    assert res.exit_code == 1 and "2:4: unknown operator 'frob'" in res.stderr


def test_witt_length_mismatch_is_an_error(tmp_path):
    f = tmp_path / "e.txt"
    f.write_text("(add (V 1) 1)\n")
    assert invoke(["witt", str(f)]).exit_code == 1


# -- guards and counterexamples ----------------------------------------------


def test_newton_height_guard():
    assert invoke(["newton", "newton_guard.json"]).exit_code == 3


def test_mazur_level_guard():
    assert invoke(["mazur-scan", "--level", "9"]).exit_code == 3


def test_classify_guards():
    assert invoke(["classify", "classify_displays.json", "--limit", str(10**8)]).exit_code == 3
    assert invoke(["classify", "classify_displays.json", "--limit", "100"]).exit_code == 3


def test_counterexample_exit_code(tmp_path, monkeypatch):
    # force the dominance check to fail so the reporting path runs
    monkeypatch.setattr(cli, "dominates", lambda a, b: False)
    cx = tmp_path / "cx.json"
    res = invoke(["mazur-scan", "--limit", "3", "--level", "3", "--counterexample", str(cx)])
    assert res.exit_code == 2
    obj = json.loads(cx.read_text())
    assert Display.from_json(obj["display"]).level == 3
    assert res.stdout.splitlines()[-1].endswith(";false")


def test_seed_changes_samples():
    a = invoke(["mazur-scan", "--level", "5", "--limit", "15", "--seed", "1", "--format", "csv"]).stdout
    b = invoke(["mazur-scan", "--level", "5", "--limit", "15", "--seed", "2", "--format", "csv"]).stdout
    assert a.splitlines()[0] == "# seed=1" and b.splitlines()[0] == "# seed=2"


# -- classify --------------------------------------------------------------


def test_classify_orbits():
    report = json.loads(invoke(["classify", "classify_displays.json"]).stdout)
    members = sorted(o["members"] for o in report["orbits"])
    assert members == [[0, 2], [1]]


def test_classify_orbit_size_by_enumeration():
    report = json.loads(invoke(["classify", "classify_displays.json"]).stdout)
    Us = [Display.from_json(x) for x in json.loads((GOLDEN / "classify_displays.json").read_text())]
    for orbit in report["orbits"]:
        U = Us[orbit["members"][0]]
        ks = list(enumerate_parabolics(U.shape, K3, U.level))
        orbit_set = {twist_conjugate(U, k, validate=False) for k in ks}
        assert orbit["orbit_size"] == len(orbit_set)
        assert orbit["orbit_size"] * orbit["automorphisms"] == len(ks)


def test_classify_empty():
    assert json.loads(invoke(["classify", "classify_empty.json"]).stdout)["orbits"] == []


# -- flex ------------------------------------------------------------------


def test_flex_identity_roundtrip():
    out = json.loads(invoke(["flex", "flex_identity_display.json", "flex_identity_gauge.json"]).stdout)
    U = Display.from_json(json.loads((GOLDEN / "flex_identity_display.json").read_text()))
    assert Display.from_json(out["display"]) == U.truncate(U.level - out["width"])


def test_flex_jump_product():
    out = json.loads(invoke(["flex", "flex_jump_display.json", "flex_jump_gauge.json"]).stdout)
    U = Display.from_json(json.loads((GOLDEN / "flex_jump_display.json").read_text()))
    Ut = Display.from_json(out["display"])
    assert Ut.U[0] == L.truncate(L.mul(U.U[0], L.tau(U.U[1])), 2)
    assert Ut.U[1] == L.identity(K3, 2, 1)


def test_gauge_validate_tags():
    assert invoke(["gauge-validate", "gauge_valid.json"]).stdout == "# seed=0\n"
    lines = invoke(["gauge-validate", "gauge_broken.json"]).stdout.splitlines()[1:]
    assert lines and lines[0].startswith("unique-cut:")
    lines = invoke(["gauge-validate", "theta_broken.json"]).stdout.splitlines()[1:]
    assert {ln.split(":")[0] for ln in lines} == {"G1", "G2"}


# -- family scan -------------------------------------------------------------


def test_family_scan_golden_content():
    rows = [ln.split(";") for ln in (GOLDEN / "family_scan_f81.out").read_text().splitlines()[2:]]
    assert 0 < len(rows) < 81
    assert all(r[2] == "true" for r in rows)
    assert {r[1] for r in rows} == {"0/1,-1/1", "-1/2,-1/2"}
    special = [r for r in rows if r[1] == "-1/2,-1/2"]
    assert 0 < len(special) < len(rows) // 4
