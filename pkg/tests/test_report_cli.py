import csv
import json
import math
import os

import numpy as np
import pytest

from ricciforge import cli
from ricciforge.catalog import CATALOG, lookup, suggest
from ricciforge.errors import ScenarioError, UnknownIdentifierError, ExpressionError
from ricciforge.report import SuiteResult, ResidualReport, to_json, fmt_float
from ricciforge.scenario import parse_scenario

HERE = os.path.dirname(__file__)
SCEN = os.path.join(HERE, "..", "scenarios")


def _write(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def _vacuum(**kw):
    d = {"name": "vac", "builder": {"id": "gen.vacuum-soliton"}, "grid": {"n": 5}, "suites": ["reduced"]}
    d.update(kw)
    return d


# ---------------------------------------------------------------- serialization

def test_json_formatting():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(float("nan")) == "null" and fmt_float(math.inf) == "null"
    text = to_json({"a": [1, 2.5, np.float64(np.nan)], "b": {"c": True, "d": None}, "e": "x\"y"})
    assert json.loads(text) == {"a": [1, 2.5, None], "b": {"c": True, "d": None}, "e": "x\"y"}
    with pytest.raises(TypeError):
        to_json(object())


def test_suite_status_and_norms():
    s = SuiteResult("reduced", ["r_v", "r_h"], 1e-3, {"r_v": np.array([1e-4, -2e-4, np.nan]), "r_h": np.zeros(3)})
    n = s.norms()
    assert n["r_v"]["max"] == pytest.approx(2e-4) and n["r_v"]["rms"] == pytest.approx(math.sqrt(2.5e-8))
    assert s.status == "pass"
    assert SuiteResult("x", ["r_v"], 1e-5, s.values).status == "fail"
    assert SuiteResult("x", ["r_v"], None, s.values).status == "info"
    assert SuiteResult("x", ["r_v"], 1.0, error="boom").status == "error"
    np.testing.assert_array_equal(s.row_norm()[:2], [1e-4, 2e-4])


def test_report_exit_codes():
    ok = SuiteResult("a", ["r_v"], 1.0, {"r_v": np.zeros(2)})
    bad = SuiteResult("b", ["r_v"], 0.0, {"r_v": np.ones(2)})
    err = SuiteResult("c", ["r_v"], 1.0, error="x")
    mk = lambda *s, **kw: ResidualReport("r", {}, {}, suites=list(s), **kw)
    assert (mk(ok).exit_code, mk(ok, bad).exit_code, mk(ok, bad, err).exit_code) == (0, 1, 2)
    assert mk(ok, build_error="degenerate").exit_code == 2
    assert mk(ok, convergence={"status": "fail"}).exit_code == 1


# ---------------------------------------------------------------- CLI run

def test_run_writes_json_and_csv(tmp_path, capsys):
    path = _write(tmp_path, _vacuum(suites=["reduced", "anholonomy"]))
    assert cli.main(["run", path, "--out-dir", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "reduced" in out and "pass" in out
    rep = json.loads((tmp_path / "o" / "vac.json").read_text())
    assert rep["exit_code"] == 0 and rep["provenance"]["solution_status"] == "verified"
    assert len(rep["provenance"]["scenario_sha256"]) == 64
    rows = list(csv.reader(open(tmp_path / "o" / "vac.reduced.csv")))
    assert rows[0][:5] == ["point_index", "x2", "x3", "v", "chi"] and rows[0][-1] == "norm"
    assert len(rows) == 1 + 5 ** 3


def test_tolerance_override_fails_run(tmp_path):
    path = _write(tmp_path, _vacuum())
    assert cli.main(["run", path, "--out-dir", str(tmp_path), "--tol", "reduced=1e-30"]) == 1
    assert json.loads((tmp_path / "vac.json").read_text())["suites"][0]["tolerance"] == 1e-30


def test_grid_scale_and_fd_order_overrides(tmp_path):
    path = _write(tmp_path, _vacuum())
    assert cli.main(["run", path, "--out-dir", str(tmp_path / "a"), "--fd-order", "2", "--grid-scale", "2"]) == 0
    rep = json.loads((tmp_path / "a" / "vac.json").read_text())
    assert rep["grid"]["fd_order"] == 2
    assert all(h == pytest.approx(2e-3) for h in rep["grid"]["h"].values())
    with pytest.raises(SystemExit):
        cli.main(["run", path, "--fd-order", "3"])


def test_convergence_block(tmp_path):
    path = _write(tmp_path, _vacuum(convergence={"suite": "reduced", "h": [0.02, 0.01, 0.005],
                                                 "components": ["r_v"], "min_order": 3.5}))
    assert cli.main(["run", path, "--out-dir", str(tmp_path)]) == 0
    conv = json.loads((tmp_path / "vac.json").read_text())["convergence"]
    assert [r["h"] for r in conv["rows"]] == [0.02, 0.01, 0.005]
    assert conv["fitted_order"] == pytest.approx(4.0, abs=0.3)


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    path = os.path.join(SCEN, "flow.json")
    blobs = []
    for n in ("1", "3"):
        monkeypatch.setenv("FORGE_THREADS", n)
        assert cli.main(["run", path, "--out-dir", str(tmp_path / n)]) == 0
        blobs.append((tmp_path / n / "flow.json").read_bytes())
    assert blobs[0] == blobs[1]


@pytest.mark.parametrize("name", ["vacuum", "string", "stationary", "extradim", "timeaniso", "static", "pp"])
def test_sample_scenarios_pass(tmp_path, name):
    assert cli.main(["run", os.path.join(SCEN, name + ".json"), "--out-dir", str(tmp_path)]) == 0


# ---------------------------------------------------------------- scenario errors

@pytest.mark.parametrize("doc,needle", [
    ({"name": "x", "builder": {"id": "pp.plain"}}, "pp.plane"),
    ({"name": "x", "builder": {"id": "gen.vacuum-soliton", "params": {"hzero": 2}}}, "hzero"),
    ({"name": "x", "builder": {"id": "gen.vacuum-soliton"}, "suites": ["reducd"]}, "reducd"),
    ({"name": "x", "colour": 1}, "colour"),
])
def test_scenario_errors_exit_2(tmp_path, capsys, doc, needle):
    assert cli.main(["run", _write(tmp_path, doc), "--out-dir", str(tmp_path)]) == 2
    assert needle in capsys.readouterr().err


def test_bad_json_reports_position(tmp_path):
    with pytest.raises(ScenarioError) as ei:
        parse_scenario('{"name": "x",\n  "grid": }', "bad.json")
    assert "line 2" in str(ei.value)


def test_expression_error_keeps_column():
    doc = json.dumps({"name": "x", "builder": {"id": "gen.vacuum-soliton", "params": {"breve_b": "x2 + * x3"}}})
    with pytest.raises(ExpressionError) as ei:
        parse_scenario(doc, "e.json")
    assert ei.value.col == 6 and "breve_b" in str(ei.value)


def test_build_error_exits_2(tmp_path):
    doc = {"name": "deg", "builder": {"id": "schw.aux1"}, "grid": {"n": 5}, "suites": ["reduced"]}
    assert cli.main(["run", _write(tmp_path, doc), "--out-dir", str(tmp_path)]) == 2
    # h5 = varpi^2 has no v dependence: the reduced system is degenerate at every point
    suite = json.loads((tmp_path / "deg.json").read_text())["suites"][0]
    assert suite["status"] == "error" and "error_point" in suite


def test_empty_suite_list_passes(tmp_path):
    assert cli.main(["run", _write(tmp_path, _vacuum(suites=[])), "--out-dir", str(tmp_path)]) == 0


# ---------------------------------------------------------------- horizon and catalog

def test_horizon_outputs(tmp_path):
    assert cli.main(["horizon", "--mu", "1", "--eps", "0.001", "--n-phi", "8", "--out-dir", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "horizon.horizon.csv")))
    assert rows[0] == ["phi", "r_plus_rootfind", "r_plus_formula", "difference", "r_plus_first_order",
                       "difference_first_order"]
    assert len(rows) == 9 and float(rows[1][1]) == pytest.approx(2.0, abs=1e-12)
    summary = json.loads((tmp_path / "horizon.horizon.json").read_text())
    assert summary["gaps"] == [] and summary["max_abs_difference"] < 1e-12
    dat = (tmp_path / "horizon.horizon.plot.dat").read_text().splitlines()
    assert dat[0].startswith("#") and len(dat) == 9


def test_horizon_scenario(tmp_path):
    assert cli.main(["run", os.path.join(SCEN, "horizon.json"), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "rotoid.horizon.csv").exists()


def test_catalog_listing(capsys):
    assert cli.main(["catalog", "--json"]) == 0
    ids = {d["id"] for d in json.loads(capsys.readouterr().out)}
    assert ids == set(CATALOG)
    assert {"pp.plane", "gen.string-soliton", "flow.exponential"} <= ids
    assert "pp.plane" in suggest("pp.plain", CATALOG)
    with pytest.raises(UnknownIdentifierError) as ei:
        lookup("gen.vacum-soliton")
    assert "gen.vacuum-soliton" in str(ei.value)
