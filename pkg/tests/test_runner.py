import csv
import json

import jsonschema
import numpy as np
import pytest
from numpy.testing import assert_allclose

from octoverify import runner
from octoverify.runner import CHECKS, RunConfig, dumps, run, run_suite, strip_timings, validate_report


def _verdicts(report):
    return {c["name"]: c for c in report["checks"]}


def test_config_validation():
    with pytest.raises(ValueError, match="unknown check"):
        RunConfig("great:2", checks=("algebra", "theorem4"))
    with pytest.raises(ValueError, match=">= 8"):
        RunConfig("great:2", grid=6)
    with pytest.raises(ValueError, match=">= 8"):
        RunConfig("great:2", grid=(16, 4))
    for h in (1e-7, 0.2):
        with pytest.raises(ValueError, match="fd_step"):
            RunConfig("great:2", fd_step=h)
    with pytest.raises(KeyError):
        RunConfig("great:2", tolerances={"eigenmapp": 1e-3})
    with pytest.raises(ValueError):
        RunConfig("great:2", tolerances={"eigenmap": -1.0})
    cfg = RunConfig("great:2", checks=("hemisphere", "algebra", "algebra"))
    assert cfg.checks == ("algebra", "hemisphere")
    assert "workers" not in cfg.to_json()


def test_great_six_all_checks_pass():
    rep = run(RunConfig("great:6", checks=("minimality", "parallelism", "isoparametric", "theorem2", "corollary")))
    v = _verdicts(rep)
    assert all(c["verdict"] == "pass" for c in rep["checks"]), rep["checks"]
    table = rep["lambda_table"]
    assert len(table) == 1
    assert table[0]["sigma"] == pytest.approx(0.0, abs=1e-12)
    assert table[0]["lambda"] == pytest.approx(6.0)
    assert v["corollary"]["stats"]["normal"] == "e7"


def test_compose_entry_full_pipeline():
    rep = run(RunConfig("compose:great:3/product:1,1", seed=5))
    v = _verdicts(rep)
    assert [c["name"] for c in rep["checks"]] == list(CHECKS)
    assert all(c["verdict"] == "pass" for c in rep["checks"]), rep["checks"]
    assert_allclose([r["lambda"] for r in rep["lambda_table"]], [2, 2, 2, 2, 4], atol=1e-8)
    assert rep["spectrum"]["multiplicities"] == [4, 1]
    control = v["theorem1"]["stats"]["negative_control"]
    assert not control["eigencheck"] and not control["eigenmap"] and not control["harmonic"]
    assert control["eigencheck_residual"] == pytest.approx(1.0, abs=1e-8)
    assert control["harmonicity_defect_max"] > 0.1
    assert len(rep["hemisphere"]) == 5
    validate_report(rep)


def test_codimension_two_degenerate_spectrum():
    rep = run(RunConfig("product:1,1,3", checks=("isoparametric", "theorem2"), grid=8))
    assert all(c["verdict"] == "pass" for c in rep["checks"]), rep["checks"]
    assert_allclose(rep["spectrum"]["sigma"], [5, 5], atol=1e-8)
    assert rep["spectrum"]["multiplicities"] == [2]
    assert_allclose([r["lambda"] for r in rep["lambda_table"]], [10, 10], atol=1e-8)


def test_nonminimal_radii_skip_downstream():
    rep = run(RunConfig("product:2,4@0.6,0.8", checks=("minimality", "isoparametric", "theorem1", "corollary"), grid=8))
    v = _verdicts(rep)
    assert v["minimality"]["verdict"] == "fail"
    assert v["isoparametric"]["verdict"] == "pass"
    assert v["theorem1"]["verdict"] == "skipped"
    assert v["theorem1"]["reason"] == "minimality precondition failed"
    assert v["corollary"]["reason"] == "minimality precondition failed"


def test_refused_checks():
    rep = run(RunConfig("product:1,1,3", checks=("corollary",), grid=8))
    assert rep["checks"][0]["verdict"] == "refused"
    assert rep["checks"][0]["reason"]


def test_every_requested_check_once():
    rep = run(RunConfig("great:2", checks=("hemisphere", "lemma")))
    names = [c["name"] for c in rep["checks"]]
    assert names == ["lemma", "hemisphere"]
    for c in rep["checks"]:
        assert c["verdict"] in {"pass", "fail", "refused", "skipped"}
        if c["verdict"] != "pass":
            assert c["reason"]


def test_crash_isolation(monkeypatch):
    def boom(ctx):
        raise FloatingPointError("synthetic")

    monkeypatch.setitem(runner._IMPL, "lemma", boom)
    rep = run(RunConfig("great:2", checks=("algebra", "lemma", "theorem1", "corollary")))
    v = _verdicts(rep)
    assert v["lemma"]["verdict"] == "fail"
    assert v["lemma"]["reason"] == "FloatingPointError: synthetic"
    assert v["theorem1"]["verdict"] == "pass"
    assert v["corollary"]["verdict"] == "pass"


def test_determinism_and_worker_invariance():
    cfg = dict(checks=("minimality", "parallelism", "isoparametric", "theorem2", "hemisphere"), grid=8)
    a = dumps(strip_timings(run(RunConfig("product:1,2,2", workers=1, **cfg))))
    b = dumps(strip_timings(run(RunConfig("product:1,2,2", workers=1, **cfg))))
    c = dumps(strip_timings(run(RunConfig("product:1,2,2", workers=4, **cfg))))
    assert a == b == c


def test_report_schema_and_files(tmp_path):
    out = tmp_path / "r.json"
    side = tmp_path / "r.csv"
    rep = run(RunConfig("great:3", checks=("minimality", "isoparametric", "theorem2", "corollary"), out=str(out), csv=str(side)))
    data = json.loads(out.read_text())
    assert data["schema"] == 1
    validate_report(data)
    assert strip_timings(data) == strip_timings(json.loads(dumps(rep)))
    rows = list(csv.reader(side.open()))
    header = rows[0]
    assert header[:4] == ["node", "u0", "u1", "u2"]
    assert "eigenmap_residual_eta1" in header and "harmonicity_defect_e4" in header
    assert len(rows) == 1 + rep["entry"]["nodes"]
    col = header.index("eigenmap_residual_eta1")
    assert max(float(r[col]) for r in rows[1:]) < 1e-4
    bad = dict(data)
    bad["schema"] = 2
    with pytest.raises(jsonschema.ValidationError):
        validate_report(bad)


def test_entry_grid_recorded():
    rep = run(RunConfig("great:5", grid=24, checks=("algebra",)))
    grid = rep["entry"]["grid"]
    assert int(np.prod(grid)) <= 200_000
    assert rep["config"]["grid"] == 24


def test_suite_subset():
    result = run_suite(specs=("great:2", "product:1,5"), checks=("algebra", "minimality"), grid=8)
    assert [r["entry"]["spec"] for r in result["suite"]] == ["great:2", "product:1,5"]
    assert result["summary"] == {"pass": 4}
    validate_report(result)
