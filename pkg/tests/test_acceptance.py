"""Acceptance criteria 1-9, one printed PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``.  Criteria 7 and 9
share one pair of full-suite runs (workers 1 and 8), which dominate the
runtime of this module.
"""

import math
import time

import numpy as np
import pytest

from octoverify.catalog import SHIPPED, build_chart, parse_spec
from octoverify.charts import frames_at
from octoverify.hemisphere import hemisphere_scan
from octoverify.parallel import map_chunks
from octoverify.runner import RunConfig, dumps, run, run_suite, strip_timings
from octoverify.spectra import commutator_norms, gram_matrix, shape_operators

_RUNS = {}


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def _run(spec, h=1e-3, checks=("minimality", "parallelism", "isoparametric", "lemma", "theorem1", "theorem2", "corollary")):
    key = (spec, h, checks)
    if key not in _RUNS:
        t0 = time.perf_counter()
        rep = run(RunConfig(spec, grid=24, fd_step=h, checks=checks))
        _RUNS[key] = (rep, time.perf_counter() - t0)
    return _RUNS[key]


def _verdicts(rep):
    return {c["name"]: c for c in rep["checks"]}


@pytest.fixture(scope="module")
def suites():
    t0 = time.perf_counter()
    one = run_suite(workers=1)
    elapsed = time.perf_counter() - t0
    eight = run_suite(workers=8)
    return one, eight, elapsed


def test_criterion_1_algebra(report):
    t0 = time.perf_counter()
    rep = run(RunConfig("great:2", checks=("algebra",)))
    elapsed = time.perf_counter() - t0
    c = rep["checks"][0]
    s = c["stats"]
    worst = max(v for k, v in s.items() if isinstance(v, float))
    ok = (
        c["verdict"] == "pass"
        and s["samples"] == 10_000
        and worst < 1e-12
        and s["sedenion_witness"]["product_norm"] == 0.0
        and rep["timings"]["checks"]["algebra"] < 1.0
    )
    report(1, ok, f"max relative identity error {worst:.2e}, sedenion witness |ab| = 0, {rep['timings']['checks']['algebra']:.2f} s ({elapsed:.2f} s with setup)")


def test_criterion_2_great_six(report):
    rep, elapsed = _run("great:6")
    v = _verdicts(rep)
    row = rep["lambda_table"][0]
    lemma = v["lemma"]["stats"]
    ok = (
        row["lambda"] == pytest.approx(6.0, abs=1e-12)
        and row["residual_l2"] < 1e-4
        and lemma["max"] < 1e-4
        and all(r["directions"] == 20 for r in lemma["per_hint"].values())
        and elapsed < 30.0
    )
    report(2, ok, f"lambda 6 residual {row['residual_l2']:.2e}, lemma {lemma['max']:.2e}, {elapsed:.1f} s")


def test_criterion_3_clifford(report):
    rep, _ = _run("product:3,3")
    v = _verdicts(rep)
    row = rep["lambda_table"][0]
    trace = v["minimality"]["stats"]["shape_trace"]["max"]
    ok = (
        abs(row["s_norm2"] - 6.0) < 1e-8
        and abs(row["lambda"] - 12.0) < 1e-8
        and row["residual_l2"] < 1e-4
        and trace < 1e-8
        and v["minimality"]["stats"]["shape_trace"]["nodes"] == rep["entry"]["nodes"]
    )
    report(3, ok, f"|S|^2 = {row['s_norm2']:.10f}, lambda 12 residual {row['residual_l2']:.2e}, max trace {trace:.1e}")


def test_criterion_4_codimension_two(report):
    rep, _ = _run("product:1,1,3")
    v = _verdicts(rep)
    chart, hints = build_chart(parse_spec("product:1,1,3"), 24)
    u = chart.nodes()

    def block(ub):
        shapes = shape_operators(chart, frames_at(chart, ub), hints, ub)
        g = gram_matrix(shapes)
        return np.max(np.abs(g - 5 * np.eye(2)), axis=(1, 2)), commutator_norms(shapes)

    gdev, comm = map_chunks(block, u)
    spread = rep["spectrum"]["constancy_spread"]
    rows = rep["lambda_table"]
    resid = max(r["residual_l2"] for r in rows)
    ok = (
        gdev.max() < 1e-8
        and spread < 1e-8
        and len(rows) == 2
        and all(abs(r["lambda"] - 10) < 1e-8 for r in rows)
        and resid < 1e-4
        and comm.max() < 1e-8
        and v["isoparametric"]["stats"]["commutator"]["max"] < 1e-8
    )
    report(4, ok, f"|G - 5I| {gdev.max():.1e} over {u.shape[0]} nodes, spread {spread:.1e}, lambda 10 residual {resid:.2e}, commutator {comm.max():.1e}")


def test_criterion_5_composition(report):
    rep, _ = _run("compose:great:3/product:1,1")
    v = _verdicts(rep)
    sigma = np.array(rep["spectrum"]["sigma"])
    lams = [r["lambda"] for r in rep["lambda_table"]]
    resid = max(r["residual_l2"] for r in rep["lambda_table"])
    defect = v["corollary"]["stats"]["harmonicity_defect"]["max"]
    ok = (
        np.max(np.abs(sigma - [0, 0, 0, 0, 2])) < 1e-8
        and np.allclose(lams, [2, 2, 2, 2, 4], atol=1e-8)
        and resid < 1e-4
        and v["corollary"]["verdict"] == "pass"
        and defect < 1e-4
    )
    report(5, ok, f"sigma {np.round(sigma, 10).tolist()}, lambdas {np.round(lams, 10).tolist()}, residual {resid:.2e}, harmonicity defect {defect:.1e}")


def test_criterion_6_mixture_negative_control(report):
    rep, _ = _run("compose:great:3/product:1,1")
    ctrl = _verdicts(rep)["theorem1"]["stats"]["negative_control"]
    ok = (
        not ctrl["eigencheck"]
        and abs(ctrl["eigencheck_residual"] - 1.0) < 1e-6
        and ctrl["harmonicity_defect_max"] > 0.1
        and ctrl["sigma_pair"] == pytest.approx([0.0, 2.0], abs=1e-8)
    )
    report(6, ok, f"eigencheck residual {ctrl['eigencheck_residual']:.6f}, harmonicity defect {ctrl['harmonicity_defect_max']:.3f}")


def test_criterion_7_hemisphere(report, suites):
    one, _, _ = suites
    margins, means, rows = [], [], 0
    for rep in one["suite"]:
        if rep["entry"]["minimal"] and rep["entry"]["k"] <= 5:
            assert rep["hemisphere"], rep["entry"]["spec"]
            for r in rep["hemisphere"]:
                rows += 1
                margins.append(r["best_margin"])
                means.append(r["mean_zero"])
    chart, _ = build_chart(parse_spec("great:3"), 16)
    const = hemisphere_scan(chart, lambda u: np.broadcast_to(np.eye(8)[1], (u.shape[0], 8)))
    ok = max(margins) <= 1e-3 and max(means) < 1e-5 and math.isclose(const.best_margin, 1.0, abs_tol=1e-12)
    report(7, ok, f"{rows} eigen-directions: max margin {max(margins):.3f}, max mean {max(means):.1e}; constant control margin {const.best_margin:.3f}")


def test_criterion_8_fd_convergence(report):
    ratios = []
    for spec in ("great:6", "product:3,3", "product:1,1,3"):
        fine, _ = _run(spec)
        coarse, _ = _run(spec, h=2e-3, checks=("minimality", "isoparametric", "theorem2"))
        for a, b in zip(coarse["lambda_table"], fine["lambda_table"]):
            ratios.append(a["residual_l2"] / b["residual_l2"])
    ok = all(3.5 <= r <= 4.5 for r in ratios)
    report(8, ok, "residual ratios h=2e-3 / h=1e-3: " + ", ".join(f"{r:.3f}" for r in ratios))


def test_criterion_9_determinism(report, suites):
    one, eight, elapsed = suites
    a = dumps(strip_timings(one))
    b = dumps(strip_timings(eight))
    verdicts = one["summary"]
    ok = a == b and elapsed < 600 and "fail" not in verdicts and len(one["suite"]) == len(SHIPPED)
    report(9, ok, f"workers 1 vs 8 identical: {a == b}; suite {elapsed:.0f} s; verdicts {verdicts}")
