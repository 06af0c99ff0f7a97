import json
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from octoverify.catalog import build_chart, parse_spec
from octoverify.errors import RefusedError
from octoverify.gauss import GaussMapField, eigen_normal
from octoverify.hemisphere import GENERATOR, halton_directions, hemisphere_scan, mean_zero_check
from octoverify.spectra import gram_spectrum, spectrum_from_gram


def _constant(u):
    return np.broadcast_to(np.eye(8)[1], (np.atleast_2d(u).shape[0], 8))


def test_constant_map_is_in_a_hemisphere():
    chart, _ = build_chart(parse_spec("product:3,3"), grid=8)
    rep = hemisphere_scan(chart, _constant, candidate_budget=32)
    assert_allclose(rep.best_margin, 1.0)
    assert_allclose(rep.best_direction, np.eye(8)[1])
    assert not rep.consistent()
    assert rep.verdict == "contained in an open hemisphere"
    assert_allclose(mean_zero_check(chart, _constant), 1.0)


@pytest.mark.parametrize("name", ["great:6", "product:3,3", "product:1,1,3"])
def test_eigen_directions_not_in_a_hemisphere(name):
    chart, hints = build_chart(parse_spec(name), grid=8)
    spec = spectrum_from_gram(gram_spectrum(chart, None, hints, chart.nodes()[:1]).gram[0])
    for j in range(len(hints)):
        gamma = GaussMapField(chart, eigen_normal(hints, spec.vectors[:, j]))
        rep = hemisphere_scan(chart, gamma, k=len(hints), entry=name, normal_label=f"eta{j + 1}")
        assert rep.best_margin <= 1e-3
        assert rep.consistent()
        assert rep.verdict == "no open hemisphere among candidates"
        assert abs(rep.mean_vector[0]) < 1e-10
        assert rep.samples == chart.node_count
        assert mean_zero_check(chart, gamma) < 1e-5


def test_great_sphere_margin_is_negative():
    chart, hints = build_chart(parse_spec("great:6"), grid=8)
    rep = hemisphere_scan(chart, GaussMapField(chart, hints[0]), k=1)
    assert rep.best_margin <= 0.0


def test_codimension_six_refused():
    chart, _ = build_chart(parse_spec("great:2"), grid=8)
    with pytest.raises(RefusedError, match="1..5"):
        hemisphere_scan(chart, _constant, k=6)


def test_refinement_does_not_raise_margin():
    # half-offset grids are nested under threefold refinement
    coarse, hints = build_chart(parse_spec("compose:great:3/product:1,1"), grid=8)
    fine = coarse.with_grid((24, 24))
    eta = hints[1]
    rep = hemisphere_scan(coarse, GaussMapField(coarse, eta), candidate_budget=64)
    fine_vals = GaussMapField(fine, eta).values(fine.nodes())
    assert np.min(fine_vals @ rep.best_direction) <= rep.best_margin + 1e-6
    rep_fine = hemisphere_scan(fine, GaussMapField(fine, eta), candidate_budget=64)
    assert rep_fine.best_margin <= 1e-3


def test_halton_directions_deterministic_unit_imaginary():
    a = halton_directions(50, seed=4)
    b = halton_directions(50, seed=4)
    assert_allclose(a, b, atol=0)
    assert_allclose(np.linalg.norm(a, axis=-1), 1.0)
    assert np.all(a[:, 0] == 0.0)
    assert halton_directions(0).shape == (0, 8)


def test_report_json_fields():
    chart, hints = build_chart(parse_spec("great:2"), grid=8)
    rep = hemisphere_scan(chart, GaussMapField(chart, hints[0]), candidate_budget=16, seed=3, entry="great:2", normal_label="e3")
    data = json.loads(json.dumps(rep.to_json()))
    for key in ["entry", "normal_label", "samples", "candidates", "mean_norm", "best_margin", "best_direction", "verdict"]:
        assert key in data
    assert data["generator"] == GENERATOR and data["seed"] == 3 and data["candidate_budget"] == 16


def test_noncompact_chart_refused():
    chart, hints = build_chart(parse_spec("great:2"), grid=8)
    open_chart = replace(chart, compact=False)
    with pytest.raises(RefusedError):
        hemisphere_scan(open_chart, _constant)
    with pytest.raises(RefusedError):
        mean_zero_check(open_chart, _constant)


def test_workers_do_not_change_report():
    chart, hints = build_chart(parse_spec("product:1,2,2"), grid=8)
    gamma = GaussMapField(chart, hints[0])
    a = hemisphere_scan(chart, gamma, workers=1).to_json()
    b = hemisphere_scan(chart, gamma, workers=4).to_json()
    assert json.dumps(a) == json.dumps(b)
