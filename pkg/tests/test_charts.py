import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.stats import special_ortho_group

from octoverify.catalog import build_chart, parse_spec, product_chart, sphere_jet
from octoverify.charts import (
    Chart,
    ScalarField,
    dump_grid_csv,
    frames_at,
    integrate,
    laplace_beltrami,
    metric_data,
    quadrature_weights,
    sphere_covariant_derivative,
)
from octoverify.errors import ChartDegeneracyError, StencilError
from octoverify.fields import constant_field, killing_vector_field, position_field


def circle_chart():
    def jet(u, order):
        a = u[..., 0]
        f = np.zeros(u.shape[:-1] + (8,))
        f[..., 0], f[..., 1] = np.cos(a), np.sin(a)
        df = np.zeros(u.shape[:-1] + (8, 1))
        df[..., 0, 0], df[..., 1, 0] = -np.sin(a), np.cos(a)
        d2f = np.zeros(u.shape[:-1] + (8, 1, 1))
        d2f[..., 0, 0, 0], d2f[..., 1, 0, 0] = -np.cos(a), -np.sin(a)
        return f, df, d2f

    return Chart(1, (0.0,), (2 * math.pi,), (True,), jet, (64,), "circle")


def flat_torus():
    r = 1 / math.sqrt(2)
    return product_chart((1, 1), (r, r), grid=32)


def test_sphere_jet_matches_finite_differences():
    rng = np.random.default_rng(0)
    phi = rng.uniform(0.3, 2.8, size=(5, 4))
    x, dx, d2x = sphere_jet(phi, 0.7)
    assert_allclose(np.linalg.norm(x, axis=-1), 0.7)
    h = 1e-5
    for a in range(4):
        e = np.zeros(4)
        e[a] = h
        xp, dxp, _ = sphere_jet(phi + e, 0.7)
        xm, dxm, _ = sphere_jet(phi - e, 0.7)
        assert_allclose(dx[..., a], (xp - xm) / (2 * h), atol=1e-9)
        assert_allclose(d2x[..., a], (dxp - dxm) / (2 * h), atol=1e-9)


@pytest.mark.parametrize("name", ["great:6", "product:3,3", "product:1,1,3", "compose:great:4/product:1,2"])
def test_chart_invariants(name):
    chart, _ = build_chart(parse_spec(name), grid=8)
    u = chart.nodes()[::7]
    x, df, _ = chart.jet(u, 1)
    assert_allclose(np.linalg.norm(x, axis=-1), 1.0, atol=1e-12)
    assert np.max(np.abs(np.einsum("nk,nki->ni", x, df))) < 1e-10
    m = metric_data(chart, u)
    assert_allclose(m.g, np.swapaxes(m.g, -1, -2))
    assert np.all(np.linalg.eigvalsh(m.g) > 0)
    assert_allclose(m.g_inv @ m.g, np.broadcast_to(np.eye(chart.dim), m.g.shape), atol=1e-10)


def test_metric_examples():
    chart = circle_chart()
    assert_allclose(metric_data(chart, [0.3]).g, [[1.0]])
    r, s = 0.6, 0.8
    torus = product_chart((1, 1), (r, s), ambient=4)
    assert_allclose(metric_data(torus, [0.4, 1.9]).g, np.diag([r * r, s * s]), atol=1e-15)


def test_metric_degeneracy_names_point():
    # pole of S^2: polar angle 0
    chart, _ = build_chart(parse_spec("great:2"))
    with pytest.raises(ChartDegeneracyError, match=r"u = \[0.0"):
        metric_data(chart, [0.0, 1.0])


def test_laplacian_circle_and_constants():
    chart = circle_chart()
    u = chart.nodes()
    f = ScalarField(lambda u: np.cos(u[:, 0]))
    assert_allclose(laplace_beltrami(chart, f, u), -np.cos(u[:, 0]), atol=1e-6)
    const = ScalarField(lambda u: np.full(u.shape[0], 3.0))
    assert np.max(np.abs(laplace_beltrami(chart, const, u))) < 1e-8


def test_flat_torus_laplacian():
    chart = flat_torus()
    u = chart.nodes()
    # metric diag(1/2, 1/2) gives Delta = 2 (d_a^2 + d_b^2)
    f1 = ScalarField(lambda u: np.cos(u[:, 0]))
    assert_allclose(laplace_beltrami(chart, f1, u), -2 * np.cos(u[:, 0]), atol=1e-5)
    f2 = ScalarField(lambda u: np.cos(math.sqrt(2) * u[:, 0]))
    assert_allclose(laplace_beltrami(chart, f2, u), -4 * np.cos(math.sqrt(2) * u[:, 0]), atol=1e-5)


def _linear(v):
    return lambda x: x @ v, lambda x: np.broadcast_to(v, x.shape)


def test_spherical_harmonic_eigenvalue_on_great_spheres():
    rng = np.random.default_rng(1)
    v = rng.normal(size=8)
    for m in (2, 4):
        chart, _ = build_chart(parse_spec(f"great:{m}"), grid=8)
        u = chart.nodes()
        f = ScalarField.from_ambient(chart, *_linear(v))
        assert_allclose(laplace_beltrami(chart, f, u), -m * f(u), atol=1e-5)


def test_second_order_convergence():
    chart, _ = build_chart(parse_spec("great:3"), grid=8)
    u = chart.nodes()
    v = np.array([0.0, 1.0, -2.0, 0.5, 3.0, 0.0, 0.0, 0.0])
    phi = lambda x: (x @ v) ** 2
    dphi = lambda x: 2 * (x @ v)[..., None] * v
    f = ScalarField.from_ambient(chart, phi, dphi)
    # oracle: for p(x) = (v.x)^2 on the great S^3, Delta p = 2|v_T|^2 - 2(m+1) p
    vt = v.copy()
    vt[4:] = 0.0
    exact = 2 * vt @ vt - 8 * phi(chart.immersion(u))
    e1 = np.max(np.abs(laplace_beltrami(chart, f, u, h=2e-3) - exact))
    e2 = np.max(np.abs(laplace_beltrami(chart, f, u, h=1e-3) - exact))
    assert 3.5 <= e1 / e2 <= 4.5


def test_chart_invariance_under_rotation():
    chart, _ = build_chart(parse_spec("product:2,4"), grid=6)
    q = special_ortho_group.rvs(8, random_state=3)
    rot = chart.transformed(q)
    v = np.linspace(-1, 1, 8)
    f = ScalarField.from_ambient(chart, lambda x: (x @ v) ** 2, lambda x: 2 * (x @ v)[..., None] * v)
    qv = q @ v
    g = ScalarField.from_ambient(rot, lambda x: (x @ qv) ** 2, lambda x: 2 * (x @ qv)[..., None] * qv)
    u = chart.nodes()[::5]
    a = laplace_beltrami(chart, f, u)
    b = laplace_beltrami(rot, g, u)
    c = laplace_beltrami(chart, f, u[chart.interior_mask(u, 1e-3)], recentre=False)
    assert_allclose(a, b, atol=1e-10)
    assert_allclose(a[chart.interior_mask(u, 1e-3)], c, atol=1e-4)


def test_stencil_error_on_boundary():
    chart, _ = build_chart(parse_spec("great:2"))
    f = ScalarField(lambda u: u[:, 0])
    with pytest.raises(StencilError, match="axis 0"):
        laplace_beltrami(chart, f, [1e-4, 1.0])


def test_frames_orthonormal_and_hint_order():
    chart, hints = build_chart(parse_spec("product:3,3"), grid=8)
    u = chart.nodes()[::11]
    fr = frames_at(chart, u, hints)
    full = fr.full()
    assert_allclose(np.swapaxes(full, -1, -2) @ full, np.broadcast_to(np.eye(8), full.shape), atol=1e-10)
    assert_allclose(fr.normal[..., 0], hints[0].value(fr.x), atol=1e-12)
    plain = frames_at(chart, u).full()
    assert_allclose(np.swapaxes(plain, -1, -2) @ plain, np.broadcast_to(np.eye(8), plain.shape), atol=1e-10)


def test_great_sphere_normal_completion():
    chart, _ = build_chart(parse_spec("great:6"), grid=8)
    fr = frames_at(chart, chart.nodes()[:20])
    assert_allclose(np.abs(fr.normal[..., 7, 0]), 1.0)


def test_sphere_covariant_derivative():
    chart, _ = build_chart(parse_spec("great:6"), grid=8)
    u = chart.nodes()[::13]
    e7 = constant_field(np.eye(8)[7])
    for a in range(6):
        assert np.max(np.abs(sphere_covariant_derivative(chart, e7, u, a))) < 1e-12
    x = chart.immersion(u)
    df = chart.jet(u, 1)[1]
    rng = np.random.default_rng(2)
    v = rng.normal(size=8)
    v[0] = 0.0
    kill = killing_vector_field(v)
    for a in range(6):
        d = sphere_covariant_derivative(chart, kill, u, a)
        assert np.max(np.abs(np.sum(d * x, axis=-1))) < 1e-8
        # Killing: <nabla_X V, X> = 0
        assert np.max(np.abs(np.sum(d * df[:, :, a], axis=-1))) < 1e-10
        p = sphere_covariant_derivative(chart, position_field(), u, a)
        assert_allclose(p, df[:, :, a], atol=1e-12)


def test_integrate_examples():
    assert_allclose(integrate(circle_chart(), lambda u: np.ones(u.shape[0])), 2 * math.pi, atol=1e-6)
    assert abs(integrate(circle_chart(), lambda u: np.cos(u[:, 0]))) < 1e-10
    chart, _ = build_chart(parse_spec("product:3,3"))
    vol = integrate(chart, lambda u: np.ones(u.shape[0]))
    # |S^3(r)| = 2 pi^2 r^3 with r = 1/sqrt(2)
    assert_allclose(vol, (2 * math.pi**2 * 2**-1.5) ** 2, rtol=1e-10)


def test_integrate_refinement_invariance():
    chart, _ = build_chart(parse_spec("great:2"), grid=16)
    f = lambda u: np.exp(chart.immersion(u)[:, 0])
    a = integrate(chart, f)
    b = integrate(chart.with_grid((32, 32)), f)
    assert abs(a - b) < 1e-5 * abs(b)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, math.pi - 0.2), st.floats(0.0, 2 * math.pi))
def test_sphere_points_and_tangents(theta, phi):
    chart, _ = build_chart(parse_spec("great:2"))
    x, df, _ = chart.jet(np.array([[theta, phi]]), 1)
    assert abs(np.linalg.norm(x) - 1) < 1e-12
    assert np.max(np.abs(x[0] @ df[0])) < 1e-12


def test_quadrature_weights_positive():
    chart, _ = build_chart(parse_spec("product:1,1,3"), grid=8)
    assert np.all(quadrature_weights(chart) > 0)


def test_dump_grid_csv():
    chart = circle_chart().with_grid((4,))
    buf = io.StringIO()
    dump_grid_csv(chart, buf, {"f": lambda u: np.cos(u[:, 0])})
    lines = buf.getvalue().strip().splitlines()
    assert lines[0].split(",") == ["u0"] + [f"x{i}" for i in range(8)] + ["f"]
    assert len(lines) == 5
