"""Charts of submanifolds of S^7 and the geometry computed on them.

A chart carries an immersion ``u -> F(u)`` into the unit sphere of R^8 with
analytic first and second derivatives.  Everything here is vectorized over
a leading node axis: ``u`` has shape (N, d), ``F`` (N, 8), ``dF`` (N, 8, d),
``d2F`` (N, 8, d, d).  Single points of shape (d,) are accepted too.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ChartDegeneracyError, DomainError, StencilError
from .tolerances import DEFAULT_TOLERANCES

DEFAULT_FD_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class Chart:
    """Parametrized patch of a d-dimensional submanifold of S^7.

    ``jet_fn(u, order)`` returns ``(F, dF, d2F)`` with ``d2F`` None when
    ``order < 2``.  Grid nodes sit at cell centres (half-cell offset) so no
    node lands on a coordinate singularity at the domain edge.

    ``recenter(x)``, when given, returns ``(u_star, Q)``: a fixed
    well-conditioned parameter and per-point orthogonal maps (N, 8, 8) that
    preserve the manifold and satisfy ``Q F(u_star) = x``.

    ``polar_powers[a] = p > 0`` marks axis ``a`` as a polar angle on
    ``[0, pi]`` whose metric density carries the factor ``sin(u_a)**p``;
    quadrature then uses weights adapted to that factor.
    """

    dim: int
    lower: tuple
    upper: tuple
    periodic: tuple
    jet_fn: Callable
    grid: tuple
    name: str = ""
    singular_loci: tuple = ()
    compact: bool = True
    recenter: Optional[Callable] = None
    polar_powers: tuple = ()

    def __post_init__(self):
        d = self.dim
        for attr in ("lower", "upper", "periodic", "grid"):
            val = getattr(self, attr)
            if len(val) != d:
                raise ValueError(f"chart {attr} has length {len(val)}, expected {d}")
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "periodic", tuple(bool(v) for v in self.periodic))
        object.__setattr__(self, "grid", tuple(int(v) for v in self.grid))
        if self.polar_powers:
            if len(self.polar_powers) != d:
                raise ValueError(f"chart polar_powers has length {len(self.polar_powers)}, expected {d}")
            for a, p in enumerate(self.polar_powers):
                if p and (self.periodic[a] or self.lower[a] != 0.0 or abs(self.upper[a] - math.pi) > 1e-15):
                    raise ValueError(f"axis {a} carries a polar power but is not [0, pi]")
            object.__setattr__(self, "polar_powers", tuple(int(p) for p in self.polar_powers))

    def jet(self, u, order: int = 2):
        u = np.asarray(u, dtype=float)
        return self.jet_fn(u, order)

    def immersion(self, u) -> np.ndarray:
        return self.jet(u, 0)[0]

    def with_grid(self, counts) -> Chart:
        if np.isscalar(counts):
            counts = (int(counts),) * self.dim
        return replace(self, grid=tuple(int(c) for c in counts))

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / np.array(self.grid)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.grid))

    def axes(self) -> list:
        return [
            lo + (np.arange(n) + 0.5) * (hi - lo) / n
            for lo, hi, n in zip(self.lower, self.upper, self.grid)
        ]

    def nodes(self) -> np.ndarray:
        """All grid nodes, (N, d), in C order of the per-axis index."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def interior_mask(self, u, h: float) -> np.ndarray:
        """Nodes at distance >= 2h from every non-periodic boundary."""
        u = np.atleast_2d(u)
        ok = np.ones(u.shape[0], dtype=bool)
        for i, per in enumerate(self.periodic):
            if not per:
                ok &= (u[:, i] - self.lower[i] >= 2 * h) & (self.upper[i] - u[:, i] >= 2 * h)
        return ok

    def transformed(self, q, name: Optional[str] = None) -> Chart:
        """Compose the immersion with a constant orthogonal map ``q`` of R^8."""
        q = np.asarray(q, dtype=float)
        base = self.jet_fn

        def jet_fn(u, order):
            f, df, d2f = base(u, order)
            f = f @ q.T
            df = None if df is None else np.einsum("ab,...bi->...ai", q, df)
            d2f = None if d2f is None else np.einsum("ab,...bij->...aij", q, d2f)
            return f, df, d2f

        recenter = None
        if self.recenter is not None:
            base_recenter = self.recenter

            def recenter(x):
                ustar, qq = base_recenter(x @ q)
                return ustar, q @ qq @ q.T

        return replace(self, jet_fn=jet_fn, recenter=recenter, name=name or f"{self.name}*Q")


def _as_points(u, dim: int):
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[-1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got shape {u.shape}")
    return u, single


@dataclass(frozen=True)
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det_g: np.ndarray


def _gram(df):
    return np.einsum("...ki,...kj->...ij", df, df)


def metric_data(chart: Chart, u, tol: float = DEFAULT_TOLERANCES.metric) -> MetricData:
    """Induced metric ``g_ij = <d_i F, d_j F>``, its inverse and sqrt(det g)."""
    u, single = _as_points(u, chart.dim)
    _, df, _ = chart.jet(u, 1)
    g = _gram(df)
    det = np.linalg.det(g)
    bad = ~(det > tol**2)
    if np.any(bad):
        raise ChartDegeneracyError(
            f"singular metric on chart {chart.name!r} at u = {u[np.argmax(bad)].tolist()}"
        )
    g_inv = np.linalg.inv(g)
    sq = np.sqrt(det)
    if single:
        return MetricData(g[0], g_inv[0], sq[0])
    return MetricData(g, g_inv, sq)


def check_stencil(chart: Chart, u, h: float):
    u = np.atleast_2d(u)
    for i, per in enumerate(chart.periodic):
        if per:
            continue
        lo, hi = chart.lower[i], chart.upper[i]
        out = (u[:, i] - h < lo) | (u[:, i] + h > hi)
        if np.any(out):
            bad = u[np.argmax(out)]
            raise StencilError(
                f"stencil of step {h} leaves non-periodic axis {i} of chart "
                f"{chart.name!r} at u = {bad.tolist()}"
            )


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A function on the chart domain given in evaluator form.

    ``func(u)`` returns (N,) or (N, m) values; ``grad(u)`` the matching
    (N, d) or (N, m, d) coordinate gradient.  Without ``grad`` the gradient
    is taken by central differences.
    """

    func: Callable
    grad: Optional[Callable] = None
    ambient: Optional[Callable] = None

    @property
    def supports_ambient(self) -> bool:
        return self.ambient is not None

    def ambient_gradient(self, x, dx):
        """Coordinate gradient from ambient point ``x`` and tangents ``dx``."""
        return self.ambient(x, dx)

    def __call__(self, u):
        return self.func(np.atleast_2d(np.asarray(u, dtype=float)))

    def gradient(self, u, jet=None, h: float = DEFAULT_FD_STEP) -> np.ndarray:
        if self.grad is not None:
            return self.grad(u)
        cols = []
        for i in range(u.shape[-1]):
            step = np.zeros(u.shape[-1])
            step[i] = h
            cols.append((self.func(u + step) - self.func(u - step)) / (2 * h))
        return np.stack(cols, axis=-1)

    def on_grid(self, chart: Chart) -> np.ndarray:
        vals = self.func(chart.nodes())
        return vals.reshape(chart.grid + vals.shape[1:])

    @classmethod
    def from_ambient(cls, chart: Chart, phi, dphi=None) -> ScalarField:
        """Pull back ``phi: R^8 -> R`` (gradient ``dphi``: R^8 -> R^8)."""

        def func(u):
            return phi(chart.immersion(u))

        grad = ambient = None
        if dphi is not None:
            def ambient(x, dx):
                return np.einsum("...k,...ki->...i", dphi(x), dx)

            def grad(u):
                f, df, _ = chart.jet(u, 1)
                return ambient(f, df)

        return cls(func, grad, ambient)


def _supports_ambient(f) -> bool:
    return bool(getattr(f, "supports_ambient", False))


def laplace_beltrami(chart: Chart, f, u, h: float = DEFAULT_FD_STEP, recentre: Optional[bool] = None) -> np.ndarray:
    """Laplace-Beltrami operator of ``f`` at ``u``.

    Uses the divergence form split as
    ``d_i(g^ij d_j f) + (d_i log sqrt g) g^ij d_j f``: the outer derivative of
    the flux is a central difference of step ``h``, the log-volume
    derivative comes from the analytic jet.

    ``f`` is a :class:`ScalarField` or any object with a
    ``gradient(u, jet, h)`` method; vector-valued fields are handled
    componentwise.  When the chart has a ``recenter`` map and ``f`` can be
    evaluated from ambient data (``supports_ambient``), the stencil is laid
    out in a recentred copy of the chart where the node sits at a
    well-conditioned reference parameter, so truncation error is not
    amplified near polar coordinate singularities.  ``recentre=False``
    forces the plain chart stencil.
    """
    u, single = _as_points(u, chart.dim)
    if recentre is None:
        recentre = chart.recenter is not None and _supports_ambient(f)
    if recentre:
        lap = _lb_recentred(chart, f, u, h)
    else:
        lap = _lb_chart(chart, f, u, h)
    return lap[0] if single else lap


def _lb_chart(chart, f, u, h):
    check_stencil(chart, u, h)
    d = chart.dim
    x0, df, d2f = chart.jet(u, 2)
    g_inv = np.linalg.inv(_gram(df))
    dlog = np.einsum("nkia,nkb,nab->ni", d2f, df, g_inv)
    grad0 = f.gradient(u, (x0, df), h)
    scalar = grad0.ndim == 2
    if scalar:
        grad0 = grad0[:, None, :]
    lap = np.einsum("nmj,nij,ni->nm", grad0, g_inv, dlog)
    for i in range(d):
        for sign in (1.0, -1.0):
            w = u.copy()
            w[:, i] += sign * h
            fw, dfw, _ = chart.jet(w, 1)
            gi = np.linalg.inv(_gram(dfw))[:, i, :]
            gw = f.gradient(w, (fw, dfw), h)
            if scalar:
                gw = gw[:, None, :]
            lap += sign * np.einsum("nj,nmj->nm", gi, gw) / (2 * h)
    return lap[:, 0] if scalar else lap


def _lb_recentred(chart, f, u, h):
    if chart.recenter is None:
        raise ValueError(f"chart {chart.name!r} has no recentring map")
    d = chart.dim
    x = chart.immersion(u)
    ustar, q = chart.recenter(x)
    steps = [np.zeros(d)]
    signs = [0.0]
    axes_ = [-1]
    for i in range(d):
        for sign in (1.0, -1.0):
            e = np.zeros(d)
            e[i] = sign * h
            steps.append(e)
            signs.append(sign)
            axes_.append(i)
    w = ustar + np.array(steps)
    check_stencil(chart, w, 0.0)
    fw, dfw, d2fw = chart.jet(w, 2)
    g_inv = np.linalg.inv(_gram(dfw))
    dlog = np.einsum("kia,kb,ab->i", d2fw[0], dfw[0], g_inv[0])
    # weight of each stencil gradient in the Laplacian, per coordinate j
    coef = np.zeros((len(steps), d))
    coef[0] = g_inv[0] @ dlog
    for s in range(1, len(steps)):
        coef[s] = signs[s] * g_inv[s][axes_[s]] / (2 * h)
    n, s = q.shape[0], len(steps)
    xs = np.swapaxes(q @ fw.T, 1, 2)
    dxs = (q @ np.moveaxis(dfw, 1, 0).reshape(-1, s * d)).reshape(n, -1, s, d).transpose(0, 2, 1, 3)
    grads = f.ambient_gradient(xs, dxs)
    if grads.ndim == 3:
        return grads.reshape(n, s * d) @ coef.ravel()
    m = grads.shape[2]
    return np.swapaxes(grads, 1, 2).reshape(n, m, s * d) @ coef.ravel()


def _orthonormalize(vectors, tol: float, what: str, u):
    """Gram-Schmidt of the columns in order, via QR with positive diagonal."""
    q, r = np.linalg.qr(vectors)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    if np.any(np.abs(diag) < tol):
        n = np.argmax(np.min(np.abs(diag), axis=-1) < tol)
        raise ChartDegeneracyError(f"rank-deficient {what} at u = {np.atleast_2d(u)[n].tolist()}")
    sign = np.where(diag < 0, -1.0, 1.0)
    return q * sign[..., None, :]


@dataclass(frozen=True)
class FrameField:
    """Orthonormal frame ``{x, E_1..E_d, eta_1..eta_k}`` of R^8 at chart points."""

    u: np.ndarray
    x: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray

    def full(self) -> np.ndarray:
        return np.concatenate([self.x[..., :, None], self.tangent, self.normal], axis=-1)

    def tangent_projector(self) -> np.ndarray:
        return np.einsum("...ia,...ja->...ij", self.tangent, self.tangent)

    def normal_projector(self) -> np.ndarray:
        """Projector onto the normal space of M inside the tangent space of S^7."""
        eye = np.eye(self.x.shape[-1])
        return (
            eye
            - np.einsum("...i,...j->...ij", self.x, self.x)
            - self.tangent_projector()
        )


def frames_at(chart: Chart, u, normal_hint=None, tol: float = 1e-8) -> FrameField:
    """Tangent and normal frames at ``u``.

    Tangent vectors are the Gram-Schmidt orthonormalization of ``d_i F``.
    With ``normal_hint`` (a sequence of ambient fields) the normal frame is
    the Gram-Schmidt orthonormalization of the hint values in order;
    otherwise it is completed from the ambient basis ``e_0, ..., e_7``.
    """
    u, single = _as_points(u, chart.dim)
    x, df, _ = chart.jet(u, 1)
    tangent = _orthonormalize(df, tol, "tangent frame", u)
    k = x.shape[-1] - 1 - chart.dim
    if normal_hint is not None:
        hint = np.stack([np.broadcast_to(h.value(x), x.shape) for h in normal_hint], axis=-1)
        if hint.shape[-1] != k:
            raise DomainError(f"normal hint has {hint.shape[-1]} fields, codimension is {k}")
        normal = _orthonormalize(hint, tol, "normal hint", u)
    else:
        # Gram-Schmidt of e_0, ..., e_7 against the tangent space, in order,
        # vectorized over nodes (unfilled slots are zero and subtract nothing)
        basis = np.concatenate([x[..., :, None], tangent], axis=-1)
        normal = np.zeros(x.shape + (k,))
        count = np.zeros(x.shape[0], dtype=int)
        rows = np.arange(x.shape[0])
        for i in range(x.shape[-1]):
            # e_i minus its projection onto span{x, E}; basis^T e_i is row i
            v = -np.einsum("nja,na->nj", basis, basis[:, i, :])
            v[:, i] += 1.0
            for slot in range(k):
                w = normal[:, :, slot]
                v = v - w * np.sum(w * v, axis=-1, keepdims=True)
            nv = np.linalg.norm(v, axis=-1)
            take = (nv > 1e-6) & (count < k)
            normal[rows[take], :, count[take]] = v[take] / nv[take, None]
            count += take
    frames = FrameField(u, x, tangent, normal)
    if single:
        return FrameField(u[0], x[0], tangent[0], normal[0])
    return frames


def sphere_covariant_derivative(chart: Chart, field, u, direction: int, h: float = DEFAULT_FD_STEP):
    """Levi-Civita derivative on S^7 of an ambient field along ``d_direction F``.

    The ambient directional derivative (analytic Jacobian when the field has
    one, central differences along the chart curve otherwise) with its
    component along the position vector removed.
    """
    u, single = _as_points(u, chart.dim)
    x, df, _ = chart.jet(u, 1)
    if field.jacobian is not None:
        deriv = np.einsum("nij,nj->ni", field.jacobian(x), df[:, :, direction])
    else:
        check_stencil(chart, u, h)
        step = np.zeros(chart.dim)
        step[direction] = h
        deriv = (field.value(chart.immersion(u + step)) - field.value(chart.immersion(u - step))) / (2 * h)
    out = deriv - np.sum(deriv * x, axis=-1)[:, None] * x
    return out[0] if single else out


def ambient_derivatives(chart: Chart, field, u, jet=None, h: float = DEFAULT_FD_STEP):
    """All coordinate directional derivatives ``D_{d_i F} field``, shape (N, 8, d)."""
    if jet is None:
        x, df, _ = chart.jet(u, 1)
    else:
        x, df = jet[0], jet[1]
    if field.jacobian is not None:
        return field.jacobian(x) @ df
    cols = []
    for i in range(chart.dim):
        step = np.zeros(chart.dim)
        step[i] = h
        cols.append(
            (field.value(chart.immersion(u + step)) - field.value(chart.immersion(u - step))) / (2 * h)
        )
    return np.stack(cols, axis=-1)


_MOMENTS = 16


@lru_cache(maxsize=None)
def polar_weights(n: int, power: int) -> np.ndarray:
    """Weights at the cell centres of ``[0, pi]`` for ``integral sin(t)**power f(t) dt``.

    Starts from the midpoint weights ``h sin(t_j)**power`` and adds the
    minimum-norm correction that integrates ``cos(k t)`` and ``sin(k t)``
    exactly for the lowest ``min(n, 16)`` such modes.  Both parities occur
    in restrictions of smooth functions on a sphere, and the plain midpoint
    rule is only second order on the odd ones.
    """
    t = (np.arange(n) + 0.5) * math.pi / n
    m = min(n, _MOMENTS)
    n_cos = (m + 1) // 2

    def modes(s):
        return np.concatenate([np.cos(np.outer(np.arange(n_cos), s)), np.sin(np.outer(np.arange(1, m - n_cos + 1), s))])

    g, gw = np.polynomial.legendre.leggauss(256)
    g = (g + 1) * (math.pi / 2)
    exact = modes(g) @ (gw * (math.pi / 2) * np.sin(g) ** power)
    base = (math.pi / n) * np.sin(t) ** power
    a = modes(t)
    w = base + np.linalg.lstsq(a, exact - a @ base, rcond=1e-13)[0]
    w.setflags(write=False)
    return w


def quadrature_weights(chart: Chart, u=None) -> np.ndarray:
    """Riemannian quadrature weights per node.

    Periodic and plain axes use the midpoint rule; polar axes (see
    :attr:`Chart.polar_powers`) use :func:`polar_weights` applied to
    ``sqrt(det g) / prod sin(u_a)**p``.  ``u`` must be grid nodes when the
    chart has polar axes.
    """
    if u is None:
        u = chart.nodes()
    u = np.asarray(u, dtype=float)
    _, df, _ = chart.jet(u, 1)
    w = np.sqrt(np.linalg.det(_gram(df)))
    spacing = chart.spacing
    powers = chart.polar_powers or (0,) * chart.dim
    for a, p in enumerate(powers):
        if not p:
            w = w * spacing[a]
            continue
        n = chart.grid[a]
        idx = np.rint(u[:, a] / spacing[a] - 0.5).astype(int)
        if np.any(idx < 0) or np.any(idx >= n) or np.max(np.abs((idx + 0.5) * spacing[a] - u[:, a])) > 1e-9 * spacing[a]:
            raise ValueError(f"quadrature on polar axis {a} needs grid nodes")
        w = w * polar_weights(n, p)[idx] / np.sin(u[:, a]) ** p
    return w


def integrate(chart: Chart, f) -> float:
    """Riemannian integral over the chart grid.

    ``f`` is a ScalarField, a callable of ``u``, or an array of node values
    (in :meth:`Chart.nodes` order or grid shape).  Vector-valued fields
    integrate componentwise.
    """
    u = chart.nodes()
    w = quadrature_weights(chart, u)
    if callable(f):
        vals = f(u)
    else:
        vals = np.asarray(f, dtype=float).reshape((u.shape[0],) + np.shape(f)[chart.dim:])
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        return float(w @ vals)
    return w @ vals


def dump_grid_csv(chart: Chart, stream, fields: Optional[dict] = None, u=None):
    """Write one CSV row per node: ``u_*``, ``x0..x7`` and requested fields.

    ``fields`` maps a column stem to a callable of ``u`` returning (N,) or
    (N, m) values; vector fields get columns ``stem_0..stem_{m-1}``.
    """
    if u is None:
        u = chart.nodes()
    x = chart.immersion(u)
    cols = [u, x]
    header = [f"u{i}" for i in range(chart.dim)] + [f"x{i}" for i in range(x.shape[1])]
    for name, fn in (fields or {}).items():
        vals = np.asarray(fn(u), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
            header.append(name)
        else:
            header.extend(f"{name}_{j}" for j in range(vals.shape[1]))
        cols.append(vals)
    data = np.concatenate(cols, axis=1)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in data:
        writer.writerow([repr(float(v)) for v in row])
