"""The octonionic Gauss map ``gamma(x) = x^{-1} eta(x)`` and its Laplacian checks.

For a unit normal section ``eta`` of ``M`` in S^7 the Gauss map takes values
in the unit sphere of the imaginary octonions.  On minimal submanifolds with
``eta`` parallel in the normal bundle, and ``eta`` an eigenvector of the
shape-operator Gram matrix, it is an eigenmap with eigenvalue
``7 - k + |S_eta|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import cd_conj, left_matrix, right_matrix
from .charts import DEFAULT_FD_STEP, check_stencil, frames_at, laplace_beltrami, quadrature_weights
from .errors import DomainError, SpectrumNotConstantError
from .fields import AmbientField, combine
from .parallel import map_chunks
from .spectra import gram_matrix, shape_operators
from .tolerances import DEFAULT_TOLERANCES

_CONJ = np.array([1.0] + [-1.0] * 7)


@dataclass(frozen=True, eq=False)
class GaussMapField:
    """``gamma_eta`` on a chart, in evaluator form."""

    chart: object
    normal: AmbientField
    label: str = ""

    def values(self, u) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        x = self.chart.immersion(u)
        # x^{-1} = conj(x) on the unit sphere
        return np.einsum("nij,nj->ni", left_matrix(cd_conj(x)), self.normal.value(x))

    __call__ = values

    def gradient(self, u, jet=None, h: float = DEFAULT_FD_STEP) -> np.ndarray:
        """Coordinate derivatives ``d_i gamma``, shape (N, 8, d).

        ``d_i gamma = conj(d_i F) eta + conj(F) (D eta)(d_i F)``.
        """
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if jet is None or jet[0] is None:
            x, df, _ = self.chart.jet(u, 1)
        else:
            x, df = jet
        eta = self.normal.value(x)
        if self.normal.jacobian is not None:
            deta = self.normal.jacobian(x) @ df
        else:
            cols = []
            for i in range(self.chart.dim):
                step = np.zeros(self.chart.dim)
                step[i] = h
                xp = self.chart.immersion(u + step)
                xm = self.chart.immersion(u - step)
                cols.append((self.normal.value(xp) - self.normal.value(xm)) / (2 * h))
            deta = np.stack(cols, axis=-1)
        return _gamma_gradient(x, df, eta, deta)

    @property
    def supports_ambient(self) -> bool:
        return self.normal.jacobian is not None

    def ambient_gradient(self, x, dx) -> np.ndarray:
        """Coordinate derivatives from ambient points ``x`` (..., 8) and tangents ``dx`` (..., 8, d)."""
        return _gamma_gradient(x, dx, self.normal.value(x), self.normal.jacobian(x) @ dx)


def _gamma_gradient(x, df, eta, deta):
    return right_matrix(eta) @ (_CONJ[:, None] * df) + left_matrix(cd_conj(x)) @ deta


def gauss_map(chart, eta: AmbientField, u, tol: float = DEFAULT_TOLERANCES.tangency) -> np.ndarray:
    """``gamma_eta(F(u))`` after checking that ``eta`` is a unit normal at ``u``."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u2 = np.atleast_2d(u)
    x, df, _ = chart.jet(u2, 1)
    e = eta.value(x)
    checks = [
        ("|eta|^2 - 1", np.abs(np.sum(e * e, axis=-1) - 1.0)),
        ("<eta, x>", np.abs(np.sum(e * x, axis=-1))),
        ("<eta, dF>", np.max(np.abs(np.einsum("nk,nki->ni", e, df)), axis=-1)),
    ]
    for name, val in checks:
        if np.any(val > tol):
            n = int(np.argmax(val))
            raise DomainError(f"normal precondition failed: {name} = {float(val[n]):.3e} at u = {u2[n].tolist()}")
    g = GaussMapField(chart, eta).values(u2)
    return g[0] if single else g


def gauss_laplacian(chart, gamma, u, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Componentwise Laplace-Beltrami operator of an R^8-valued map."""
    return laplace_beltrami(chart, gamma, u, h)


def _harmonic_part(lap, gamma):
    along = np.sum(lap * gamma, axis=-1, keepdims=True)
    return np.linalg.norm(lap - along * gamma, axis=-1)


def harmonicity_defect(chart, eta: AmbientField, u, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Norm of the part of ``Laplacian(gamma)`` orthogonal to ``gamma``.

    Zero exactly where the Gauss map satisfies the harmonic map equation.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u2 = np.atleast_2d(u)
    gamma = GaussMapField(chart, eta)
    out = _harmonic_part(gauss_laplacian(chart, gamma, u2, h), gamma.values(u2))
    return out[0] if single else out


def verification_nodes(chart, h: float) -> np.ndarray:
    """Grid nodes where the Laplacian stencil fits.

    With a recentring map every node qualifies; otherwise nodes closer than
    ``2h`` to a non-periodic chart boundary are dropped.
    """
    u = chart.nodes()
    if chart.recenter is not None:
        return u
    return u[chart.interior_mask(u, h)]


def laplacian_on_nodes(chart, eta: AmbientField, u, h: float = DEFAULT_FD_STEP, workers: int = 1):
    """``(gamma, Laplacian(gamma), quadrature weight)`` at every node of ``u``."""
    gamma = GaussMapField(chart, eta)
    if chart.recenter is None or not gamma.supports_ambient:
        check_stencil(chart, u, h)

    def block(ub):
        return gamma.values(ub), gauss_laplacian(chart, gamma, ub, h), quadrature_weights(chart, ub)

    return map_chunks(block, u, workers)


@dataclass(frozen=True)
class EigenmapVerdict:
    label: str
    sigma: float
    eigenvalue: float
    residual_l2: float
    residual_max: float
    component_residuals: tuple
    tangency_defect: float
    nodes: int
    passed: bool

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "sigma": self.sigma,
            "lambda": self.eigenvalue,
            "residual_l2": self.residual_l2,
            "residual_max": self.residual_max,
            "component_residuals": list(self.component_residuals),
            "tangency_defect": self.tangency_defect,
            "nodes": self.nodes,
            "pass": self.passed,
        }


def eigenmap_residual(
    chart,
    eta: AmbientField,
    eigenvalue: float,
    *,
    sigma: float = float("nan"),
    u=None,
    h: float = DEFAULT_FD_STEP,
    workers: int = 1,
    tol: float = DEFAULT_TOLERANCES.eigenmap,
    data=None,
) -> EigenmapVerdict:
    """Relative residual of ``Laplacian(gamma) = -eigenvalue * gamma`` over the grid.

    The L2 norm is quadrature weighted and normalized by
    ``eigenvalue * |gamma|_L2``; the component residuals use the same
    normalization, one per basis direction of R^8.  ``data`` may carry a
    precomputed ``laplacian_on_nodes`` result.
    """
    if u is None:
        u = verification_nodes(chart, h)
    if data is None:
        data = laplacian_on_nodes(chart, eta, u, h, workers)
    gamma, lap, w = data
    res = lap + eigenvalue * gamma
    scale = abs(eigenvalue) * np.sqrt(np.sum(w * np.sum(gamma * gamma, axis=-1)))
    l2 = float(np.sqrt(np.sum(w * np.sum(res * res, axis=-1))) / scale)
    comp = tuple(float(np.sqrt(np.sum(w * res[:, c] ** 2)) / scale) for c in range(res.shape[1]))
    rmax = float(np.max(np.linalg.norm(res, axis=-1)) / abs(eigenvalue))
    tangency = float(np.max(_harmonic_part(lap, gamma)))
    return EigenmapVerdict(
        eta.label, float(sigma), float(eigenvalue), l2, rmax, comp, tangency, int(u.shape[0]), l2 < tol
    )


def eigen_normal(hints, coeffs, label: str = "") -> AmbientField:
    """Normal section with constant coefficients over the hint frame."""
    return combine(list(hints), coeffs, label)


def eigenmap_verify(
    chart,
    hints,
    spectrum,
    j: int,
    *,
    constancy=None,
    u=None,
    h: float = DEFAULT_FD_STEP,
    workers: int = 1,
    tolerances=DEFAULT_TOLERANCES,
    data=None,
) -> EigenmapVerdict:
    """Check that the j-th Gram eigen-direction gives an eigenmap.

    ``spectrum`` is the Gram spectrum at a reference node; ``constancy`` an
    optional :class:`~octoverify.spectra.ConstancyScan`, which must show a
    constant spectrum.
    """
    if constancy is not None and not constancy.passed(tolerances.constancy):
        raise SpectrumNotConstantError(
            f"Gram spectrum varies over the grid (spread {constancy.spread:.3e} >= "
            f"{tolerances.constancy:.0e}); eigen-directions are not globally defined"
        )
    coeffs = np.asarray(spectrum.vectors)[:, j]
    sigma = float(np.asarray(spectrum.sigma)[j])
    k = len(hints)
    lam = 7 - k + sigma
    eta = eigen_normal(hints, coeffs, label=f"eta{j + 1}")
    return eigenmap_residual(
        chart, eta, lam, sigma=sigma, u=u, h=h, workers=workers, tol=tolerances.eigenmap, data=data
    )


class _Projected:
    """``u -> <gamma(u), v>`` for a batch of directions ``v`` (rows of V)."""

    def __init__(self, gamma: GaussMapField, directions):
        self.gamma = gamma
        self.directions = directions

    @property
    def supports_ambient(self) -> bool:
        return self.gamma.supports_ambient

    def gradient(self, u, jet=None, h=DEFAULT_FD_STEP):
        return np.einsum("nkd,mk->nmd", self.gamma.gradient(u, jet, h), self.directions)

    def ambient_gradient(self, x, dx):
        return np.einsum("...kd,mk->...md", self.gamma.ambient_gradient(x, dx), self.directions)


def lemma_residual(chart, frames, hints, v, u, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """``|Delta f - RHS|`` for ``f = <gamma_eta, v>`` with ``eta = hints[0]``.

    ``RHS = -sum_k (<S_eta, S_k> + n delta_1k) <Gamma_x(eta_k), v>`` over the
    orthonormal normal frame ``hints`` (with ``eta`` first), ``n = dim M``.
    ``v`` may be a single direction (8,) or a stack (m, 8); ``u`` a single
    point or (N, d).  Returns residuals of shape (N, m) squeezed accordingly.
    """
    v = np.asarray(v, dtype=float)
    single_v = v.ndim == 1
    vs = np.atleast_2d(v)
    if np.any(np.abs(vs[:, 0]) > DEFAULT_TOLERANCES.tangency) or np.any(
        np.abs(np.linalg.norm(vs, axis=-1) - 1) > DEFAULT_TOLERANCES.tangency
    ):
        raise DomainError("v must be a unit imaginary octonion")
    u = np.asarray(u, dtype=float)
    single_u = u.ndim == 1
    u2 = np.atleast_2d(u)
    if frames is None or np.ndim(frames.x) == 1:
        frames = frames_at(chart, u2)
    hints = list(hints)
    gamma = GaussMapField(chart, hints[0])
    lhs = laplace_beltrami(chart, _Projected(gamma, vs), u2, h)
    shapes = shape_operators(chart, frames, hints, u2, h)
    row = gram_matrix(shapes)[:, 0, :].copy()
    row[:, 0] += chart.dim
    x = frames.x
    lconj = left_matrix(cd_conj(x))
    gam = np.stack([np.einsum("nij,nj->ni", lconj, f.value(x)) for f in hints], axis=1)
    rhs = -np.einsum("nk,nkc,mc->nm", row, gam, vs)
    out = np.abs(lhs - rhs)
    if single_v:
        out = out[:, 0]
    return out[0] if single_u else out


def reorder_hints(hints, first: int) -> list:
    """Hints with entry ``first`` moved to the front, others in order."""
    hints = list(hints)
    return [hints[first]] + hints[:first] + hints[first + 1 :]


def random_imaginary_directions(count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 8))
    v[:, 0] = 0.0
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
