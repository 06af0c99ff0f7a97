"""Shape operators, their Hilbert-Schmidt Gram matrix and its spectrum.

For a normal section ``eta`` the shape operator is ``S(X) = -(nabla_X eta)^T``
(tangential part).  In an orthonormal tangent frame ``E`` its matrix is
``S_ab = -<nabla_{E_a} eta, E_b>``.  The Gram matrix
``G_ij = <S_i, S_j> = tr(S_i S_j^T)`` of a normal frame represents
``B*B`` where ``B(eta) = S_eta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .charts import DEFAULT_FD_STEP, ambient_derivatives, frames_at
from .errors import ConvergenceError
from .parallel import map_chunks
from .tolerances import DEFAULT_TOLERANCES


def frame_derivatives(chart, frames, field, u, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Ambient derivatives ``D_{E_a} field`` along the tangent frame, (N, 8, d)."""
    if field.jacobian is not None:
        return field.jacobian(frames.x) @ frames.tangent
    x, df, _ = chart.jet(u, 1)
    coord = ambient_derivatives(chart, field, u, (x, df), h)
    # d_i F = sum_a E_a R_ai, so D_{E} = D_{d} R^{-1}
    r = np.einsum("...ka,...ki->...ai", frames.tangent, df)
    return coord @ np.linalg.inv(r)


@dataclass(frozen=True)
class ShapeOperatorMatrix:
    entries: np.ndarray
    normal_label: str = ""

    @property
    def asymmetry(self):
        return np.max(np.abs(self.entries - np.swapaxes(self.entries, -1, -2)), axis=(-2, -1))

    @property
    def trace(self):
        return np.trace(self.entries, axis1=-2, axis2=-1)

    def principal_curvatures(self):
        sym = (self.entries + np.swapaxes(self.entries, -1, -2)) / 2
        return np.linalg.eigvalsh(sym)


def _batched(chart, frames, u):
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if frames is None:
        frames = frames_at(chart, u)
    if single and frames.x.ndim == 1:
        frames = type(frames)(u, frames.x[None], frames.tangent[None], frames.normal[None])
    return u, single, frames


def _shape_matrix(frames, deriv):
    return -np.einsum("...ka,...kb->...ab", deriv, frames.tangent)


def shape_operator(chart, frames, eta, u, h: float = DEFAULT_FD_STEP) -> ShapeOperatorMatrix:
    """Matrix of ``S_eta`` in the tangent frame of ``frames`` (computed if None)."""
    u, single, frames = _batched(chart, frames, u)
    s = _shape_matrix(frames, frame_derivatives(chart, frames, eta, u, h))
    return ShapeOperatorMatrix(s[0] if single else s, eta.label)


def shape_operators(chart, frames, hints, u, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Stacked shape operators of all hint fields, (N, k, d, d)."""
    u, single, frames = _batched(chart, frames, u)
    s = np.stack(
        [_shape_matrix(frames, frame_derivatives(chart, frames, f, u, h)) for f in hints], axis=1
    )
    return s[0] if single else s


def normal_connection_defect(chart, frames, eta, u, h: float = DEFAULT_FD_STEP):
    """``max_a |(nabla_{E_a} eta)^perp|``: zero iff eta is parallel in the normal bundle."""
    u, single, frames = _batched(chart, frames, u)
    deriv = frame_derivatives(chart, frames, eta, u, h)
    x, e = frames.x, frames.tangent
    perp = (
        deriv
        - x[..., :, None] * np.einsum("...k,...ka->...a", x, deriv)[..., None, :]
        - e @ np.einsum("...kb,...ka->...ba", e, deriv)
    )
    out = np.max(np.linalg.norm(perp, axis=-2), axis=-1)
    return out[0] if single else out


def mean_curvature(chart, u) -> np.ndarray:
    """Mean curvature vector ``sum_a II(E_a, E_a)`` in R^8, (N, 8).

    Uses the analytic second derivatives: ``II(d_a, d_b)`` is the component
    of ``d_a d_b F`` normal to both the position and the tangent space.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    x, df, d2f = chart.jet(u, 2)
    g_inv = np.linalg.inv(np.einsum("nki,nkj->nij", df, df))
    trace = np.einsum("nkab,nab->nk", d2f, g_inv)
    frames = frames_at(chart, u)
    e = frames.tangent
    return (
        trace
        - x * np.sum(x * trace, axis=-1, keepdims=True)
        - np.einsum("nka,na->nk", e, np.einsum("nka,nk->na", e, trace))
    )


def gram_matrix(shapes: np.ndarray) -> np.ndarray:
    """``G_ij = tr(S_i S_j^T)`` from stacked shape operators (..., k, d, d)."""
    return np.einsum("...iab,...jab->...ij", shapes, shapes)


def commutator_norms(shapes: np.ndarray) -> np.ndarray:
    """Largest Frobenius norm of ``[S_i, S_j]`` over hint pairs, per node."""
    k = shapes.shape[-3]
    out = np.zeros(shapes.shape[:-3])
    for i in range(k):
        for j in range(i + 1, k):
            c = shapes[..., i, :, :] @ shapes[..., j, :, :] - shapes[..., j, :, :] @ shapes[..., i, :, :]
            out = np.maximum(out, np.linalg.norm(c, axis=(-2, -1)))
    return out


def jacobi_eigh(a, tol: float = DEFAULT_TOLERANCES.jacobi, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of symmetric matrices (batched).

    Sweeps visit ``(p, q)`` with ``p < q`` in lexicographic order; an
    element is rotated only while ``|a_pq|`` exceeds ``tol`` times the
    Frobenius norm of its matrix, so already-diagonal blocks of a degenerate
    spectrum are left alone.  Returns ``(w, v)`` with ascending eigenvalues
    and eigenvectors in the columns of ``v``.
    """
    a = np.array(a, dtype=float)
    shape = a.shape
    k = shape[-1]
    a = a.reshape(-1, k, k).copy()
    v = np.broadcast_to(np.eye(k), a.shape).copy()
    scale = np.linalg.norm(a, axis=(-2, -1))
    thresh = tol * np.where(scale > 0, scale, 1.0)
    for _ in range(max_sweeps):
        off = np.abs(a - np.einsum("nii->ni", a)[..., None] * np.eye(k))
        if not np.any(off > thresh[:, None, None]):
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[:, p, q]
                active = np.abs(apq) > thresh
                if not np.any(active):
                    continue
                safe = np.where(active, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1))
                t = np.where(theta == 0, 1.0, t)
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                c = np.where(active, c, 1.0)
                s = np.where(active, s, 0.0)
                ap = a[:, :, p].copy()
                aq = a[:, :, q].copy()
                a[:, :, p] = c[:, None] * ap - s[:, None] * aq
                a[:, :, q] = s[:, None] * ap + c[:, None] * aq
                rp = a[:, p, :].copy()
                rq = a[:, q, :].copy()
                a[:, p, :] = c[:, None] * rp - s[:, None] * rq
                a[:, q, :] = s[:, None] * rp + c[:, None] * rq
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = c[:, None] * vp - s[:, None] * vq
                v[:, :, q] = s[:, None] * vp + c[:, None] * vq
    else:
        raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.einsum("nii->ni", a)
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w.reshape(shape[:-1]), v.reshape(shape)


@dataclass(frozen=True)
class GramSpectrum:
    gram: np.ndarray
    sigma: np.ndarray
    vectors: np.ndarray
    labels: tuple = ()

    def multiplicities(self, tol: float = 1e-8) -> list:
        """Group sizes of (numerically) equal eigenvalues, ascending."""
        sig = np.asarray(self.sigma)
        if sig.ndim != 1:
            raise ValueError("multiplicities are defined for a single node")
        groups = [1]
        for a, b in zip(sig[:-1], sig[1:]):
            if abs(b - a) <= tol * max(1.0, abs(b)):
                groups[-1] += 1
            else:
                groups.append(1)
        return groups

    def to_json(self, node=None) -> dict:
        out = {
            "gram": np.asarray(self.gram).tolist(),
            "sigma": np.asarray(self.sigma).tolist(),
            "vectors": np.asarray(self.vectors).tolist(),
        }
        if node is not None:
            out = {"node": node, **out}
        return out


def spectrum_from_gram(gram, labels=(), tol: float = DEFAULT_TOLERANCES.jacobi) -> GramSpectrum:
    sigma, vectors = jacobi_eigh(gram, tol)
    return GramSpectrum(np.asarray(gram), sigma, vectors, tuple(labels))


def gram_spectrum(chart, frames, hints, u, h: float = DEFAULT_FD_STEP, tol: float = DEFAULT_TOLERANCES.jacobi) -> GramSpectrum:
    """Gram matrix of the hint shape operators at ``u`` and its Jacobi spectrum."""
    if len(hints) < 1:
        raise ValueError("at least one normal field is required")
    shapes = shape_operators(chart, frames, hints, u, h)
    return spectrum_from_gram(gram_matrix(shapes), [f.label for f in hints], tol)


class EigenCheck(NamedTuple):
    is_eigenvector: bool
    eigenvalue: float
    residual: float


def bstarb_eigencheck(spectrum: GramSpectrum, coeffs, tol: float = DEFAULT_TOLERANCES.eigencheck) -> EigenCheck:
    """Is ``coeffs`` (unit, over the normal frame) an eigenvector of the Gram matrix?

    The residual is ``|G c - (c^T G c) c|``.
    """
    c = np.asarray(coeffs, dtype=float)
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise ValueError("coefficient vector must be a unit vector")
    g = np.asarray(spectrum.gram)
    gc = g @ c
    lam = float(c @ gc)
    res = float(np.linalg.norm(gc - lam * c))
    return EigenCheck(res < tol, lam, res)


class ConstancyScan(NamedTuple):
    sigma_ref: np.ndarray
    sigma_spread: np.ndarray
    gram_spread: float
    nodes: int

    @property
    def spread(self) -> float:
        return float(np.max(self.sigma_spread)) if self.sigma_spread.size else 0.0

    def passed(self, tol: float = DEFAULT_TOLERANCES.constancy) -> bool:
        return self.spread < tol


def constancy_scan(chart, hints, u=None, workers: int = 1, h: float = DEFAULT_FD_STEP) -> ConstancyScan:
    """Spread of the Gram matrix and its eigenvalues over the grid.

    Tests constancy of the spectrum only; it says nothing about minimality.
    """
    if u is None:
        u = chart.nodes()
    u0 = u[:1]
    g0 = gram_matrix(shape_operators(chart, None, hints, u0, h))
    s0, _ = jacobi_eigh(g0)

    def block(ub):
        g = gram_matrix(shape_operators(chart, None, hints, ub, h))
        s, _ = jacobi_eigh(g)
        return (
            np.max(np.abs(s - s0), axis=0, keepdims=True),
            np.max(np.abs(g - g0), axis=(0, 1, 2))[None],
        )

    sig, gr = map_chunks(block, u, workers)
    return ConstancyScan(s0[0], np.max(sig, axis=0), float(np.max(gr)), int(u.shape[0]))
