"""Sampled search for an open hemisphere of S^6 containing a Gauss image.

A sampled scan can only show that no hemisphere among a finite candidate
set contains the sampled image, so verdicts are worded that way and the
report records the candidate budget and the generator that produced the
low-discrepancy candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc

from .charts import quadrature_weights
from .errors import RefusedError
from .parallel import map_chunks
from .tolerances import DEFAULT_TOLERANCES

GENERATOR = "scipy.stats.qmc.Halton(d=7, scramble=True)"
DEFAULT_BUDGET = 256
MAX_CODIMENSION = 5


@dataclass(frozen=True)
class HemisphereReport:
    entry: str
    normal_label: str
    samples: int
    candidates: int
    mean_norm: float
    mean_vector: np.ndarray
    best_margin: float
    best_direction: np.ndarray
    verdict: str
    generator: str = GENERATOR
    seed: int = 0
    candidate_budget: int = DEFAULT_BUDGET

    def consistent(self, tol: float = DEFAULT_TOLERANCES.hemisphere) -> bool:
        """True when no candidate hemisphere contains the sampled image."""
        return self.best_margin <= tol

    def to_json(self) -> dict:
        return {
            "entry": self.entry,
            "normal_label": self.normal_label,
            "samples": self.samples,
            "candidates": self.candidates,
            "mean_norm": self.mean_norm,
            "mean_vector": np.asarray(self.mean_vector).tolist(),
            "best_margin": self.best_margin,
            "best_direction": np.asarray(self.best_direction).tolist(),
            "verdict": self.verdict,
            "generator": self.generator,
            "seed": self.seed,
            "candidate_budget": self.candidate_budget,
        }


def _values(gamma, u, workers):
    f = gamma.values if hasattr(gamma, "values") else gamma
    return map_chunks(lambda ub: np.asarray(f(ub), dtype=float), u, workers)


def _check_compact(chart):
    if not chart.compact:
        raise RefusedError(f"chart {chart.name!r} does not cover a compact manifold")


def mean_zero_check(chart, gamma, workers: int = 1) -> float:
    """``|integral of gamma| / volume`` by the chart quadrature."""
    _check_compact(chart)
    u = chart.nodes()
    vals = _values(gamma, u, workers)
    w = map_chunks(lambda ub: quadrature_weights(chart, ub), u, workers)
    return float(np.linalg.norm(w @ vals) / np.sum(w))


def halton_directions(count: int, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy unit vectors in the imaginary octonions."""
    if count <= 0:
        return np.zeros((0, 8))
    pts = qmc.Halton(d=7, scramble=True, seed=seed).random(count)
    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    out = np.zeros((count, 8))
    out[:, 1:] = g / np.linalg.norm(g, axis=-1, keepdims=True)
    return out


def _unit_imaginary(v):
    v = np.array(v, dtype=float)
    v[..., 0] = 0.0
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    keep = n[..., 0] > 1e-12
    return v[keep] / n[keep]


def hemisphere_scan(
    chart,
    gamma,
    candidate_budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    k=None,
    *,
    entry: str = "",
    normal_label: str = "",
    workers: int = 1,
    tol: float = DEFAULT_TOLERANCES.hemisphere,
) -> HemisphereReport:
    """Best margin ``max_v min_x <gamma(x), v>`` over a candidate set.

    Candidates: the quadrature mean direction, up to ``candidate_budget``
    evenly strided sampled values of gamma and their negations, and
    ``candidate_budget`` Halton directions.  A margin above ``tol`` means
    the sampled image lies in the open hemisphere centred at the best
    direction.
    """
    if k is not None and not 1 <= k <= MAX_CODIMENSION:
        raise RefusedError(
            f"the hemisphere obstruction is only established for codimension 1..{MAX_CODIMENSION}, got k = {k}"
        )
    _check_compact(chart)
    u = chart.nodes()
    vals = _values(gamma, u, workers)
    w = map_chunks(lambda ub: quadrature_weights(chart, ub), u, workers)
    vol = float(np.sum(w))
    mean = (w @ vals) / vol
    n = vals.shape[0]
    take = np.unique(np.linspace(0, n - 1, min(candidate_budget, n)).round().astype(int))
    picked = vals[take]
    cand = np.concatenate(
        [
            _unit_imaginary(mean[None]),
            _unit_imaginary(picked),
            _unit_imaginary(-picked),
            halton_directions(candidate_budget, seed),
        ]
    )

    def block(vb):
        return np.min(vb @ cand.T, axis=0, keepdims=True)

    margins = np.min(map_chunks(block, vals, workers), axis=0)
    best = int(np.argmax(margins))
    margin = float(margins[best])
    verdict = "no open hemisphere among candidates" if margin <= tol else "contained in an open hemisphere"
    return HemisphereReport(
        entry or chart.name,
        normal_label,
        int(n),
        int(cand.shape[0]),
        float(np.linalg.norm(mean)),
        mean,
        margin,
        cand[best],
        verdict,
        GENERATOR,
        int(seed),
        int(candidate_budget),
    )
