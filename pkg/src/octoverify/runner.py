"""Verification pipeline for one catalog entry, and the JSON report it produces.

Checks form a small dependency graph; a check whose prerequisite did not
pass is reported as skipped with the reason.  Numerical failures inside a
check are captured as a failed verdict and never abort the run.  Reports
are deterministic: everything that depends on the machine (worker count,
wall-clock times) lives under the ``timings`` key.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from . import algebra
from .catalog import SHIPPED, build_chart, effective_grid, format_spec, in_sphere_normal, parse_spec
from .charts import DEFAULT_FD_STEP, frames_at, quadrature_weights
from .errors import RefusedError, SpectrumNotConstantError
from .gauss import (
    GaussMapField,
    eigen_normal,
    eigenmap_residual,
    laplacian_on_nodes,
    lemma_residual,
    random_imaginary_directions,
    reorder_hints,
)
from .hemisphere import DEFAULT_BUDGET, hemisphere_scan, mean_zero_check
from .parallel import default_workers, map_chunks
from .spectra import (
    ConstancyScan,
    commutator_norms,
    gram_matrix,
    jacobi_eigh,
    mean_curvature,
    normal_connection_defect,
    shape_operator,
    shape_operators,
    spectrum_from_gram,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "CHECKS",
    "DEPENDS",
    "RunConfig",
    "CheckResult",
    "run",
    "run_suite",
    "parse_spec",
    "report_schema",
    "validate_report",
    "strip_timings",
    "dumps",
]

SCHEMA_VERSION = 1
CHECKS = (
    "algebra",
    "minimality",
    "parallelism",
    "isoparametric",
    "lemma",
    "theorem1",
    "theorem2",
    "corollary",
    "hemisphere",
)
DEPENDS = {
    "algebra": (),
    "minimality": (),
    "parallelism": (),
    "isoparametric": (),
    "lemma": ("minimality", "parallelism"),
    "theorem1": ("minimality", "parallelism"),
    "theorem2": ("minimality", "isoparametric"),
    "corollary": ("minimality",),
    "hemisphere": ("theorem2",),
}
HEMISPHERE_GRID = 16
MIN_GRID = 8


@dataclass(frozen=True)
class RunConfig:
    """Settings for one verification run.

    ``grid`` is a per-axis count or a sequence of counts (None: the default
    for the dimension); it is coarsened to the node cap before use.
    ``tolerances`` holds overrides by name.
    """

    spec: str
    grid: object = None
    fd_step: float = DEFAULT_FD_STEP
    tolerances: dict = field(default_factory=dict)
    checks: tuple = CHECKS
    seed: int = 0
    workers: Optional[int] = None
    lemma_directions: int = 20
    lemma_nodes: int = 4096
    candidate_budget: int = DEFAULT_BUDGET
    out: Optional[str] = None
    csv: Optional[str] = None

    def __post_init__(self):
        checks = tuple(self.checks)
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise ValueError(f"unknown check name(s): {', '.join(unknown)}; known: {', '.join(CHECKS)}")
        # canonical order, each check once
        object.__setattr__(self, "checks", tuple(c for c in CHECKS if c in checks))
        if self.grid is not None:
            counts = [self.grid] if np.isscalar(self.grid) else list(self.grid)
            if not counts or any(int(c) < MIN_GRID for c in counts):
                raise ValueError(f"grid resolution must be >= {MIN_GRID} per axis, got {self.grid}")
        if not 1e-6 <= self.fd_step <= 1e-1:
            raise ValueError(f"fd_step must lie in [1e-6, 1e-1], got {self.fd_step}")
        self.tolerance_set()
        if self.lemma_directions < 1 or self.lemma_nodes < 1 or self.candidate_budget < 1:
            raise ValueError("lemma_directions, lemma_nodes and candidate_budget must be positive")

    def tolerance_set(self) -> Tolerances:
        return DEFAULT_TOLERANCES.override(**dict(self.tolerances))

    def to_json(self) -> dict:
        grid = self.grid
        if grid is not None and not np.isscalar(grid):
            grid = [int(c) for c in grid]
        return {
            "spec": self.spec,
            "grid": grid,
            "fd_step": self.fd_step,
            "tolerances": self.tolerance_set().as_dict(),
            "checks": list(self.checks),
            "seed": self.seed,
            "lemma_directions": self.lemma_directions,
            "lemma_nodes": self.lemma_nodes,
            "candidate_budget": self.candidate_budget,
        }


@dataclass
class CheckResult:
    name: str
    verdict: str
    reason: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "reason": self.reason, "stats": self.stats}


def _stats(values, weights=None) -> dict:
    values = np.asarray(values, dtype=float)
    out = {"max": float(np.max(values)) if values.size else 0.0, "nodes": int(values.shape[0])}
    if weights is not None and values.size:
        out["l2"] = float(math.sqrt(np.sum(weights * values**2) / np.sum(weights)))
    return out


class _Context:
    """Lazily computed per-entry data shared between checks."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.tol = config.tolerance_set()
        self.workers = config.workers if config.workers is not None else default_workers()
        self.spec = parse_spec(config.spec)
        self.chart, self.hints = build_chart(self.spec, config.grid)
        self.h = config.fd_step
        self.u = self.chart.nodes()
        self._cache = {}
        self.per_node = {}

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def k(self) -> int:
        return len(self.hints)

    @property
    def weights(self):
        return self.cached("weights", lambda: map_chunks(lambda ub: quadrature_weights(self.chart, ub), self.u, self.workers))

    @property
    def geometry(self):
        """Per-node mean curvature, hint defects, shape operators, connection defects."""

        def compute():
            chart, hints, h = self.chart, list(self.hints), self.h

            def block(ub):
                x, df, _ = chart.jet(ub, 1)
                frames = frames_at(chart, ub)
                vals = np.stack([f.value(x) for f in hints], axis=1)
                pre = np.max(
                    np.concatenate(
                        [
                            np.abs(np.linalg.norm(vals, axis=-1) - 1.0),
                            np.abs(np.einsum("nkc,nc->nk", vals, x)),
                            np.max(np.abs(np.einsum("nkc,nci->nki", vals, df)), axis=-1),
                        ],
                        axis=1,
                    ),
                    axis=1,
                )
                hn = np.linalg.norm(mean_curvature(chart, ub), axis=-1)
                shapes = shape_operators(chart, frames, hints, ub, h)
                conn = np.stack([normal_connection_defect(chart, frames, f, ub, h) for f in hints], axis=1)
                return hn, pre, shapes, conn

            hn, pre, shapes, conn = map_chunks(block, self.u, self.workers)
            return {"mean_curvature": hn, "hint_defect": pre, "shapes": shapes, "connection": conn}

        return self.cached("geometry", compute)

    @property
    def gram(self):
        return self.cached("gram", lambda: gram_matrix(self.geometry["shapes"]))

    @property
    def spectrum(self):
        return self.cached("spectrum", lambda: spectrum_from_gram(self.gram[0], self.hints.labels, self.tol.jacobi))

    @property
    def constancy(self) -> ConstancyScan:
        def compute():
            gram = self.gram
            sigma, _ = jacobi_eigh(gram, self.tol.jacobi)
            spread = np.max(np.abs(sigma - sigma[:1]), axis=0)
            gspread = float(np.max(np.abs(gram - gram[:1])))
            return ConstancyScan(sigma[0], spread, gspread, int(gram.shape[0]))

        return self.cached("constancy", compute)

    def laplacian(self, coeffs):
        """``(gamma, Laplacian gamma, weights)`` for the normal sum c_i hint_i, cached."""
        coeffs = np.asarray(coeffs, dtype=float)
        key = ("lap", coeffs.tobytes())

        def compute():
            eta = eigen_normal(self.hints, coeffs)
            return laplacian_on_nodes(self.chart, eta, self.u, self.h, self.workers)

        return self.cached(key, compute)


# -- checks ----------------------------------------------------------------------


def _check_algebra(ctx: _Context) -> CheckResult:
    rng = np.random.default_rng(ctx.config.seed)
    x = rng.normal(size=(10_000, 8))
    y = rng.normal(size=(10_000, 8))
    mul = algebra.octonion_mul
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    xx = mul(x, x)
    xy = mul(x, y)
    yx = mul(y, x)
    errs = {
        "norm_multiplicativity": np.abs(np.linalg.norm(xy, axis=-1) - nx * ny) / (nx * ny),
        "left_alternative": np.linalg.norm(mul(xx, y) - mul(x, xy), axis=-1) / (nx * nx * ny),
        "right_alternative": np.linalg.norm(mul(yx, x) - mul(y, xx), axis=-1) / (nx * nx * ny),
        "left_inverse": np.linalg.norm(mul(algebra.cd_inv(x), xy) - y, axis=-1) / ny,
        "right_inverse": np.linalg.norm(mul(yx, algebra.cd_inv(x)) - y, axis=-1) / ny,
        "conjugate_antiautomorphism": np.linalg.norm(
            algebra.cd_conj(xy) - mul(algebra.cd_conj(y), algebra.cd_conj(x)), axis=-1
        )
        / (nx * ny),
    }
    a, b = algebra.sedenion_zero_divisor()
    witness = float(np.linalg.norm(algebra.cd_mul(a, b)))
    stats = {name: float(np.max(e)) for name, e in errs.items()}
    stats["samples"] = int(x.shape[0])
    stats["sedenion_witness"] = {"a": a.tolist(), "b": b.tolist(), "product_norm": witness}
    bad = [n for n, e in errs.items() if np.max(e) >= ctx.tol.algebra]
    if witness >= ctx.tol.algebra:
        bad.append("sedenion zero-divisor witness")
    if bad:
        return CheckResult("algebra", "fail", "identity residual above tolerance: " + ", ".join(bad), stats)
    return CheckResult("algebra", "pass", "", stats)


def _check_minimality(ctx: _Context) -> CheckResult:
    geo = ctx.geometry
    w = ctx.weights
    traces = np.abs(np.trace(geo["shapes"], axis1=-2, axis2=-1))
    ctx.per_node["mean_curvature"] = geo["mean_curvature"]
    stats = {
        "mean_curvature": _stats(geo["mean_curvature"], w),
        "shape_trace": _stats(np.max(traces, axis=1), w),
        "hint_defect": _stats(geo["hint_defect"], w),
    }
    if stats["hint_defect"]["max"] >= ctx.tol.tangency:
        return CheckResult("minimality", "fail", "normal hints are not unit normal fields", stats)
    if stats["mean_curvature"]["max"] >= ctx.tol.minimality or stats["shape_trace"]["max"] >= ctx.tol.minimality:
        return CheckResult("minimality", "fail", "mean curvature vector does not vanish", stats)
    return CheckResult("minimality", "pass", "", stats)


def _check_parallelism(ctx: _Context) -> CheckResult:
    conn = ctx.geometry["connection"]
    w = ctx.weights
    stats = {"per_hint": {lab: _stats(conn[:, j], w) for j, lab in enumerate(ctx.hints.labels)}}
    bad = [lab for j, lab in enumerate(ctx.hints.labels) if np.max(conn[:, j]) >= ctx.tol.parallel]
    if bad:
        return CheckResult("parallelism", "fail", "normal connection derivative nonzero for " + ", ".join(bad), stats)
    return CheckResult("parallelism", "pass", "", stats)


def _check_isoparametric(ctx: _Context) -> CheckResult:
    shapes = ctx.geometry["shapes"]
    w = ctx.weights
    sym = (shapes + np.swapaxes(shapes, -1, -2)) / 2
    curv = np.linalg.eigvalsh(sym)
    curv_spread = np.max(np.abs(curv - curv[:1]), axis=(1, 2))
    asym = np.max(np.abs(shapes - np.swapaxes(shapes, -1, -2)), axis=(1, 2, 3))
    comm = commutator_norms(shapes)
    scan = ctx.constancy
    stats = {
        "principal_curvatures": curv[0].tolist(),
        "principal_curvature_spread": _stats(curv_spread, w),
        "shape_asymmetry": _stats(asym, w),
        "commutator": _stats(comm, w),
        "sigma": scan.sigma_ref.tolist(),
        "sigma_spread": scan.spread,
        "gram_spread": scan.gram_spread,
    }
    fails = []
    if stats["principal_curvature_spread"]["max"] >= ctx.tol.curvature_spread:
        fails.append("principal curvatures vary over the grid")
    if scan.spread >= ctx.tol.curvature_spread or scan.gram_spread >= ctx.tol.curvature_spread:
        fails.append("Gram spectrum varies over the grid")
    if stats["commutator"]["max"] >= ctx.tol.commutator:
        fails.append("shape operators do not commute (normal bundle not flat)")
    if stats["shape_asymmetry"]["max"] >= ctx.tol.symmetry:
        fails.append("shape operators are not symmetric")
    if fails:
        return CheckResult("isoparametric", "fail", "; ".join(fails), stats)
    return CheckResult("isoparametric", "pass", "", stats)


def _check_lemma(ctx: _Context) -> CheckResult:
    cfg = ctx.config
    n = ctx.u.shape[0]
    idx = np.unique(np.linspace(0, n - 1, min(cfg.lemma_nodes, n)).round().astype(int))
    us = ctx.u[idx]
    vs = random_imaginary_directions(cfg.lemma_directions, cfg.seed)
    rows = {}
    worst = 0.0
    for j, lab in enumerate(ctx.hints.labels):
        hints = reorder_hints(ctx.hints, j)
        res = map_chunks(lambda ub: lemma_residual(ctx.chart, None, hints, vs, ub, ctx.h), us, ctx.workers)
        rows[lab] = {"max": float(np.max(res)), "nodes": int(us.shape[0]), "directions": int(vs.shape[0])}
        worst = max(worst, float(np.max(res)))
    stats = {"per_hint": rows, "max": worst}
    if worst >= ctx.tol.lemma:
        return CheckResult("lemma", "fail", "Laplacian of <gamma, v> does not match the shape-operator formula", stats)
    return CheckResult("lemma", "pass", "", stats)


def _equivalence_row(ctx: _Context, coeffs, label: str) -> dict:
    c = np.asarray(coeffs, dtype=float)
    gram = ctx.gram
    gc = gram @ c
    lam_n = gc @ c
    eig_res = np.linalg.norm(gc - lam_n[:, None] * c, axis=-1)
    s2 = float(c @ ctx.gram[0] @ c)
    lam = 7 - ctx.k + s2
    data = ctx.laplacian(c)
    verdict = eigenmap_residual(
        ctx.chart, eigen_normal(ctx.hints, c, label), lam, sigma=s2, u=ctx.u, h=ctx.h, tol=ctx.tol.eigenmap, data=data
    )
    harmonic = verdict.tangency_defect
    flags = [
        bool(np.max(eig_res) < ctx.tol.eigencheck),
        bool(verdict.passed),
        bool(harmonic < ctx.tol.harmonic),
    ]
    return {
        "label": label,
        "coefficients": c.tolist(),
        "eigencheck_residual": float(np.max(eig_res)),
        "s_norm2": s2,
        "lambda": lam,
        "eigenmap_residual_l2": verdict.residual_l2,
        "harmonicity_defect_max": harmonic,
        "eigencheck": flags[0],
        "eigenmap": flags[1],
        "harmonic": flags[2],
        "consistent": len(set(flags)) == 1,
    }


def _check_theorem1(ctx: _Context) -> CheckResult:
    rows = [_equivalence_row(ctx, e, lab) for e, lab in zip(np.eye(ctx.k), ctx.hints.labels)]
    stats = {"hints": rows}
    fails = [r["label"] for r in rows if not r["consistent"]]
    spec = ctx.spectrum
    sigma = np.asarray(spec.sigma)
    if sigma[-1] - sigma[0] > ctx.tol.sigma_match:
        c = (spec.vectors[:, 0] + spec.vectors[:, -1]) / math.sqrt(2)
        row = _equivalence_row(ctx, c, "mixture45")
        row["sigma_pair"] = [float(sigma[0]), float(sigma[-1])]
        stats["negative_control"] = row
        if row["eigencheck"] or row["eigenmap"] or row["harmonic"]:
            fails.append("45-degree mixture of distinct eigen-directions")
    if fails:
        return CheckResult("theorem1", "fail", "equivalence broken for " + ", ".join(fails), stats)
    return CheckResult("theorem1", "pass", "", stats)


def _lambda_table(ctx: _Context) -> list:
    def compute():
        scan = ctx.constancy
        if not scan.passed(ctx.tol.constancy):
            raise SpectrumNotConstantError(
                f"Gram spectrum varies over the grid (spread {scan.spread:.3e}); eigen-directions are not globally defined"
            )
        spec = ctx.spectrum
        u0 = ctx.u[:1]
        frames0 = frames_at(ctx.chart, u0)
        rows = []
        for j in range(ctx.k):
            c = np.asarray(spec.vectors)[:, j]
            sigma = float(np.asarray(spec.sigma)[j])
            lam = 7 - ctx.k + sigma
            eta = eigen_normal(ctx.hints, c, label=f"eta{j + 1}")
            data = ctx.laplacian(c)
            v = eigenmap_residual(
                ctx.chart, eta, lam, sigma=sigma, u=ctx.u, h=ctx.h, tol=ctx.tol.eigenmap, data=data
            )
            gamma, lap, _ = data
            ctx.per_node[f"eigenmap_residual_eta{j + 1}"] = np.linalg.norm(lap + lam * gamma, axis=-1) / lam
            s = shape_operator(ctx.chart, frames0, eta, u0, ctx.h).entries[0]
            s2 = float(np.sum(s * s))
            rows.append(
                {
                    "j": j + 1,
                    "sigma": sigma,
                    "lambda": lam,
                    "s_norm2": s2,
                    "coefficients": c.tolist(),
                    "residual_l2": v.residual_l2,
                    "residual_max": v.residual_max,
                    "component_residual_max": max(v.component_residuals),
                    "tangency_defect": v.tangency_defect,
                    "nodes": v.nodes,
                    "eigenmap": v.passed,
                    "sigma_match": abs(s2 - sigma) < ctx.tol.sigma_match,
                }
            )
        return rows

    return ctx.cached("lambda_table", compute)


def _check_theorem2(ctx: _Context) -> CheckResult:
    rows = _lambda_table(ctx)
    stats = {
        "rows": len(rows),
        "residual_l2_max": max(r["residual_l2"] for r in rows),
        "residual_max": max(r["residual_max"] for r in rows),
    }
    bad = [f"eta{r['j']}" for r in rows if not (r["eigenmap"] and r["sigma_match"])]
    if bad:
        return CheckResult("theorem2", "fail", "eigenmap or sigma check failed for " + ", ".join(bad), stats)
    return CheckResult("theorem2", "pass", "", stats)


def _check_corollary(ctx: _Context) -> CheckResult:
    normal = in_sphere_normal(ctx.spec, ctx.hints)
    if normal is None:
        raise RefusedError("entry is not a hypersurface of a totally geodesic sphere")
    j = ctx.hints.labels.index(normal.label)
    gamma, lap, w = ctx.laplacian(np.eye(ctx.k)[j])
    along = np.sum(lap * gamma, axis=-1, keepdims=True)
    defect = np.linalg.norm(lap - along * gamma, axis=-1)
    ctx.per_node["harmonicity_defect_" + normal.label] = defect
    stats = {"normal": normal.label, "harmonicity_defect": _stats(defect, w)}
    if np.max(defect) >= ctx.tol.harmonic:
        return CheckResult("corollary", "fail", "Gauss map of the in-sphere normal is not harmonic", stats)
    return CheckResult("corollary", "pass", "", stats)


def _hemisphere_reports(ctx: _Context) -> list:
    def compute():
        if ctx.k > 5:
            raise RefusedError(f"codimension {ctx.k} is outside the range 1..5 of the hemisphere obstruction")
        rows = _lambda_table(ctx)
        grid = tuple(max(c, HEMISPHERE_GRID) for c in ctx.chart.grid)
        chart, hints = build_chart(ctx.spec, effective_grid(grid, ctx.spec.d))
        out = []
        for r in rows:
            eta = eigen_normal(hints, r["coefficients"], label=f"eta{r['j']}")
            gamma = GaussMapField(chart, eta, eta.label)
            rep = hemisphere_scan(
                chart,
                gamma,
                ctx.config.candidate_budget,
                ctx.config.seed,
                ctx.k,
                entry=format_spec(ctx.spec),
                normal_label=eta.label,
                workers=ctx.workers,
                tol=ctx.tol.hemisphere,
            )
            item = rep.to_json()
            item["grid"] = list(chart.grid)
            item["mean_zero"] = mean_zero_check(chart, gamma, ctx.workers)
            out.append(item)
        return out

    return ctx.cached("hemisphere", compute)


def _check_hemisphere(ctx: _Context) -> CheckResult:
    reps = _hemisphere_reports(ctx)
    stats = {
        "best_margin_max": max(r["best_margin"] for r in reps),
        "mean_zero_max": max(r["mean_zero"] for r in reps),
        "samples": reps[0]["samples"],
    }
    fails = []
    if stats["best_margin_max"] > ctx.tol.hemisphere:
        fails.append("a candidate open hemisphere contains the sampled Gauss image")
    if stats["mean_zero_max"] >= ctx.tol.mean_zero:
        fails.append("Gauss image has nonzero mean")
    if fails:
        return CheckResult("hemisphere", "fail", "; ".join(fails), stats)
    return CheckResult("hemisphere", "pass", "", stats)


_IMPL = {
    "algebra": _check_algebra,
    "minimality": _check_minimality,
    "parallelism": _check_parallelism,
    "isoparametric": _check_isoparametric,
    "lemma": _check_lemma,
    "theorem1": _check_theorem1,
    "theorem2": _check_theorem2,
    "corollary": _check_corollary,
    "hemisphere": _check_hemisphere,
}


def _evaluate(ctx: _Context, name: str, results: dict, timings: dict) -> CheckResult:
    if name in results:
        return results[name]
    for dep in DEPENDS[name]:
        r = _evaluate(ctx, dep, results, timings)
        if not r.passed:
            results[name] = CheckResult(name, "skipped", f"{dep} precondition {'failed' if r.verdict == 'fail' else r.verdict}")
            return results[name]
    t0 = time.perf_counter()
    try:
        res = _IMPL[name](ctx)
    except (RefusedError, SpectrumNotConstantError) as exc:
        res = CheckResult(name, "refused", str(exc))
    except Exception as exc:  # crash isolation: report, keep going
        res = CheckResult(name, "fail", f"{type(exc).__name__}: {exc}")
    timings[name] = time.perf_counter() - t0
    results[name] = res
    return res


def _spectrum_json(ctx: _Context) -> dict:
    spec = ctx.spectrum
    scan = ctx.constancy
    out = spec.to_json(node=0)
    out["labels"] = list(ctx.hints.labels)
    out["multiplicities"] = spec.multiplicities(ctx.tol.sigma_match)
    out["constancy_spread"] = scan.spread
    out["gram_spread"] = scan.gram_spread
    return out


def run(config: RunConfig) -> dict:
    """Run the requested checks on one manifold and return the report dict."""
    t0 = time.perf_counter()
    ctx = _Context(config)
    results, timings = {}, {}
    for name in config.checks:
        _evaluate(ctx, name, results, timings)
    spec = ctx.spec
    report = {
        "schema": SCHEMA_VERSION,
        "config": config.to_json(),
        "entry": {
            "spec": format_spec(spec),
            "kind": spec.kind,
            "d": spec.d,
            "k": spec.k,
            "minimal": bool(spec.minimal),
            "grid": [int(c) for c in ctx.chart.grid],
            "nodes": int(ctx.u.shape[0]),
            "hints": list(ctx.hints.labels),
        },
        "checks": [results[name].to_json() for name in config.checks],
        "spectrum": None,
        "lambda_table": ctx._cache.get("lambda_table"),
        "hemisphere": ctx._cache.get("hemisphere"),
    }
    if "geometry" in ctx._cache:
        report["spectrum"] = _spectrum_json(ctx)
    report["timings"] = {
        "workers": ctx.workers,
        "checks": timings,
        "total": time.perf_counter() - t0,
    }
    report = _clean(report)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(dumps(report))
    if config.csv:
        with open(config.csv, "w", newline="") as fh:
            write_residual_csv(ctx, fh)
    return report


def write_residual_csv(ctx: _Context, stream):
    """Per-node residual sidecar: node index, chart coordinates, residual columns."""
    names = list(ctx.per_node)
    writer = csv.writer(stream)
    writer.writerow(["node"] + [f"u{i}" for i in range(ctx.chart.dim)] + names)
    cols = [ctx.per_node[n] for n in names]
    for i, u in enumerate(ctx.u):
        writer.writerow([i] + [repr(float(a)) for a in u] + [repr(float(c[i])) for c in cols])


def run_suite(
    specs=SHIPPED,
    grid=None,
    fd_step: float = DEFAULT_FD_STEP,
    tolerances=None,
    seed: int = 0,
    workers: Optional[int] = None,
    checks=CHECKS,
    candidate_budget: int = DEFAULT_BUDGET,
) -> dict:
    """Every shipped entry with every check, as one report."""
    t0 = time.perf_counter()
    reports = []
    for s in specs:
        cfg = RunConfig(
            s,
            grid=grid,
            fd_step=fd_step,
            tolerances=dict(tolerances or {}),
            checks=tuple(checks),
            seed=seed,
            workers=workers,
            candidate_budget=candidate_budget,
        )
        reports.append(run(cfg))
    summary = {}
    for rep in reports:
        for c in rep["checks"]:
            summary[c["verdict"]] = summary.get(c["verdict"], 0) + 1
    return {
        "schema": SCHEMA_VERSION,
        "suite": reports,
        "summary": dict(sorted(summary.items())),
        "timings": {"total": time.perf_counter() - t0},
    }


# -- serialization ---------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2) + "\n"


def strip_timings(obj):
    """Copy of a report with every ``timings`` entry removed."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k != "timings"}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


def report_schema() -> dict:
    return json.loads(resources.files("octoverify").joinpath("report.schema.json").read_text())


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the report does not match the schema."""
    import jsonschema

    jsonschema.validate(_clean(report), report_schema())
