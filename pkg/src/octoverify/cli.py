"""Command-line front end.

Exit status: 0 when no requested verdict failed, 1 on a failed verdict,
2 on a usage or spec error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import runner
from .catalog import SHIPPED, build_chart, default_grid, effective_grid, format_spec, parse_spec
from .errors import SpecError
from .gauss import GaussMapField, eigen_normal
from .hemisphere import DEFAULT_BUDGET
from .tolerances import DEFAULT_TOLERANCES


class UsageError(Exception):
    pass


def _grid(text: str):
    try:
        counts = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be N or N,N,...; got {text!r}") from None
    return counts[0] if len(counts) == 1 else tuple(counts)


def _tolerance(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance value must be a number, got {value!r}") from None


def _checks(text: str):
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    if names == ("all",):
        return runner.CHECKS
    unknown = [n for n in names if n not in runner.CHECKS]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown check(s) {', '.join(unknown)}; choose from {', '.join(runner.CHECKS)}"
        )
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_grid, default=None, help="nodes per axis, N or N,N,... (default 24/12/8 by dimension, capped at 2e5 nodes)")
    common.add_argument("--fd-step", type=float, default=1e-3, help="finite-difference step h (default 1e-3)")
    common.add_argument(
        "--tolerance",
        type=_tolerance,
        action="append",
        default=[],
        metavar="NAME=VAL",
        help="override a named tolerance; repeatable (names: " + ", ".join(DEFAULT_TOLERANCES.as_dict()) + ")",
    )
    common.add_argument("--out", default=None, help="write JSON (or CSV with --format csv) to this path")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format for --out (default json)")
    common.add_argument("--workers", type=int, default=None, help="worker threads (default: $OCTOVERIFY_WORKERS or 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for random directions and candidate generators (default 0)")

    parser = argparse.ArgumentParser(prog="octoverify", description="Octonionic Gauss map verification on minimal submanifolds of S^7.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", parents=[common], help="list shipped manifold specs")

    p = sub.add_parser("verify", parents=[common], help="run checks on one manifold")
    p.add_argument("--manifold", required=True, help="spec such as great:6, product:3,3 or compose:great:3/product:1,1")
    p.add_argument("--checks", type=_checks, default=runner.CHECKS, help="comma-separated subset of: " + ", ".join(runner.CHECKS))

    p = sub.add_parser("spectrum", parents=[common], help="Gram spectrum of the shape operators")
    p.add_argument("--manifold", required=True)

    p = sub.add_parser("gauss-image", parents=[common], help="dump Gauss map samples")
    p.add_argument("--manifold", required=True)
    p.add_argument("--normal", type=int, default=1, help="eigen-direction index j, 1-based (default 1)")

    p = sub.add_parser("hemisphere", parents=[common], help="hemisphere scan of every eigen-direction")
    p.add_argument("--manifold", required=True)
    p.add_argument("--candidates", type=int, default=DEFAULT_BUDGET, help=f"candidate budget (default {DEFAULT_BUDGET})")

    p = sub.add_parser("suite", parents=[common], help="every shipped entry with every check")
    p.add_argument("--checks", type=_checks, default=runner.CHECKS)
    return parser


def _config(args, checks, **extra) -> runner.RunConfig:
    return runner.RunConfig(
        args.manifold,
        grid=args.grid,
        fd_step=args.fd_step,
        tolerances=dict(args.tolerance),
        checks=tuple(checks),
        seed=args.seed,
        workers=args.workers,
        **extra,
    )


def _write(args, text: str, stdout):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _table(rows, header, stdout):
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    for r in [header] + rows:
        stdout.write("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _fmt(v):
    return f"{v:.3e}" if isinstance(v, float) else str(v)


def _verdict_rows(report):
    rows = []
    for c in report["checks"]:
        rows.append([report["entry"]["spec"], c["name"], c["verdict"], c["reason"]])
    return rows


def _exit_code(reports) -> int:
    for rep in reports:
        if any(c["verdict"] == "fail" for c in rep["checks"]):
            return 1
    return 0


def cmd_catalog(args, stdout):
    rows = []
    data = []
    for s in SHIPPED:
        spec = parse_spec(s)
        if spec.kind == "product":
            radii = list(spec.unit_radii)
        elif spec.inner is not None:
            radii = list(spec.inner.unit_radii)
        else:
            radii = [1.0]
        grid = effective_grid(default_grid(spec.d), spec.d)
        data.append({"spec": s, "kind": spec.kind, "d": spec.d, "k": spec.k, "radii": radii, "grid": list(grid)})
        rows.append([s, spec.d, spec.k, ",".join(f"{r:.6f}" for r in radii), "x".join(map(str, grid))])
    if args.out:
        _write(args, json.dumps(data, indent=2) + "\n", stdout)
    _table(rows, ["spec", "d", "k", "radii", "grid"], stdout)
    return 0


def cmd_verify(args, stdout):
    cfg = _config(args, args.checks, csv=args.out if args.format == "csv" else None)
    report = runner.run(cfg)
    if args.out and args.format == "json":
        _write(args, runner.dumps(report), stdout)
    _table(_verdict_rows(report), ["entry", "check", "verdict", "reason"], stdout)
    if report["lambda_table"]:
        rows = [[r["j"], _fmt(r["sigma"]), _fmt(r["lambda"]), _fmt(r["residual_l2"]), r["eigenmap"]] for r in report["lambda_table"]]
        stdout.write("\n")
        _table(rows, ["j", "sigma", "lambda", "residual_l2", "eigenmap"], stdout)
    return _exit_code([report])


def cmd_spectrum(args, stdout):
    report = runner.run(_config(args, ("isoparametric",)))
    spec = report["spectrum"]
    if args.out:
        _write(args, json.dumps(spec, indent=2) + "\n", stdout)
    stdout.write(f"{report['entry']['spec']}  k={report['entry']['k']}  nodes={report['entry']['nodes']}\n")
    rows = [[lab, _fmt(s)] for lab, s in zip(spec["labels"], spec["sigma"])]
    _table(rows, ["hint", "sigma"], stdout)
    stdout.write(f"multiplicities {spec['multiplicities']}  constancy spread {spec['constancy_spread']:.3e}\n")
    return _exit_code([report])


def cmd_gauss_image(args, stdout):
    report = runner.run(_config(args, ("isoparametric",)))
    spec = parse_spec(args.manifold)
    chart, hints = build_chart(spec, args.grid)
    vectors = np.array(report["spectrum"]["vectors"])
    j = args.normal - 1
    if not 0 <= j < vectors.shape[1]:
        raise UsageError(f"--normal must be in 1..{vectors.shape[1]}")
    eta = eigen_normal(hints, vectors[:, j], label=f"eta{args.normal}")
    u = chart.nodes()
    gamma = GaussMapField(chart, eta).values(u)
    cols = [f"u{i}" for i in range(chart.dim)] + [f"g{c}" for c in range(8)]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(cols)
        for a, g in zip(u, gamma):
            w.writerow([repr(float(t)) for t in a] + [repr(float(t)) for t in g])
        _write(args, buf.getvalue(), stdout)
    else:
        data = {"entry": format_spec(spec), "normal": eta.label, "columns": cols, "rows": np.hstack([u, gamma]).tolist()}
        _write(args, json.dumps(data) + "\n", stdout)
    return 0


def cmd_hemisphere(args, stdout):
    report = runner.run(_config(args, ("hemisphere",), candidate_budget=args.candidates))
    if args.out:
        _write(args, json.dumps(report["hemisphere"], indent=2) + "\n", stdout)
    _table(_verdict_rows(report), ["entry", "check", "verdict", "reason"], stdout)
    if report["hemisphere"]:
        rows = [[r["normal_label"], r["samples"], r["candidates"], _fmt(r["best_margin"]), _fmt(r["mean_zero"]), r["verdict"]] for r in report["hemisphere"]]
        _table(rows, ["normal", "samples", "candidates", "best_margin", "mean_zero", "verdict"], stdout)
    return _exit_code([report])


def cmd_suite(args, stdout):
    result = runner.run_suite(
        grid=args.grid,
        fd_step=args.fd_step,
        tolerances=dict(args.tolerance),
        seed=args.seed,
        workers=args.workers,
        checks=args.checks,
    )
    if args.out:
        _write(args, runner.dumps(result), stdout)
    rows = []
    for rep in result["suite"]:
        rows += _verdict_rows(rep)
    _table(rows, ["entry", "check", "verdict", "reason"], stdout)
    stdout.write("summary " + json.dumps(result["summary"]) + "\n")
    return _exit_code(result["suite"])


COMMANDS = {
    "catalog": cmd_catalog,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "gauss-image": cmd_gauss_image,
    "hemisphere": cmd_hemisphere,
    "suite": cmd_suite,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers is not None and args.workers < 1:
        stderr.write("octoverify: --workers must be >= 1\n")
        return 2
    try:
        return COMMANDS[args.command](args, stdout)
    except SpecError as exc:
        stderr.write(f"octoverify: invalid manifold spec: {exc}\n")
        return 2
    except (UsageError, KeyError, ValueError) as exc:
        stderr.write(f"octoverify: {exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
