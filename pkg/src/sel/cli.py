"""Command-line laboratory: solve, sweep, spectrum, regularity.

Subcommands
    solve       one instance; writes report.json + solution.csv
    sweep       (alpha, beta) table of exponents and verdicts; writes CSV
    spectrum    lambda_1 / mu_1 per refinement level + stability verdict
    regularity  full regularity report over a refinement ladder

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence.
Everything is deterministic: identical flags give byte-identical
report/CSV files.  A manifest.json with versions and a timestamp is
written next to each report; the timestamp lives only there.
SEL_THREADS caps the sweep worker pool.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import (
    WindowTooThinError,
    asymptotic_window,
    default_window,
    fit_boundary_exponent,
    fit_gradient_exponent,
    gradient_field,
    q_bar_theory,
    regularity_report,
    sobolev_integral,
)
from .barriers import build_barrier_pair
from .grid import Grid, assemble_laplacian, interval, rectangle
from .monotone import residual, solve_monotone, uniqueness_gap
from .oracle import DENSE_N_CAP, dense_newton_solve
from .problem import ProblemSpec, SolveConfig
from .regularized import NewtonStagnationError, solve_regularized
from .spectral import linearized_smallest_eigenvalue, principal_eigenpair

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_CONVERGENCE = 2


class _Parser(argparse.ArgumentParser):
    # Usage problems are invalid input, exit code 1 (argparse defaults to 2,
    # which is reserved for non-convergence here).
    def error(self, message):
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(x)


def _write_manifest(out_dir: Path, args_echo: dict, outputs: list[str]) -> None:
    manifest = {
        "spec": args_echo,
        "versions": {
            "sel": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "seeds": None,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    _write_json(out_dir / "manifest.json", manifest)


def _domain(name: str):
    return interval() if name == "interval" else rectangle()


def _fit_exponents_best_effort(grid: Grid, u) -> tuple[float | None, float | None]:
    # Boundary-law fits need a meaningful distance band; fall back to the
    # wide default window on coarse grids and to nulls when even that is
    # too thin to regress over.
    for window_of in (asymptotic_window, default_window):
        try:
            window = window_of(grid)
            t_fit, _ = fit_boundary_exponent(grid, u, window)
            return t_fit, fit_gradient_exponent(grid, u, window)
        except (WindowTooThinError, ValueError):
            continue
    return None, None


def _check_borderline(alpha: float, beta: float) -> tuple[bool, list[str]]:
    """CLI-level borderline policy.

    alpha+beta = 1 is refused (exit 1) except the documented alpha=1,
    beta=0 case, which proceeds through the t=1 limit with a warning.
    """
    if alpha + beta != 1.0:
        return True, []
    if alpha == 1.0 and beta == 0.0:
        return True, ["alpha=1 is outside the existence theorems; t=1 limit used"]
    return False, []


def _spec_echo(args, method: str | None = None) -> dict:
    echo = {
        "alpha": args.alpha,
        "beta": args.beta,
        "domain": args.domain,
        "n": args.n,
        "tol": args.tol,
        "max_iter": args.max_iter,
    }
    if method is not None:
        echo["method"] = method
        echo["eps"] = getattr(args, "eps", None)
    return echo


def _solve_single(spec: ProblemSpec, grid: Grid, method: str, eps: float):
    """Returns (u, pair, solve_block, converged)."""
    eig = principal_eigenpair(assemble_laplacian(grid), tol=1e-12)
    pair = build_barrier_pair(grid, spec.alpha, spec.beta, eig)
    if method == "monotone":
        report = solve_monotone(spec, pair)
        block = {
            "method": method,
            "iterations": report.iterations,
            "gap_history": report.gap_history,
            "converged": report.converged,
            "ordering_violation": report.ordering_violation,
            "uniqueness_gap": uniqueness_gap(report) if report.converged else None,
        }
        return report.upper, pair, block, report.converged, eig
    if method == "regularized":
        u = solve_regularized(spec, eps, pair.super, tol=spec.config.tol)
        block = {
            "method": method,
            "eps": eps,
            "iterations": None,
            "gap_history": [],
            "converged": True,
        }
        return u, pair, block, True, eig
    u = dense_newton_solve(spec, tol=min(spec.config.tol, 1e-12))
    block = {"method": method, "iterations": None, "gap_history": [], "converged": True}
    return u, pair, block, True, eig


def cmd_solve(args) -> int:
    ok, warn = _check_borderline(args.alpha, args.beta)
    if not ok:
        print(
            "error: alpha+beta=1 is the excluded borderline regime "
            "(no boundary exponent applies)",
            file=sys.stderr,
        )
        return EXIT_INVALID
    if args.method == "dense" and args.n > DENSE_N_CAP:
        print(f"error: --method dense requires --n <= {DENSE_N_CAP}", file=sys.stderr)
        return EXIT_INVALID

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = ProblemSpec(
        alpha=args.alpha,
        beta=args.beta,
        shape=_domain(args.domain),
        n=args.n,
        config=SolveConfig(tol=args.tol, max_iter=args.max_iter),
    )
    grid = spec.make_grid()
    try:
        u, pair, solve_block, converged, eig = _solve_single(spec, grid, args.method, args.eps)
    except NewtonStagnationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    mu = linearized_smallest_eigenvalue(grid, u, args.alpha, args.beta, tol=1e-10)
    t_fit, sigma_fit = _fit_exponents_best_effort(grid, u)
    report = {
        "spec": _spec_echo(args, args.method),
        "warnings": warn + list(pair.warnings),
        "barrier": {
            "c": pair.c,
            "C": pair.C,
            "t": pair.t,
            "c1": pair.c1,
            "c2": pair.c2,
            "M": pair.M,
            "gamma": pair.gamma,
        },
        "solve": solve_block,
        "spectral": {"lambda1": eig.value, "mu1": mu.value, "stable": mu.value > 0.0},
        "regularity": {
            "t_fit": t_fit,
            "sigma_fit": sigma_fit,
            "q_bar_est": (
                None
                if sigma_fit is None
                else (-1.0 / sigma_fit) if sigma_fit < -0.01 else math.inf
            ),
            "q_bar_theory": q_bar_theory(args.alpha, args.beta),
            "h1_verdict": "needs >= 3 levels",
        },
        "residuals": {"solution": residual(grid, u, args.alpha, args.beta)},
    }
    _write_json(out_dir / "report.json", report)

    grad = gradient_field(grid, u)
    pts = grid.points()
    coord_names = ["x"] if grid.dim == 1 else ["x", "y"]
    with open(out_dir / "solution.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(coord_names + ["d", "u", "grad_u"])
        for i in range(grid.num_interior):
            writer.writerow(
                [_fmt(float(c)) for c in pts[i]]
                + [_fmt(float(grid.d[i])), _fmt(float(u[i])), _fmt(float(grad[i]))]
            )
    _write_manifest(out_dir, report["spec"], ["report.json", "solution.csv"])
    return EXIT_OK if converged else EXIT_NO_CONVERGENCE


def _sweep_cell(cell) -> dict:
    alpha, beta, domain, n, tol = cell
    row = {
        "alpha": alpha,
        "beta": beta,
        "t_theory": "",
        "t_fit": "",
        "sigma_theory": "",
        "sigma_fit": "",
        "q_bar_theory": "",
        "q_bar_est": "",
        "h1_verdict": "",
    }
    if alpha + beta == 1.0:
        row["h1_verdict"] = "skipped: borderline alpha+beta=1"
        return row
    # theory columns never need a solve
    row["q_bar_theory"] = q_bar_theory(alpha, beta)
    if alpha + beta > 1:
        row["t_theory"] = (2.0 - beta) / (1.0 + alpha)
        row["sigma_theory"] = (1.0 - alpha - beta) / (1.0 + alpha)
    else:
        row["t_theory"], row["sigma_theory"] = 1.0, 0.0
    try:
        levels = []
        for level_n in (n // 4, n // 2, n):
            spec = ProblemSpec(
                alpha=alpha,
                beta=beta,
                shape=_domain(domain),
                n=level_n,
                config=SolveConfig(tol=tol, max_iter=5000),
            )
            grid = spec.make_grid()
            pair = build_barrier_pair(grid, alpha, beta)
            rep = solve_monotone(spec, pair)
            if not rep.converged:
                row["h1_verdict"] = f"skipped: no convergence at n={level_n}"
                return row
            levels.append((grid, rep.upper))
        reg = regularity_report(levels, alpha, beta)
        row.update(
            t_fit=reg.t_fit,
            sigma_fit=reg.sigma_fit,
            q_bar_est=reg.q_bar_est,
            h1_verdict=reg.verdicts.get("h1", ""),
        )
        if reg.verdicts.get("q_bar_consistency") is False:
            # no certified estimate at this resolution; the JSON report from
            # the regularity command carries the full verdict detail
            row["q_bar_est"] = ""
    except Exception as exc:  # noqa: BLE001 - a sweep keeps going per cell
        row["h1_verdict"] = f"skipped: {type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args) -> int:
    alphas = [float(a) for a in args.alpha_list.split(",") if a]
    betas = [float(b) for b in args.beta_list.split(",") if b]
    if not alphas or not betas:
        print("error: empty --alpha-list / --beta-list", file=sys.stderr)
        return EXIT_INVALID
    if args.n % 4 != 0 or args.n < 16:
        print("error: sweep needs --n divisible by 4 and >= 16", file=sys.stderr)
        return EXIT_INVALID
    cells = [(a, b, args.domain, args.n, args.tol) for a in alphas for b in betas]
    workers = int(os.environ.get("SEL_THREADS", os.cpu_count() or 1))
    workers = max(1, min(workers, len(cells)))
    if workers == 1:
        rows = [_sweep_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fields = [
        "alpha",
        "beta",
        "t_theory",
        "t_fit",
        "sigma_theory",
        "sigma_fit",
        "q_bar_theory",
        "q_bar_est",
        "h1_verdict",
    ]
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row[f]) if isinstance(row[f], float) else row[f] for f in fields])
    _write_manifest(out.parent, {"alphas": alphas, "betas": betas, "n": args.n}, [out.name])
    return EXIT_OK


def cmd_spectrum(args) -> int:
    ok, warn = _check_borderline(args.alpha, args.beta)
    if not ok:
        print("error: alpha+beta=1 is the excluded borderline regime", file=sys.stderr)
        return EXIT_INVALID
    levels = [int(v) for v in args.levels.split(",") if v]
    rows = []
    for n in levels:
        spec = ProblemSpec(
            alpha=args.alpha,
            beta=args.beta,
            shape=_domain(args.domain),
            n=n,
            config=SolveConfig(tol=args.tol, max_iter=args.max_iter),
        )
        grid = spec.make_grid()
        eig = principal_eigenpair(assemble_laplacian(grid), tol=1e-12)
        pair = build_barrier_pair(grid, args.alpha, args.beta, eig)
        rep = solve_monotone(spec, pair)
        if not rep.converged:
            print(f"error: no convergence at n={n}", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
        mu = linearized_smallest_eigenvalue(grid, rep.upper, args.alpha, args.beta, tol=1e-10)
        rows.append({"n": n, "lambda1": eig.value, "mu1": mu.value})
    payload = {
        "spec": _spec_echo(args),
        "warnings": warn,
        "levels": rows,
        "stable": all(r["mu1"] > 0.0 for r in rows),
        "ordered": all(r["mu1"] >= r["lambda1"] for r in rows),
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_json(out, payload)
    _write_manifest(out.parent, payload["spec"], [out.name])
    return EXIT_OK


def cmd_regularity(args) -> int:
    ok, warn = _check_borderline(args.alpha, args.beta)
    if not ok:
        print("error: alpha+beta=1 is the excluded borderline regime", file=sys.stderr)
        return EXIT_INVALID
    level_ns = [int(v) for v in args.levels.split(",") if v]
    if len(level_ns) < 2:
        print("error: need at least 2 refinement levels", file=sys.stderr)
        return EXIT_INVALID
    q_grid = [float(q) for q in args.q_grid.split(",") if q] if args.q_grid else None

    levels = []
    for n in level_ns:
        spec = ProblemSpec(
            alpha=args.alpha,
            beta=args.beta,
            shape=_domain(args.domain),
            n=n,
            config=SolveConfig(tol=args.tol, max_iter=args.max_iter),
        )
        grid = spec.make_grid()
        pair = build_barrier_pair(grid, args.alpha, args.beta)
        rep = solve_monotone(spec, pair)
        if not rep.converged:
            print(f"error: no convergence at n={n}", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
        levels.append((grid, rep.upper))

    reg = regularity_report(levels, args.alpha, args.beta, q_grid=q_grid)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"spec": _spec_echo(args), "warnings": warn, "report": asdict(reg)}
    _write_json(out_dir / "regularity.json", payload)

    qs = q_grid or [1.5, 2.0, 3.0]
    with open(out_dir / "sobolev.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "q", "integral"])
        for n, (grid, u) in zip(level_ns, levels):
            for q in qs:
                writer.writerow([n, _fmt(float(q)), _fmt(sobolev_integral(grid, u, q))])
    _write_manifest(out_dir, payload["spec"], ["regularity.json", "sobolev.csv"])
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--domain", choices=["interval", "rectangle"], default="interval")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance")
    _add_common(p_solve)
    p_solve.add_argument("--method", choices=["monotone", "regularized", "dense"], default="monotone")
    p_solve.add_argument("--eps", type=float, default=1e-5, help="regularization for --method regularized")

    p_sweep = sub.add_parser("sweep", help="run an (alpha, beta) table")
    p_sweep.add_argument("--alpha-list", required=True)
    p_sweep.add_argument("--beta-list", required=True)
    p_sweep.add_argument("--domain", choices=["interval", "rectangle"], default="interval")
    p_sweep.add_argument("--n", type=int, default=128)
    p_sweep.add_argument("--tol", type=float, default=1e-8)
    p_sweep.add_argument("--out", required=True)

    p_spec = sub.add_parser("spectrum", help="lambda1/mu1 per refinement level")
    _add_common(p_spec)
    p_spec.add_argument("--levels", required=True, help="comma list of n values")

    p_reg = sub.add_parser("regularity", help="regularity report over a ladder")
    _add_common(p_reg)
    p_reg.add_argument("--levels", required=True, help="comma list of n values")
    p_reg.add_argument("--q-grid", default=None, help="comma list of q values")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "spectrum":
            return cmd_spectrum(args)
        return cmd_regularity(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
