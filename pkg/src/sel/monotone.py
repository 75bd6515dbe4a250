"""Two-sided monotone iteration between certified barriers.

Each outer step solves the shifted linear problem

    (-lap_h + M d^(-gamma)) u_new = d^(-beta) u^(-alpha) + M d^(-gamma) u

once from the current upper iterate and once from the current lower one.
Because the right-hand side map is nondecreasing on the order interval
(that is what M buys) and the operator is an M-matrix, the upper sequence
descends, the lower one ascends, and they pinch the extremal solutions.
The full chain sub <= lower_k <= lower_{k+1} <= upper_{k+1} <= upper_k <=
super is asserted at round-off scale on every step; a violation means the
shift is too small or the inner solves too loose, and aborts the run.

Convergence is declared on the relative two-sided gap in the weighted
L2(Omega, d^(-gamma)) norm, the natural metric of the fixed-point map;
the sup-norm gap is reported but not used for stopping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .barriers import BarrierPair, resolve_regime, verify_barrier
from .grid import Grid, assemble_laplacian, power_weight
from .linear_core import solve_spd, weighted_norm
from .problem import ProblemSpec, SolveConfig

__all__ = [
    "SolveConfig",
    "SolveReport",
    "OrderingViolationError",
    "iterate_step",
    "solve_monotone",
    "residual",
    "uniqueness_gap",
]

CHAIN_TOL = 1e-12  # ordering slack, relative to ||super||_inf


class OrderingViolationError(RuntimeError):
    """The monotone chain broke beyond round-off: M too small or solves too loose."""


@dataclass
class SolveReport:
    """Two-sided iteration record.

    gap_history is nonincreasing after the first entry (monotone squeeze);
    ordering_violation is the worst chain defect ever observed, at most
    1e-12 * ||super||_inf on success.
    """

    lower: np.ndarray
    upper: np.ndarray
    iterations: int
    gap_history: list[float]
    M: float
    gamma: float
    converged: bool
    ordering_violation: float
    h1_history: list[float] = field(default_factory=list)
    warnings: tuple[str, ...] = ()


def iterate_step(
    grid: Grid,
    A_M: sp.spmatrix,
    prev: np.ndarray,
    alpha: float,
    beta: float,
    M: float,
    gamma: float,
    inner_tol: float,
) -> np.ndarray:
    """One shifted linear solve of the scheme.

    Solved in correction form, A_M delta = rhs - A_M prev with
    u = prev + delta: identical mathematics, but the inner relative
    tolerance then applies to the increment, whose scale shrinks with the
    iteration, so round-off cannot smear the monotone ordering.
    """
    prev = grid.check_field(prev)
    if prev.min() <= 0.0:
        raise ValueError("iterate must be positive nodewise")
    rhs = power_weight(grid, beta) * prev ** (-alpha) + M * power_weight(grid, gamma) * prev
    delta, _ = solve_spd(A_M, rhs - A_M @ prev, tol=inner_tol)
    u = prev + delta
    if u.min() <= 0.0:
        raise OrderingViolationError("iterate lost positivity; inner tolerance too loose")
    return u


def solve_monotone(
    spec: ProblemSpec, pair: BarrierPair, config: SolveConfig | None = None
) -> SolveReport:
    """Run both monotone sequences to the minimal/maximal solutions.

    Returns a converged report once the weighted relative gap drops below
    config.tol, or an unconverged report (converged=False, final gap in
    gap_history) when max_iter runs out.  Raises OrderingViolationError if
    the chain breaks beyond 1e-12 * ||super||_inf.
    """
    if config is None:
        config = spec.config
    grid = spec.make_grid()
    for side, fld in (("sub", pair.sub), ("super", pair.super)):
        cert = verify_barrier(grid, fld, spec.alpha, spec.beta, side)
        if not cert.passed:
            raise ValueError(
                f"{side}solution fails certification: violation {cert.worst_violation:.3e}"
                f" > threshold {cert.threshold:.3e}"
            )
    if spec.shift is not None:
        M, gamma = spec.shift.M, spec.shift.gamma
    else:
        M, gamma = pair.M, pair.gamma

    alpha, beta = spec.alpha, spec.beta
    A0 = assemble_laplacian(grid)
    b_gamma = power_weight(grid, gamma)
    A_M = (A0 + sp.diags_array(M * b_gamma)).tocsr() if M > 0 else A0
    cellvol = grid.cell_volume

    lower = pair.sub.copy()
    upper = pair.super.copy()
    chain_tol = CHAIN_TOL * float(np.max(np.abs(pair.super)))
    worst_violation = 0.0
    gap_history: list[float] = []
    h1_history: list[float] = []
    converged = False
    iterations = 0

    for iterations in range(1, config.max_iter + 1):
        new_lower = iterate_step(grid, A_M, lower, alpha, beta, M, gamma, config.inner_tol)
        new_upper = iterate_step(grid, A_M, upper, alpha, beta, M, gamma, config.inner_tol)
        violation = max(
            float(np.max(pair.sub - new_lower)),
            float(np.max(lower - new_lower)),
            float(np.max(new_lower - new_upper)),
            float(np.max(new_upper - upper)),
            float(np.max(new_upper - pair.super)),
        )
        worst_violation = max(worst_violation, violation)
        if violation > chain_tol:
            raise OrderingViolationError(
                f"chain violation {violation:.3e} > {chain_tol:.3e} at iteration {iterations}"
            )
        lower, upper = new_lower, new_upper
        gap = weighted_norm(upper - lower, grid, gamma) / weighted_norm(upper, grid, gamma)
        gap_history.append(gap)
        h1_history.append(float(np.sqrt((upper @ (A0 @ upper)) * cellvol)))
        if gap <= config.tol:
            converged = True
            break

    return SolveReport(
        lower=lower,
        upper=upper,
        iterations=iterations,
        gap_history=gap_history,
        M=M,
        gamma=gamma,
        converged=converged,
        ordering_violation=worst_violation,
        h1_history=h1_history,
        warnings=pair.warnings,
    )


def residual(grid: Grid, u: np.ndarray, alpha: float, beta: float) -> float:
    """Sup norm of the strong-form defect, weighted by d^(beta + t alpha).

    The weight cancels the singular scales of both terms near the boundary,
    so the value is comparable across nodes; it vanishes at the exact
    discrete fixed point.
    """
    u = grid.check_field(u)
    if u.min() <= 0.0:
        raise ValueError("field must be positive nodewise")
    t = resolve_regime(alpha, beta).t
    defect = assemble_laplacian(grid) @ u - power_weight(grid, beta) * u ** (-alpha)
    return float(np.max(np.abs(defect * grid.d ** (beta + t * alpha))))


def uniqueness_gap(report: SolveReport) -> float:
    """Relative sup-norm distance between the two-sided limits."""
    if not report.converged:
        raise ValueError("uniqueness gap is only meaningful for a converged report")
    return float(np.max(np.abs(report.upper - report.lower)) / np.max(np.abs(report.upper)))
