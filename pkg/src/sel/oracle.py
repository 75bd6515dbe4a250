"""Independent ground truth: dense Newton solves, manufactured cases, orders.

dense_newton_solve shares no machinery with the monotone path beyond grid
assembly: it factorizes the full Jacobian directly, so agreement between the
two is a genuine cross-method check rather than a self-consistency one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .barriers import build_barrier_pair, resolve_regime
from .grid import Grid, assemble_laplacian, power_weight
from .linear_core import ShiftSpec, assemble_shifted, solve_spd
from .problem import ProblemSpec

DENSE_N_CAP = 64


class NewtonStagnationError(RuntimeError):
    pass


@dataclass
class ManufacturedCase:
    """Exact-by-construction pair: forcing = operator applied to exact."""

    exact: np.ndarray
    forcing: np.ndarray
    description: str


def manufactured_linear_case(grid: Grid, shift: ShiftSpec) -> ManufacturedCase:
    """u* = prod over axes of (s(1-s))^2, s the normalized coordinate.

    u* vanishes to second order at the boundary, so d^(-gamma) u* stays
    bounded for gamma <= 2 and the forcing from forward application is
    finite even for singular shifts.
    """
    pts = grid.points()
    exact = np.ones(grid.num_interior)
    for axis, extent in enumerate(grid.shape.extents):
        s = pts[:, axis] / extent
        exact = exact * (s * (1.0 - s)) ** 2
    forcing = assemble_shifted(grid, shift) @ exact
    return ManufacturedCase(
        exact=exact,
        forcing=forcing,
        description=f"quartic bump on {grid.shape.kind}, shift M={shift.M} gamma={shift.gamma}",
    )


def newton_solve(
    grid: Grid,
    alpha: float,
    beta: float,
    init: np.ndarray,
    tol: float = 1e-12,
    dense: bool | None = None,
) -> np.ndarray:
    """Safeguarded Newton on the unregularized system -lap_h u = d^(-beta) u^(-alpha).

    Step halving keeps every iterate above 0.1 times the current minimum
    (the u^(-alpha) barrier repels iterates from zero, the floor prevents
    overshoot past it).  Linear solves are dense LU on small grids, CG
    otherwise.  Terminates on the d^(beta + t alpha)-weighted defect.
    """
    init = grid.check_field(init)
    if init.min() <= 0.0:
        raise ValueError("initial field must be positive nodewise")
    if dense is None:
        dense = grid.num_interior <= 4096
    t = resolve_regime(alpha, beta).t
    weight = grid.d ** (beta + t * alpha)
    A0 = assemble_laplacian(grid)
    A0_dense = A0.toarray() if dense else None
    w_beta = power_weight(grid, beta)

    u = init.copy()
    for _ in range(200):
        defect = A0 @ u - w_beta * u ** (-alpha)
        if float(np.max(np.abs(defect * weight))) <= tol:
            return u
        jac_diag = alpha * w_beta * u ** (-(1.0 + alpha))
        if dense:
            jac = A0_dense + np.diag(jac_diag)
            delta = scipy.linalg.solve(jac, -defect, assume_a="pos")
        else:
            jac = (A0 + sp.diags_array(jac_diag)).tocsr()
            delta, _ = solve_spd(jac, -defect, tol=1e-10)
        floor = 0.1 * float(u.min())
        step = 1.0
        for _halving in range(50):
            if float((u + step * delta).min()) >= floor:
                break
            step *= 0.5
        else:
            raise NewtonStagnationError("positivity floor unreachable after 50 halvings")
        u = u + step * delta
    raise NewtonStagnationError("Newton did not converge in 200 iterations")


def dense_newton_solve(spec: ProblemSpec, tol: float = 1e-12) -> np.ndarray:
    """Tiny-scale oracle: dense-LU Newton from the supersolution barrier.

    Restricted to spec.n <= 64 where dense factorization is trivially
    feasible; the monotone solver must agree with this limit.
    """
    if spec.n > DENSE_N_CAP:
        raise ValueError(f"dense oracle is limited to n <= {DENSE_N_CAP}, got n={spec.n}")
    grid = spec.make_grid()
    pair = build_barrier_pair(grid, spec.alpha, spec.beta)
    return newton_solve(grid, spec.alpha, spec.beta, pair.super, tol=tol, dense=True)


def observed_order(errors, hs) -> tuple[float, bool]:
    """Least-squares slope of log error vs log h, with a reliability flag.

    The flag is False when the error sequence is not strictly decreasing
    as h decreases (order estimates from non-monotone data mean little).
    """
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape or errors.size < 3:
        raise ValueError("need >= 3 matching (error, h) pairs")
    if np.any(np.diff(hs) >= 0):
        raise ValueError("hs must be strictly decreasing")
    if np.any(errors <= 0):
        raise ValueError("errors must be positive")
    order = float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
    reliable = bool(np.all(np.diff(errors) < 0))
    return order, reliable
