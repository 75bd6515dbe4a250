"""Shifted singular operators -lap_h + M d^(-gamma) and SPD solves.

The shift only adds a positive diagonal, so the operator keeps the M-matrix
structure of the Laplacian: solutions of systems with nonnegative right-hand
sides are nonnegative (discrete comparison principle), which is checked after
every solve.  Systems are solved by diagonally preconditioned conjugate
gradients; the singular shift makes the diagonal dominate near the boundary,
which is exactly where plain CG would struggle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import Grid, assemble_laplacian, power_weight


class SolverStagnationError(RuntimeError):
    """CG failed to reach the requested residual within the iteration cap."""


class ComparisonPrincipleViolationError(RuntimeError):
    """f >= 0 produced a significantly negative solution component.

    This signals an assembly bug (the matrix is not the M-matrix it should
    be), not a solver accuracy problem.
    """


@dataclass(frozen=True)
class ShiftSpec:
    """Shift strength M >= 0 and weight exponent gamma of M d^(-gamma).

    gamma = 1+alpha in the low regime (alpha+beta < 1), gamma = 2 in the
    high regime.  compact_embedding flags gamma < 2, the weighted-space
    regime where the continuum embedding is compact; assembly itself
    accepts any gamma.
    """

    M: float
    gamma: float

    def __post_init__(self):
        if self.M < 0:
            raise ValueError("shift strength M must be >= 0")

    @property
    def compact_embedding(self) -> bool:
        return self.gamma < 2


@dataclass
class SolveStats:
    iterations: int
    relative_residual: float
    wall_time: float


def assemble_shifted(grid: Grid, shift: ShiftSpec) -> sp.csr_matrix:
    """-lap_h + M diag(d^(-gamma)); SPD, diagonal only grows with M."""
    a = assemble_laplacian(grid)
    if shift.M == 0:
        return a
    return (a + sp.diags_array(shift.M * power_weight(grid, shift.gamma))).tocsr()


def solve_spd(
    A: sp.spmatrix,
    f: np.ndarray,
    tol: float = 1e-12,
    x0: np.ndarray | None = None,
    max_iter: int | None = None,
) -> tuple[np.ndarray, SolveStats]:
    """Jacobi-preconditioned CG down to ||f - A u||_2 <= tol ||f||_2.

    The true residual is recomputed on exit and the solve restarts from the
    current iterate if round-off drift in the CG recurrences left it above
    the target.  If f >= 0 nodewise, the result is checked against the
    discrete comparison principle.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = np.asarray(f, dtype=float)
    m = f.shape[0]
    if max_iter is None:
        max_iter = 20 * m
    t_start = time.perf_counter()
    norm_f = float(np.linalg.norm(f))
    if norm_f == 0.0:
        return np.zeros(m), SolveStats(0, 0.0, time.perf_counter() - t_start)

    inv_diag = 1.0 / A.diagonal()
    x = np.zeros(m) if x0 is None else np.array(x0, dtype=float)
    target = tol * norm_f
    total_iters = 0

    for _restart in range(4):
        r = f - A @ x
        if np.linalg.norm(r) <= target:
            break
        z = inv_diag * r
        p = z.copy()
        rz = float(r @ z)
        while total_iters < max_iter:
            Ap = A @ p
            pAp = float(p @ Ap)
            if pAp <= 0.0:
                raise SolverStagnationError("matrix is not positive definite")
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            total_iters += 1
            if np.linalg.norm(r) <= target:
                break
            z = inv_diag * r
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
        else:
            break

    rel = float(np.linalg.norm(f - A @ x)) / norm_f
    if rel > tol:
        raise SolverStagnationError(
            f"CG stagnated: residual {rel:.3e} > tol {tol:.3e} after {total_iters} iterations"
        )
    if np.all(f >= 0.0):
        floor = -tol * float(np.max(np.abs(x), initial=0.0))
        if float(x.min(initial=0.0)) < floor:
            raise ComparisonPrincipleViolationError(
                f"f >= 0 but min(u) = {x.min():.3e} < {floor:.3e}"
            )
    return x, SolveStats(total_iters, rel, time.perf_counter() - t_start)


def weighted_norm(u: np.ndarray, grid: Grid, gamma: float) -> float:
    """Discrete L2(Omega, d^(-gamma)) norm by the midpoint rule."""
    u = grid.check_field(u)
    return float(np.sqrt(np.sum(u * u * power_weight(grid, gamma)) * grid.cell_volume))
