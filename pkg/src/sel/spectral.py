"""Principal Dirichlet eigenpair and the linearized smallest eigenvalue.

Inverse power iteration with the preconditioned CG of linear_core as inner
solver.  Only the smallest eigenvalue is ever needed here, the operators are
SPD M-matrices, and the principal eigenvector is positive (discrete
Perron-Frobenius), so Lanczos or deflation would be overkill.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import Grid, assemble_laplacian, power_weight
from .linear_core import SolverStagnationError, solve_spd

# The 2-norm eigen-residual of a sup-normalized eigenvector bottoms out at
# the inner solver's round-off floor (eps * cond(A)), not at zero; this is
# the absolute level below which the back-check stops being meaningful.
RESIDUAL_FLOOR = 1e-7


class EigenNonConvergenceError(RuntimeError):
    """Inverse power iteration stagnated."""


class InvalidLinearizationPointError(ValueError):
    """Linearization requested at a field that is not strictly positive."""


@dataclass
class EigenPair:
    """Eigenvalue, sup-normalized positive eigenvector, and 2-norm residual."""

    value: float
    field: np.ndarray
    residual: float


def principal_eigenpair(A: sp.spmatrix, tol: float = 1e-10, max_iter: int = 500) -> EigenPair:
    """Smallest eigenvalue and positive eigenvector of an SPD M-matrix.

    Convergence is declared on relative eigenvalue increments <= tol, with a
    residual back-check ||A phi - lambda phi||_2 / ||phi||_2 <= tol * lambda.
    """
    m = A.shape[0]
    x = np.ones(m)
    lam = float(x @ (A @ x)) / float(x @ x)
    # Inner accuracy is not precious: the Rayleigh quotient squares the
    # eigenvector error.  Loosen on round-off stagnation instead of failing.
    inner_tol = max(tol * 1e-2, 1e-11)
    for _ in range(max_iter):
        try:
            y, _ = solve_spd(A, x, tol=inner_tol, x0=x / lam)
        except SolverStagnationError:
            inner_tol *= 100.0
            if inner_tol > 1e-4:
                raise EigenNonConvergenceError("inner solves stagnate at round-off floor")
            continue
        y /= float(np.max(np.abs(y)))
        lam_new = float(y @ (A @ y)) / float(y @ y)
        increment_small = abs(lam_new - lam) <= tol * abs(lam_new)
        x, lam = y, lam_new
        if increment_small:
            resid = float(np.linalg.norm(A @ x - lam * x)) / float(np.linalg.norm(x))
            if resid <= max(tol * lam, RESIDUAL_FLOOR):
                if x.min() <= 0.0:
                    raise EigenNonConvergenceError(
                        "principal eigenvector is not strictly positive"
                    )
                return EigenPair(value=lam, field=x, residual=resid)
    raise EigenNonConvergenceError(f"no convergence after {max_iter} inverse iterations")


def linearized_smallest_eigenvalue(
    grid: Grid, u: np.ndarray, alpha: float, beta: float, tol: float = 1e-10
) -> EigenPair:
    """Smallest eigenvalue mu_1 of -lap_h + alpha d^(-beta) u^(-(1+alpha)).

    The potential is nonnegative for u > 0, so mu_1 >= lambda_1 > 0: the
    converged solutions of the nonlinear problem are linearly stable, and
    this is the quantity that certifies it.
    """
    u = grid.check_field(u)
    if u.min() <= 0.0:
        raise InvalidLinearizationPointError("linearization point must be positive nodewise")
    potential = alpha * power_weight(grid, beta) * u ** (-(1.0 + alpha))
    A = (assemble_laplacian(grid) + sp.diags_array(potential)).tocsr()
    return principal_eigenpair(A, tol=tol)
