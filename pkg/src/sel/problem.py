"""Problem instances and solver configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from .grid import DomainShape, Grid, build_grid, interval
from .linear_core import ShiftSpec


@dataclass(frozen=True)
class SolveConfig:
    """Stopping control for the two-sided monotone iteration.

    tol is the relative two-sided gap in the weighted L2(Omega, b) norm;
    inner_tol is the relative-residual tolerance of the inner SPD solves
    and must not exceed tol/10 (default: well below, capped at 1e-12).
    """

    tol: float = 1e-8
    max_iter: int = 500
    inner_tol: float | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.inner_tol is None:
            # relative CG residuals below eps*cond(A) are unattainable, so
            # the default stays two orders under tol rather than chasing 0
            object.__setattr__(self, "inner_tol", self.tol * 1e-2)
        if self.inner_tol > self.tol / 10.0:
            raise ValueError("inner_tol must be <= tol/10")


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of -lap(u) = d^(-beta) u^(-alpha), u = 0 on the boundary.

    shift=None lets the barrier machinery pick (M, gamma) for the regime;
    an explicit ShiftSpec overrides it.
    """

    alpha: float
    beta: float = 0.0
    shape: DomainShape = field(default_factory=interval)
    n: int = 64
    config: SolveConfig = field(default_factory=SolveConfig)
    shift: ShiftSpec | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= self.beta < 2:
            raise ValueError("beta must satisfy 0 <= beta < 2")

    def make_grid(self) -> Grid:
        return build_grid(self.shape, self.n)
