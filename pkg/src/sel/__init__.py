"""sel: a numerical laboratory for singular semilinear elliptic problems.

Solves -lap(u) = d(x)^(-beta) u^(-alpha) with zero Dirichlet data on
intervals and rectangles by a certified two-sided monotone iteration,
cross-checks the result against damped-Newton paths, and extracts the
boundary exponent, gradient blow-up rate, critical Sobolev threshold, and
linearized stability of the computed solutions.
"""

__version__ = "0.1.0"

from .analysis import (
    FitWindow,
    H1Report,
    ProbeReport,
    RegularityReport,
    asymptotic_window,
    calibrate_k1,
    default_window,
    estimate_critical_q,
    fit_boundary_exponent,
    fit_gradient_exponent,
    gradient_field,
    h1_membership,
    local_gradient_probe,
    q_bar_theory,
    regularity_report,
    sobolev_integral,
    uniqueness_identity,
)
from .barriers import (
    BarrierPair,
    BorderlineRegimeError,
    CertReport,
    boundary_exponent,
    build_barrier_pair,
    build_subsolution,
    build_supersolution,
    choose_M,
    resolve_regime,
    verify_barrier,
)
from .grid import (
    DomainShape,
    Grid,
    InvalidResolutionError,
    assemble_laplacian,
    build_grid,
    gradient_components,
    interval,
    power_weight,
    rectangle,
)
from .linear_core import (
    ComparisonPrincipleViolationError,
    ShiftSpec,
    SolverStagnationError,
    SolveStats,
    assemble_shifted,
    solve_spd,
    weighted_norm,
)
from .monotone import (
    OrderingViolationError,
    SolveReport,
    iterate_step,
    residual,
    solve_monotone,
    uniqueness_gap,
)
from .oracle import (
    ManufacturedCase,
    dense_newton_solve,
    manufactured_linear_case,
    newton_solve,
    observed_order,
)
from .problem import ProblemSpec, SolveConfig
from .regularized import (
    ContinuationReport,
    NewtonStagnationError,
    epsilon_continuation,
    solve_regularized,
)
from .spectral import (
    EigenPair,
    EigenNonConvergenceError,
    InvalidLinearizationPointError,
    linearized_smallest_eigenvalue,
    principal_eigenpair,
)
