import numpy as np
import pytest

from sel.grid import assemble_laplacian, power_weight
from sel.linear_core import solve_spd
from sel.problem import ProblemSpec, SolveConfig
from sel.regularized import (
    NewtonStagnationError,
    epsilon_continuation,
    solve_regularized,
)


def test_alpha_zero_is_exact_linear_solve(lab):
    grid = lab.grid(64)
    spec = ProblemSpec(alpha=0.0, beta=0.5, n=64)
    for eps in (1.0, 1e-4):
        u = solve_regularized(spec, eps, np.zeros(grid.num_interior), tol=1e-11)
        u_lin, _ = solve_spd(assemble_laplacian(grid), power_weight(grid, 0.5), tol=1e-12)
        np.testing.assert_allclose(u, u_lin, atol=1e-9)


def test_huge_eps_reduces_to_scaled_linear_problem(lab):
    grid = lab.grid(64)
    spec = ProblemSpec(alpha=1.0, beta=0.0, n=64)
    eps = 1e3
    u = solve_regularized(spec, eps, np.zeros(grid.num_interior), tol=1e-12)
    u_lin, _ = solve_spd(assemble_laplacian(grid), np.ones(grid.num_interior) / eps, tol=1e-13)
    np.testing.assert_allclose(u, u_lin, rtol=1e-5)


def test_agrees_with_monotone_path_at_small_eps(lab):
    grid, pair, report = lab.solved(0.5, 0.0, 256)
    spec = ProblemSpec(alpha=0.5, beta=0.0, n=256)
    u_eps = solve_regularized(spec, 1e-3, pair.super, tol=1e-10)
    scale = report.upper.max()
    assert np.max(np.abs(u_eps - report.upper)) <= 2e-3 * scale
    assert np.max(u_eps - report.upper) <= 1e-10 * scale


def test_input_validation(lab):
    grid = lab.grid(32)
    spec = ProblemSpec(alpha=0.5, beta=0.0, n=32)
    with pytest.raises(ValueError):
        solve_regularized(spec, 0.0, np.zeros(grid.num_interior))
    with pytest.raises(ValueError):
        solve_regularized(spec, 1e-3, -np.ones(grid.num_interior))
    with pytest.raises(ValueError):
        epsilon_continuation(spec, 0.1, 1.5, 3, np.zeros(grid.num_interior))
    with pytest.raises(ValueError):
        epsilon_continuation(spec, 0.1, 0.1, 0, np.zeros(grid.num_interior))


def test_unreachable_tolerance_stagnates(lab):
    spec = ProblemSpec(alpha=0.5, beta=0.0, n=32)
    init = lab.pair(0.5, 0.0, 32).super
    with pytest.raises(NewtonStagnationError):
        solve_regularized(spec, 1e-3, init, tol=1e-30)


def test_continuation_deltas_shrink_and_stay_below(lab):
    grid, _, report = lab.solved(0.5, 0.0, 128)
    spec = ProblemSpec(alpha=0.5, beta=0.0, n=128)
    cont = epsilon_continuation(spec, 1e-1, 0.1, 5, report.upper, tol=1e-10)
    scale = report.upper.max()
    assert cont.eps_values[-1] == pytest.approx(1e-5)
    assert cont.deltas[-1] <= 1e-3 * scale
    assert cont.deltas_monotone
    for u_eps in cont.fields:
        assert np.max(u_eps - report.upper) <= 1e-10 * scale


def test_path_agreement_envelope(lab):
    # |monotone - continuation limit| <= max(10 tol, 2 eps^min(1, 2/(1+alpha))) * ||u||
    for alpha in (0.5, 2.0):
        grid, _, report = lab.solved(alpha, 0.0, 128)
        spec = ProblemSpec(alpha=alpha, beta=0.0, n=128)
        cont = epsilon_continuation(spec, 1e-1, 0.1, 5, report.upper, tol=1e-10)
        rate = min(1.0, 2.0 / (1.0 + alpha))
        envelope = max(10 * 1e-8, 2.0 * cont.eps_values[-1] ** rate)
        assert cont.deltas[-1] <= envelope * report.upper.max()
        assert cont.deltas_monotone


def test_alpha_zero_continuation_is_eps_independent(lab):
    grid = lab.grid(64)
    u_lin, _ = solve_spd(assemble_laplacian(grid), np.ones(grid.num_interior), tol=1e-13)
    spec = ProblemSpec(alpha=0.0, beta=0.0, n=64)
    cont = epsilon_continuation(spec, 1e-2, 0.1, 3, u_lin, tol=1e-12)
    assert np.all(cont.deltas <= 1e-9 * u_lin.max())
