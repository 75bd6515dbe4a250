import numpy as np
import pytest

from sel.barriers import (
    ALPHA_ONE_WARNING,
    BORDERLINE_WARNING,
    BorderlineRegimeError,
    boundary_exponent,
    build_barrier_pair,
    build_subsolution,
    build_supersolution,
    choose_M,
    resolve_regime,
    verify_barrier,
)
from sel.grid import assemble_laplacian, gradient_components, power_weight


def test_boundary_exponent_regimes():
    assert boundary_exponent(0.5, 0.0) == 1.0
    assert boundary_exponent(2.0, 0.0) == pytest.approx(2.0 / 3.0)
    assert boundary_exponent(2.0, 1.0) == pytest.approx(1.0 / 3.0)


def test_boundary_exponent_refuses_borderline():
    with pytest.raises(BorderlineRegimeError):
        boundary_exponent(0.5, 0.5)
    with pytest.raises(BorderlineRegimeError):
        boundary_exponent(1.0, 0.0)


def test_resolve_regime_borderline_goes_through_t1_with_warning():
    r = resolve_regime(0.5, 0.5)
    assert r.t == 1.0 and r.gamma == 2.0
    assert r.warnings == (BORDERLINE_WARNING,)
    r1 = resolve_regime(1.0, 0.0)
    assert r1.t == 1.0
    assert r1.warnings == (ALPHA_ONE_WARNING,)
    assert resolve_regime(0.3, 0.0).gamma == 1.3
    with pytest.raises(ValueError):
        resolve_regime(0.5, 2.0)
    with pytest.raises(ValueError):
        resolve_regime(-0.5, 0.0)


def test_low_regime_constant_approaches_continuum(lab):
    grid = lab.grid(256)
    c, field = build_subsolution(grid, 0.5, 0.0, lab.eig(256))
    assert c == pytest.approx(np.pi ** (-4.0 / 3.0), rel=1e-3)
    assert np.all(field > 0)


def test_high_regime_constant_matches_closure(lab):
    grid = lab.grid(256)
    eig = lab.eig(256)
    c, _ = build_subsolution(grid, 2.0, 0.0, eig)
    gsq = sum(
        g * g for g in gradient_components(grid, eig.field, one_sided_boundary=True)
    )
    t = 2.0 / 3.0
    expected = (t * (1 - t) * gsq.max() + eig.value * t) ** (-1.0 / 3.0)
    assert c == pytest.approx(expected, rel=1e-6)


def test_constructed_barriers_certify(lab):
    for alpha, beta in ((0.5, 0.0), (2.0, 0.0), (2.0, 0.5)):
        grid = lab.grid(256)
        pair = lab.pair(alpha, beta, 256)
        for side, field in (("sub", pair.sub), ("super", pair.super)):
            cert = verify_barrier(grid, field, alpha, beta, side)
            assert cert.passed, (alpha, beta, side, cert)


def test_low_regime_subsolution_inequality_is_exact(lab):
    grid = lab.grid(256)
    pair = lab.pair(0.5, 0.0, 256)
    defect = assemble_laplacian(grid) @ pair.sub - power_weight(grid, 0.0) * pair.sub**-0.5
    assert defect.max() <= 0.0
    assert defect.min() < 0.0


def test_overscaled_field_fails_subsolution_check(lab):
    grid = lab.grid(256)
    pair = lab.pair(2.0, 0.0, 256)
    cert = verify_barrier(grid, 10.0 * pair.super, 2.0, 0.0, "sub")
    assert not cert.passed
    assert cert.worst_violation > 0.0


def test_verify_barrier_input_validation(lab):
    grid = lab.grid(32)
    pair = lab.pair(0.5, 0.0, 32)
    with pytest.raises(ValueError):
        verify_barrier(grid, -pair.sub, 0.5, 0.0, "sub")
    with pytest.raises(ValueError):
        verify_barrier(grid, pair.sub, 0.5, 0.0, "above")


def test_choose_M_zero_for_linear_problem(lab):
    pair = lab.pair(0.0, 0.0, 64)
    assert pair.M == 0.0
    assert choose_M(pair, lab.grid(64), 0.0, 0.0) == 0.0


def test_choose_M_stabilizes_under_refinement(lab):
    # low regime with beta=0: the bound has a d-uniform factor, finite as n grows
    m = [lab.pair(0.5, 0.0, n).M for n in (128, 256)]
    assert m[1] == pytest.approx(m[0], rel=2e-2)
    # high regime: the distance powers cancel exactly, M is n-independent
    m = [lab.pair(2.0, 0.0, n).M for n in (128, 256)]
    assert m[1] == pytest.approx(m[0], rel=1e-2)


def test_pair_ordering_across_parameter_sweep(lab):
    for alpha in (0.3, 0.8, 1.5, 2.5):
        for beta in (0.0, 0.5):
            pair = lab.pair(alpha, beta, 64)
            assert np.all(pair.sub > 0)
            assert np.all(pair.sub <= pair.super)
            assert pair.c1 > 0 and pair.c2 >= pair.c1


def test_sandwich_constants_stabilize(lab):
    for alpha, beta in ((0.5, 0.0), (2.0, 0.0)):
        pairs = [lab.pair(alpha, beta, n) for n in (64, 128)]
        assert pairs[1].c1 == pytest.approx(pairs[0].c1, rel=0.2)
        assert pairs[1].c2 == pytest.approx(pairs[0].c2, rel=0.2)
        for pair, n in zip(pairs, (64, 128)):
            dt = lab.grid(n).d ** pair.t
            assert np.all(pair.sub >= pair.c1 * dt - 1e-12)
            assert np.all(pair.super <= pair.c2 * dt + 1e-12)


def test_monotonized_map_is_nondecreasing(lab, rng):
    alpha, beta = 2.0, 0.5
    grid = lab.grid(128)
    pair = lab.pair(alpha, beta, 128)
    nodes = rng.integers(0, grid.num_interior, size=100)
    for node in nodes:
        lo, hi = pair.sub[node], pair.super[node]
        s = np.sort(rng.uniform(lo, hi, size=2))
        d = grid.d[node]
        def g(v):
            return d ** (-beta) * v ** (-alpha) + pair.M * d ** (-pair.gamma) * v
        assert g(s[0]) <= g(s[1]) + 1e-12 * abs(g(s[1]))


def test_alpha_zero_supersolution_is_scaled_poisson_profile(lab):
    grid = lab.grid(64)
    C, field = build_supersolution(grid, 0.0, 0.0, lab.eig(64))
    x = grid.axes[0]
    # psi solves -lap psi = 1 exactly, and the constant reduces to 1+margin
    assert C == pytest.approx(1.1, rel=1e-9)
    np.testing.assert_allclose(field, 1.1 * x * (1 - x) / 2, atol=1e-9)


def test_supersolution_margin_can_only_help(lab):
    grid = lab.grid(128)
    eig = lab.eig(128)
    for alpha, beta in ((0.5, 0.0), (2.0, 0.0)):
        big_c, field = build_supersolution(grid, alpha, beta, eig, margin=0.2)
        cert = verify_barrier(grid, field, alpha, beta, "super")
        assert cert.passed
        small_c, _ = build_supersolution(grid, alpha, beta, eig, margin=0.1)
        assert big_c > small_c


def test_borderline_pair_builds_with_warning(lab):
    pair = lab.pair(0.5, 0.5, 64)
    assert pair.warnings == (BORDERLINE_WARNING,)
    assert pair.t == 1.0 and pair.gamma == 2.0
    grid = lab.grid(64)
    for side, field in (("sub", pair.sub), ("super", pair.super)):
        assert verify_barrier(grid, field, 0.5, 0.5, side).passed
