#!/usr/bin/env python3
"""The sharp Sobolev threshold q_bar and the H^1 membership dichotomy.

For alpha + beta > 1 the gradient blows up like d^((1-alpha-beta)/(1+alpha))
and int |grad u|^q is finite exactly for q < q_bar = (1+alpha)/(alpha+beta-1).
The demo estimates q_bar from the computed gradient and watches the Sobolev
integrals converge below the threshold and grow without bound above it.
It then crosses the classical H^1 frontier (q_bar = 2, i.e. alpha = 3 at
beta = 0): alpha = 2.5 is a member, alpha = 3.5 is not.  Solutions past
alpha = 3 come from the Newton path, since the monotone existence theory
stops where H^1 does.
"""

from sel import (
    ProblemSpec,
    SolveConfig,
    asymptotic_window,
    build_barrier_pair,
    estimate_critical_q,
    h1_membership,
    newton_solve,
    q_bar_theory,
    sobolev_integral,
    solve_monotone,
)

ALPHA, BETA = 2.0, 0.0
print(f"--- q_bar for alpha={ALPHA}, beta={BETA}")
levels = []
for n in (1024, 2048):
    spec = ProblemSpec(alpha=ALPHA, beta=BETA, n=n, config=SolveConfig(tol=1e-7, max_iter=2000))
    grid = spec.make_grid()
    report = solve_monotone(spec, build_barrier_pair(grid, ALPHA, BETA))
    levels.append((grid, report.upper))

q_est = estimate_critical_q(levels, asymptotic_window(levels[-1][0]))
print(f"q_bar estimate = {q_est:.3f}   theory (1+alpha)/(alpha+beta-1) = {q_bar_theory(ALPHA, BETA):.3f}")

print("\nrefinement ratios of int |grad u|^q (>= 1.05 flags divergence;")
print("within 20% of q_bar the classification is ill-conditioned and marked *):")
for q in (1.5, 2.0, 2.5, 3.5, 4.0):
    vals = [sobolev_integral(g, u, q) for g, u in levels]
    tag = "diverges" if vals[-1] / vals[-2] >= 1.05 else "converges"
    marginal = " *" if abs(q - 3.0) <= 0.2 * 3.0 else ""
    print(f"  q = {q:3.1f}: I(1024) = {vals[0]:9.4f}  I(2048) = {vals[1]:9.4f}  "
          f"ratio = {vals[1] / vals[0]:.4f}  -> {tag}{marginal}")

print("\n--- H^1 membership across alpha = 3 (beta = 0), levels n = 256..1024")
for alpha in (2.5, 3.5):
    ladder = []
    for n in (256, 512, 1024):
        spec = ProblemSpec(alpha=alpha, beta=0.0, n=n, config=SolveConfig(tol=1e-7, max_iter=3000))
        grid = spec.make_grid()
        pair = build_barrier_pair(grid, alpha, 0.0)
        if alpha < 3:
            u = solve_monotone(spec, pair).upper
        else:
            u = newton_solve(grid, alpha, 0.0, pair.super, tol=1e-9)
        ladder.append((grid, u))
    verdict = h1_membership(ladder)
    ratios = ", ".join(f"{r:.4f}" for r in verdict.ratios)
    print(f"  alpha = {alpha}: Dirichlet-energy ratios [{ratios}] -> {verdict.verdict}")
