import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonlocal_lab import (DirichletProblem, EllipticityParams, GridFunction, KernelSpec,
                          MollifierSpec, OperatorFamily, QuadratureConfig, TailExpr, TailSpec,
                          Unsupported, ball_update_sweep, barrier_check, bellman_apply,
                          enumerate_policies, linear_apply, oscillating_kernel,
                          solve_bellman_dirichlet, solve_contraction, solve_linear_dirichlet,
                          solve_tiny_ball_direct)
from nonlocal_lab.counterexamples import exterior_data
from nonlocal_lab.solver import _family_systems, _policy_solve

LINEAR = QuadratureConfig(scheme="linear")
P13 = EllipticityParams(1.0, 3.0)
K2 = oscillating_kernel(1.0, 2)


def two_kernel_family():
    return OperatorFamily((KernelSpec.flat(1.0), K2),
                          (lambda x: np.sin(3 * x), lambda x: 0.5 * np.cos(2 * x) - 0.2), P13)


def cos_pi(R=1.0):
    return TailSpec.uniform(R, TailExpr.trig(1.0, math.pi))


def test_constant_data_gives_constant():
    p = DirichletProblem(TailSpec.uniform(1.0, TailExpr.constant(0.7)), 1 / 16, kernel=K2)
    u = solve_linear_dirichlet(p).solution
    assert np.max(np.abs(u.values - 0.7)) <= 1e-8


def test_odd_data_vanishes_at_zero():
    p = DirichletProblem(TailSpec.uniform(1.0, TailExpr.sign_sin(3)), 1 / 32, kernel=K2)
    u = solve_linear_dirichlet(p).solution
    assert abs(u(np.array([0.0]))[0]) <= 1e-8
    assert np.max(np.abs(u.values + u.values[::-1])) <= 1e-8


def test_oscillating_data_maximum_principle():
    p = DirichletProblem(exterior_data(2), 1 / 32, kernel=K2)
    assert np.max(np.abs(solve_linear_dirichlet(p).solution.values)) <= 1 + 1e-8


def test_solution_matches_evaluator():
    # the discrete operator is linear_apply with the linear scheme
    p = DirichletProblem(cos_pi(), 1 / 16, kernel=K2, c=lambda x: 0.3 * x)
    u = solve_linear_dirichlet(p).solution
    for x in p.x[1:-1]:
        assert abs(linear_apply(u, K2, x, LINEAR) + 0.3 * x) <= 1e-10


amp = st.floats(-1, 1)
nonneg = st.floats(0, 1)


@given(a=amp, d=nonneg, e=nonneg, c=st.floats(-1, 1))
def test_comparison(a, d, e, c):
    g1 = TailExpr.trig(a, math.pi)
    g2 = g1 + TailExpr.constant(d + e) + TailExpr.trig(e, math.pi)
    u1 = solve_linear_dirichlet(DirichletProblem(TailSpec.uniform(1.0, g1), 1 / 16, kernel=K2, c=c))
    u2 = solve_linear_dirichlet(DirichletProblem(TailSpec.uniform(1.0, g2), 1 / 16, kernel=K2, c=c))
    assert np.all(u1.solution.values <= u2.solution.values + 1e-12)


@given(m=st.integers(1, 6), a=st.floats(0.1, 2))
def test_maximum_principle(m, a):
    g = TailExpr.sign_sin(m).scale(a) + TailExpr.constant(0.25)
    u = solve_linear_dirichlet(DirichletProblem(TailSpec.uniform(1.0, g), 1 / 16, kernel=K2)).solution
    assert -a + 0.25 - 1e-10 <= u.values.min() and u.values.max() <= a + 0.25 + 1e-10


def test_family_of_one_is_linear():
    k = KernelSpec.smooth_cos(1.0, 2.0, 1.0, math.pi)
    fam = OperatorFamily((k,), (0.4,), P13)
    a = solve_bellman_dirichlet(DirichletProblem(cos_pi(), 1 / 16, family=fam)).solution
    b = solve_linear_dirichlet(DirichletProblem(cos_pi(), 1 / 16, kernel=k, c=0.4)).solution
    assert np.max(np.abs(a.values - b.values)) <= 1e-13


def test_howard_matches_enumeration():
    p = DirichletProblem(cos_pi(), 2 / 9, family=two_kernel_family(), tol=1e-12)
    assert p.N - 1 == 8
    rep = solve_bellman_dirichlet(p)
    brute = enumerate_policies(p)
    assert np.max(np.abs(rep.solution.values - brute.values)) <= 1e-10
    assert rep.iterations <= 8


def test_howard_values_nonincreasing():
    p = DirichletProblem(cos_pi(), 1 / 16, family=two_kernel_family(), tol=1e-12)
    rep = solve_bellman_dirichlet(p)
    systems = _family_systems(p)
    us = [_policy_solve(p, systems, np.array(pol)) for pol in rep.policy_trace]
    for a, b in zip(us[:-1], us[1:]):
        assert np.all(b <= a + 1e-12)


def test_bellman_residual_cross_check():
    fam = two_kernel_family()
    p = DirichletProblem(cos_pi(), 1 / 32, family=fam, tol=1e-10)
    u = solve_bellman_dirichlet(p).solution
    worst = max(abs(bellman_apply(u, fam, x, LINEAR)[0]) for x in p.x[1:-1])
    assert worst <= 5 * p.tol


def test_extremal_problem():
    p = DirichletProblem(exterior_data(2), 1 / 32, extremal="plus", params=EllipticityParams(1, 2),
                         sigma=1.0)
    u = solve_bellman_dirichlet(p).solution
    u0 = u(np.array([0.0]))[0]
    assert 0.0 <= u0 < 1.0
    with pytest.raises(Unsupported):
        DirichletProblem(cos_pi(), 1 / 16, extremal="plus", params=EllipticityParams(1, 2), sigma=1.0)


def tiny(d, fam, ext):
    return DirichletProblem(TailSpec.uniform(d, ext), d / 16, family=fam, radius=d, tol=1e-12)


def test_contraction_trivial_cases():
    ms = MollifierSpec(0.1)
    zero = OperatorFamily((oscillating_kernel(1.0, 4),), (0.0,), P13)
    r = solve_contraction(tiny(0.01, zero, TailExpr.zero()), ms)
    assert r.iterations == 1 and np.all(r.solution.values == 0.0)
    flat = OperatorFamily((KernelSpec.flat(1.0), KernelSpec.flat(1.0)), (0.0, lambda x: 0.3 + x), P13)
    r = solve_contraction(tiny(0.01, flat, TailExpr.trig(1.0, math.pi)), ms)
    assert r.iterations == 2


def test_contraction_matches_direct():
    fam = OperatorFamily((oscillating_kernel(1.0, 4), KernelSpec.smooth_cos(1.0, 2, 0.5, math.pi)),
                         (0.0, lambda x: 0.3 + x), P13)
    p = tiny(0.01, fam, TailExpr.trig(1.0, math.pi))
    ms = MollifierSpec(0.1)
    a = solve_contraction(p, ms)
    b = solve_tiny_ball_direct(p, ms)
    assert max(a.contraction_factors) < 0.5
    assert np.max(np.abs(a.solution.values - b.solution.values)) <= 10 * p.tol


def test_ball_updates():
    p = DirichletProblem(exterior_data(2), 1 / 32, kernel=K2, tol=1e-12)
    direct = solve_linear_dirichlet(p).solution
    same = ball_update_sweep(direct, p, 0.25, 1).solution
    assert np.max(np.abs(same.values - direct.values)) <= 1e-12
    rep = ball_update_sweep(p.as_grid_function(np.zeros(p.N - 1)), p, 0.25, 40)
    h = rep.residual_history
    assert all(b < a for a, b in zip(h[:6], h[1:6]))
    assert np.max(np.abs(rep.solution.values - direct.values)) <= 10 * p.tol


def test_barrier():
    zero = GridFunction.from_function(lambda x: 0 * x, 1.0, 1 / 64, TailSpec.uniform(1.0, TailExpr.zero()))
    assert barrier_check(zero, 0.1, (-1, 1))[0] == 0.0
    env = GridFunction.from_function(lambda x: (1 - np.abs(x)) ** 0.3, 1.0, 1 / 64,
                                     TailSpec.uniform(1.0, TailExpr.zero()))
    C, ok = barrier_check(env, 0.3, (-1, 1))
    assert C == pytest.approx(1.0, rel=0.02) and ok
    u = solve_linear_dirichlet(DirichletProblem(exterior_data(2), 1 / 32, kernel=K2)).solution
    C, ok = barrier_check(u, 0.1, (-1, 1))
    assert math.isfinite(C) and ok
