import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonlocal_lab import (BadMeasure, EllipticityParams, GridFunction, KernelSpec, OperatorFamily,
                          QuadratureConfig, TailExpr, TailSpec, Unsupported, average_difference_apply,
                          bellman_apply, extremal_apply, linear_apply, oscillating_kernel,
                          translation_difference_apply)

P12 = EllipticityParams(1.0, 2.0)


def flat_symbol(s):
    """c with L cos = -c cos for the flat kernel: (2 - s) * 2 * int (1 - cos y) y^(-1-s) dy."""
    if s == 1.0:
        return math.pi
    return float(-(2 - s) * 2 * mpmath.gamma(-s) * mpmath.cos(mpmath.pi * s / 2))


def cos_u(h=1 / 64, X=10.0, freq=1.0, amp=1.0):
    return GridFunction.from_expr(TailExpr.trig(amp, freq), X, h)


def test_symbol_oracle_against_quadrature():
    # the closed form used below, checked once by direct oscillatory quadrature
    mpmath.mp.dps = 20
    for s in (0.5, 1.0, 1.5):
        f = lambda y: (1 - mpmath.cos(y)) * y ** (-1 - s)
        osc = mpmath.quadosc(lambda y: mpmath.cos(y) * y ** (-1 - s), [1, mpmath.inf], omega=1)
        val = mpmath.quad(f, [0, 1]) + 1 / mpmath.mpf(s) - osc
        assert flat_symbol(s) == pytest.approx(float((2 - s) * 2 * val), rel=1e-6)


def test_flat_cosine_examples(cos_grid):
    k = KernelSpec.flat(1.0)
    assert linear_apply(cos_grid, k, 0.0) == pytest.approx(-math.pi, abs=1e-4)
    assert abs(linear_apply(cos_grid, k, math.pi / 2)) < 1e-6


@pytest.mark.parametrize("s", [0.5, 1.5])
def test_flat_cosine_other_orders(s):
    u = cos_u(1 / 128)
    assert linear_apply(u, KernelSpec.flat(s), 0.3) == pytest.approx(-flat_symbol(s) * math.cos(0.3),
                                                                     rel=2e-5)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
def test_refinement_order(s):
    k = KernelSpec.flat(s)
    exact = -flat_symbol(s) * math.cos(0.3)
    e = [abs(linear_apply(cos_u(h, 8.0), k, 0.3) - exact) for h in (1 / 16, 1 / 32)]
    assert math.log2(e[0] / e[1]) >= 1.8


def test_affine_nullity():
    u = GridFunction.polynomial([0.7, -1.3], 6.0, 1 / 16)
    k = oscillating_kernel(1.0, 3)
    fam = OperatorFamily((KernelSpec.flat(1.0), k), (lambda x: 0.5 + x, 0.2), EllipticityParams(1, 3))
    for x in (-0.5, 0.0, 1.25):
        assert abs(linear_apply(u, k, x)) <= 1e-10
        for sgn in ("plus", "minus"):
            assert abs(extremal_apply(u, sgn, P12, x, 1.0)) <= 1e-10
        v, a = bellman_apply(u, fam, x)
        assert abs(v - min(0.5 + x, 0.2)) <= 1e-10


def test_extremal_cosine_at_pi(cos_grid):
    # delta2 cos(pi, y) = 1 - cos y >= 0, so only lambda acts
    assert extremal_apply(cos_grid, "minus", P12, math.pi, 1.0) == pytest.approx(math.pi, abs=1e-3)
    assert extremal_apply(cos_grid, "plus", P12, math.pi, 1.0) == pytest.approx(2 * math.pi, abs=2e-3)


def test_incommensurate_periods_unsupported():
    u = GridFunction.from_expr(TailExpr.trig(1.0, 2.0), 6.0, 1 / 16)
    with pytest.raises(Unsupported):
        linear_apply(u, oscillating_kernel(1.0, 1), 0.0)


def trig_poly(draw_coeffs):
    expr = TailExpr.zero()
    for j, (a, ph) in enumerate(draw_coeffs, start=1):
        expr = expr + TailExpr.trig(a, j * math.pi / 2, ph)
    return GridFunction.from_expr(expr, 8.0, 1 / 32)


coeffs = st.lists(st.tuples(st.floats(-1, 1), st.floats(0, 3)), min_size=1, max_size=3)
xs = st.floats(-1, 1)


@given(c1=coeffs, c2=coeffs, a=st.floats(-2, 2), x=xs)
def test_linear_in_u(c1, c2, a, x):
    k = oscillating_kernel(1.0, 2)
    u, v = trig_poly(c1), trig_poly(c2)
    lhs = linear_apply(u.combine(v, a, 1.0), k, x)
    rhs = a * linear_apply(u, k, x) + linear_apply(v, k, x)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))


@given(c1=coeffs, c2=coeffs, t=st.floats(0.1, 3), x=xs)
def test_extremal_structure(c1, c2, t, x):
    u, v = trig_poly(c1), trig_poly(c2)
    m = lambda w, s: extremal_apply(w, s, P12, x, 1.0)
    tol = 1e-8
    assert m(u.scale(t), "minus") == pytest.approx(t * m(u, "minus"), abs=tol * (1 + t))
    assert m(u, "plus") >= m(u, "minus") - tol
    s = u + v
    assert m(u, "minus") + m(v, "minus") <= m(s, "minus") + tol
    assert m(s, "minus") <= m(u, "minus") + m(v, "plus") + tol


@given(c1=coeffs, x=xs, m=st.integers(1, 4), base=st.floats(1.0, 2.0), amp=st.floats(0.0, 1.0))
def test_sandwich(c1, x, m, base, amp):
    u = trig_poly(c1)
    k = KernelSpec.oscillating(1.0, m, inner=base, base=base, amp=amp)
    p = EllipticityParams(1.0, 3.0)
    L = linear_apply(u, k, x)
    assert extremal_apply(u, "minus", p, x, 1.0) <= L + 1e-9
    assert L <= extremal_apply(u, "plus", p, x, 1.0) + 1e-9


@given(c1=coeffs, x=xs)
def test_bellman_below_every_member(c1, x):
    u = trig_poly(c1)
    ks = (KernelSpec.flat(1.0), oscillating_kernel(1.0, 2), KernelSpec.smooth_cos(1.0, 2, 0.5, math.pi))
    cs = (0.0, lambda y: 0.3 + y, -0.1)
    fam = OperatorFamily(ks, cs, EllipticityParams(1.0, 3.0))
    v, a = bellman_apply(u, fam, x)
    vals = [linear_apply(u, k, x) + fam.c(j, x) for j, k in enumerate(ks)]
    assert all(v <= w + 1e-14 for w in vals)
    assert v == vals[a]


def test_bellman_examples():
    # period-2 data so that it is commensurate with the sign-modulated kernel
    cos_grid = cos_u(1 / 64, freq=math.pi)
    k = oscillating_kernel(1.0, 2)
    one = OperatorFamily((k,), (0.25,), EllipticityParams(1, 3))
    assert bellman_apply(cos_grid, one, 0.4)[0] == pytest.approx(linear_apply(cos_grid, k, 0.4) + 0.25,
                                                                 abs=1e-15)
    flat = KernelSpec.flat(1.0)
    two = OperatorFamily((flat, flat), (0.0, 1.0), EllipticityParams(1, 1))
    v, a = bellman_apply(cos_grid, two, 0.4)
    assert a == 0 and v == linear_apply(cos_grid, flat, 0.4)
    # crossing costs on a 5-point grid against a brute-force per-point minimum
    k2 = KernelSpec.smooth_cos(1.0, 2, 1.0, math.pi)
    fam = OperatorFamily((flat, k2), (lambda y: y, lambda y: -y), EllipticityParams(1, 3))
    for x in np.linspace(-1, 1, 5):
        brute = min(linear_apply(cos_grid, flat, x) + x, linear_apply(cos_grid, k2, x) - x)
        assert bellman_apply(cos_grid, fam, x)[0] == brute


def test_translation_difference():
    q = GridFunction.polynomial([0.3, -1.0, 0.5], 8.0, 1 / 16)
    c = GridFunction.polynomial([2.0], 8.0, 1 / 16)
    for sgn in ("plus", "minus"):
        for x in (0.0, 0.7):
            assert translation_difference_apply(q, 0.8, sgn, P12, x, 1.0) == 0.0
            assert translation_difference_apply(c, 0.8, sgn, P12, x, 1.0) == 0.0
    u = cos_u(1 / 64)
    w = cos_u(1 / 64, amp=-2.0)
    for sgn in ("plus", "minus"):
        for x in (0.0, 0.4):
            a = translation_difference_apply(u, math.pi, sgn, P12, x, 1.0)
            assert a == pytest.approx(extremal_apply(w, sgn, P12, x, 1.0), abs=1e-6)


def test_average_difference():
    q = GridFunction.polynomial([0.3, -1.0, 0.5], 8.0, 1 / 16)
    u = cos_u(1 / 64)
    assert abs(average_difference_apply(u, [(0.0, 1.0)], P12, 0.2, 1.0)) <= 1e-15
    mu = [(0.5, 0.25), (-1.5, 0.75)]
    assert average_difference_apply(q, mu, P12, 0.2, 1.0) == 0.0
    h = 0.7
    w = cos_u(1 / 64, amp=math.cos(h) - 1.0)
    for x in (0.0, 0.9):
        a = average_difference_apply(u, [(h, 0.5), (-h, 0.5)], P12, x, 1.0)
        assert a == pytest.approx(extremal_apply(w, "plus", P12, x, 1.0), abs=1e-6)
    with pytest.raises(BadMeasure):
        average_difference_apply(u, [(0.1, 0.7)], P12, 0.0, 1.0)
    with pytest.raises(BadMeasure):
        average_difference_apply(u, [(0.1, 1.5), (0.2, -0.5)], P12, 0.0, 1.0)


def test_quadrature_radius_guard(cos_grid):
    with pytest.raises(ValueError):
        linear_apply(cos_grid, KernelSpec.flat(1.0), 0.0, QuadratureConfig(r0=cos_grid.h))


def piecewise_constant_oracle(m, km, x, s, Y=4000.0):
    """L u2(x) for u2 = sign sin(m pi .) outside [-1, 1] and 0 inside, K = K_km, by exact
    integration of the piecewise-constant integrand between all breakpoints up to Y."""
    br = [np.arange(-1, Y * m + 2) / m - x, x - np.arange(-Y * m - 2, 2) / m,
          (np.arange(0, km * Y + 2) + 0.5) / km, [1.0, 1.0 - x, 1.0 + x, Y, Y - 2.0]]
    e = np.unique(np.concatenate(br))
    e = e[(e > 0) & (e <= Y)]
    lo, hi = e[:-1], e[1:]
    mid = 0.5 * (lo + hi)
    g = lambda z: np.where(np.abs(z) > 1, np.sign(np.sin(m * np.pi * z)), 0.0)
    b = np.where(mid < 1, 1.0, 2.0 + np.sign(np.cos(km * np.pi * mid)))
    mass = (2 - s) * (lo ** -s - hi ** -s) / s
    f = (g(x + mid) + g(x - mid)) * b
    # beyond Y the integrand is 2-periodic; its period mean times the power-law mass
    # leaves an error of order Y^(-1-s)
    last = lo >= Y - 2.0
    mean = float(np.sum(f[last] * (hi - lo)[last])) / 2.0
    return float(np.sum(f * mass)) + mean * (2 - s) * Y ** -s / s


@pytest.mark.parametrize("m", [2, 3, 5])
def test_mixed_period_tail_against_exact_sum(m):
    u2 = GridFunction(1.0, 1 / 32, np.zeros(65), TailSpec.uniform(1.0, TailExpr.sign_sin(m)), "linear")
    k = oscillating_kernel(1.0, 2)
    for x in (0.25, -0.5):
        got = linear_apply(u2, k, x, QuadratureConfig(scheme="linear"))
        assert got == pytest.approx(piecewise_constant_oracle(m, 2, x, 1.0), abs=1e-6)
