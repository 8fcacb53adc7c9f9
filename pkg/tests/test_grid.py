import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonlocal_lab import (DivergentTail, GridFunction, OutOfStencil, TailExpr, TailSpec, delta2,
                          finite_diff_derivative, weighted_l1_norm)
from nonlocal_lab.grid import EllipticityParams, HolderExponents

coef = st.floats(-3, 3, allow_nan=False)
pt = st.floats(-2, 2, allow_nan=False)


def test_delta2_examples(cos_grid):
    sq = GridFunction.polynomial([0, 0, 1], 4.0, 1 / 16)
    assert delta2(sq, 0.7, 0.3) == pytest.approx(0.09, abs=1e-15)
    aff = GridFunction.polynomial([1.5, -2.0], 4.0, 1 / 16)
    assert abs(delta2(aff, 0.3, 1.1)) < 1e-15
    # u(x+y)+u(x-y)-2u(x) at x=0, y=1 is 2(cos 1 - 1); delta2 carries the 1/2
    assert delta2(cos_grid, 0.0, 1.0) == pytest.approx(math.cos(1.0) - 1.0, abs=1e-8)


@given(x=pt, y=pt)
def test_delta2_even_in_y(cos_grid, x, y):
    assert delta2(cos_grid, x, y) == pytest.approx(delta2(cos_grid, x, -y), abs=1e-14)


@given(a=coef, b=coef, x=pt, y=pt)
def test_delta2_linear(a, b, x, y):
    X, h = 6.0, 1 / 32
    u = GridFunction.from_expr(TailExpr.trig(1.0, 1.3), X, h)
    v = GridFunction.from_expr(TailExpr.poly([0.1, 0.0, -0.4]), X, h)
    w = u.combine(v, a, b)
    lhs = delta2(w, x, y)
    rhs = a * delta2(u, x, y) + b * delta2(v, x, y)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + abs(a) + abs(b)))


def test_weighted_l1_examples():
    one = GridFunction.from_expr(TailExpr.constant(1.0), 4.0, 1 / 16)
    assert weighted_l1_norm(one, 1.0) == pytest.approx(2.0, rel=1e-10)
    zero = GridFunction.from_expr(TailExpr.zero(), 4.0, 1 / 16)
    assert weighted_l1_norm(zero, 1.0) == 0.0
    ab = GridFunction.from_expr(TailExpr.abs_power(1.0), 4.0, 1 / 16)
    with pytest.raises(DivergentTail):
        weighted_l1_norm(ab, 0.5)


@given(c=st.floats(-5, 5, allow_nan=False), s=st.floats(0.2, 1.8))
def test_weighted_l1_homogeneous(c, s):
    u = GridFunction.from_expr(TailExpr.trig(1.0, 2.0) + TailExpr.constant(0.3), 4.0, 1 / 16)
    assert weighted_l1_norm(u.scale(c), s) == pytest.approx(abs(c) * weighted_l1_norm(u, s),
                                                            rel=1e-9, abs=1e-14)


def test_finite_differences():
    sq = GridFunction.polynomial([0, 0, 1], 2.0, 1 / 8)
    for x in (-1.0, 0.0, 0.625):
        assert finite_diff_derivative(sq, 2, x) == pytest.approx(2.0, abs=1e-12)
    lin = GridFunction.polynomial([0, 1], 2.0, 1 / 8)
    assert finite_diff_derivative(lin, 1, 0.5) == pytest.approx(1.0, abs=1e-14)
    s = GridFunction.from_function(np.sin, 1.0, 2.0 ** -10)
    assert abs(finite_diff_derivative(s, 1, 0.0) - 1.0) < 1e-6
    with pytest.raises(OutOfStencil):
        finite_diff_derivative(sq, 2, 2.0)


@given(x=st.floats(-50, 50, allow_nan=False), m=st.integers(1, 9))
def test_sign_sin_tail_is_unit(x, m):
    v = TailExpr.sign_sin(m)(np.array([x]))[0]
    if abs(math.sin(m * math.pi * x)) > 1e-9:
        assert v in (-1.0, 1.0)


def test_tail_json_roundtrip():
    z, s = TailExpr.zero(), TailExpr.sign_sin(3)
    t = TailSpec.symmetric(1.0, [2.0], [z, s], [z, s])
    back = TailSpec.from_json(t.to_json())
    ys = np.linspace(-9, 9, 181)
    ys = ys[np.abs(ys) > 1]
    assert np.array_equal(back(ys), t(ys))


def test_parameter_records_validate():
    with pytest.raises(ValueError):
        EllipticityParams(2.0, 1.0)
    with pytest.raises(ValueError):
        HolderExponents(2.5, 0.1, 0.05, 2)
    with pytest.raises(ValueError):
        GridFunction(1.0, 0.3, np.zeros(7), TailSpec.uniform(1.0, TailExpr.zero()))
