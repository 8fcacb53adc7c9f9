import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonlocal_lab import (EllipticityParams, KernelSpec, MollifierSpec, NonHolderKernel,
                          SingularArgument, check_L0, check_x_holder, check_y_holder_tail,
                          kernel_eval, kernel_from_json, mollified_ellipticity, mollify_coeff,
                          mollify_kernel, oscillating_kernel)
from nonlocal_lab.kernels import eta


def test_kernel_eval_examples():
    assert kernel_eval(KernelSpec.flat(1.0), 0.0, 2.0) == pytest.approx(0.25, abs=1e-15)
    # cos(3 pi) = -1 so the modulation is 2 - 1
    assert kernel_eval(oscillating_kernel(1.0, 2), 0.0, 1.5) == pytest.approx(1 / 1.5 ** 2, abs=1e-14)
    with pytest.raises(SingularArgument):
        kernel_eval(KernelSpec.flat(1.0), 0.0, 0.0)


@given(y=st.floats(0.01, 50), m=st.integers(1, 8), s=st.floats(0.1, 1.9))
def test_kernel_even_and_pinched(y, m, s):
    k = oscillating_kernel(s, m)
    p = EllipticityParams(1.0, 3.0)
    assert check_L0(k, p)
    a, b = kernel_eval(k, 0.3, y), kernel_eval(k, 0.3, -y)
    assert a == b
    env = (2 - s) * y ** (-1 - s)
    assert p.lam * env * (1 - 1e-12) <= a <= p.Lam * env * (1 + 1e-12)


def test_check_L0_examples():
    assert check_L0(KernelSpec.flat(1.0), EllipticityParams(1.0, 1.0))
    assert check_L0(oscillating_kernel(1.0, 4), EllipticityParams(1.0, 3.0))
    bad = check_L0(oscillating_kernel(1.0, 4), EllipticityParams(1.0, 2.0))
    assert not bad
    w = bad.witness
    assert w is not None and math.cos(4 * math.pi * w) > 0


def test_check_x_holder():
    assert check_x_holder(oscillating_kernel(1.0, 2), 0.2, 0.0, 1.0, 0.5) == 0.0
    k = KernelSpec(1.0, KernelSpec.flat(1.0).pieces, xfactor=lambda x: 1 + min(1.0, abs(x) ** 0.5))
    for r in (0.25, 1.0, 3.0):
        assert check_x_holder(k, 0.2, 0.0, r, 0.5) == pytest.approx(1.0, rel=1e-10)


def test_check_y_holder_tail():
    flat = KernelSpec.flat(1.0)
    v1 = check_y_holder_tail(flat, 1.0, 0.5)
    # the power law satisfies the scale-invariant bound with a rho-free constant
    assert 0 < v1 <= 1.0
    assert check_y_holder_tail(flat, 3.0, 0.5) == pytest.approx(v1, rel=1e-10)
    with pytest.raises(NonHolderKernel):
        check_y_holder_tail(oscillating_kernel(1.0, 4), 1.0, 0.5)
    v = check_y_holder_tail(KernelSpec.smooth_cos(1.0, 2.0, 1.0, 1.0), 1.0, 0.5)
    assert math.isfinite(v) and v > 0


def test_mollify_kernel_inner_region_exact():
    k = oscillating_kernel(1.0, 4)
    ms = MollifierSpec(0.1)
    for y in (0.05, 0.2, -0.13):
        assert mollify_kernel(k, ms, 0.0, y) == (2 - 1.0) * abs(y) ** -2.0


def test_mollify_flat_far_matches_convolution():
    e = 0.05
    y = 10 * e
    mpmath.mp.dps = 30
    bump = lambda t: mpmath.exp(-1 / (1 - t * t))
    mass = mpmath.quad(bump, [-1, 1])
    conv = mpmath.quad(lambda t: bump(t) / mass * (y - e * t) ** -2, [-1, 0, 1])
    got = mollify_kernel(KernelSpec.flat(1.0), MollifierSpec(e), 0.0, y)
    assert got == pytest.approx(float(conv), rel=1e-6)
    assert got == pytest.approx(y ** -2, rel=0.01)


def test_mollified_ellipticity_stable():
    k = oscillating_kernel(1.0, 4)
    p = EllipticityParams(1.0, 3.0)
    Cs = []
    for e in (0.2, 0.1, 0.05):
        r = mollified_ellipticity(k, MollifierSpec(e), p)
        assert r["L0"]
        Cs.append(r["C"])
    assert max(Cs) <= 1.05 * min(Cs)


def test_mollify_coeff():
    ms = MollifierSpec(0.1)
    assert mollify_coeff(lambda x: np.full(np.shape(x), 2.5), ms, 0.3) == pytest.approx(2.5, abs=1e-12)
    assert mollify_coeff(lambda x: x, ms, 0.3) == pytest.approx(0.3, abs=1e-12)
    v = mollify_coeff(np.abs, ms, 0.0, breaks=(0.0,))
    oracle = 2 * mpmath.quad(lambda t: t * mpmath.exp(-1 / (1 - t * t)), [0, 1]) \
        / mpmath.quad(lambda t: mpmath.exp(-1 / (1 - t * t)), [-1, 1]) * 0.1
    assert v == pytest.approx(float(oracle), rel=1e-8)


def test_eta_unit_mass():
    t = np.linspace(-1, 1, 20001)
    assert np.trapezoid(eta(t), t) == pytest.approx(1.0, abs=1e-6)


def test_kernel_json_roundtrip():
    for k in (KernelSpec.flat(0.7), oscillating_kernel(1.3, 5), KernelSpec.smooth_cos(1.0, 2, 0.5, 3.0),
              KernelSpec.piecewise(1.0, [0.5, 2.0], [1.0, 2.0, 1.5])):
        back = kernel_from_json(k.to_json())
        ys = np.linspace(0.1, 7, 70)
        assert np.array_equal(back.b(ys), k.b(ys)) and back.sigma == k.sigma
    with pytest.raises(ValueError):
        kernel_from_json({"sigma": 2.5})
