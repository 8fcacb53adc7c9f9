"""Quadrature building blocks for power-law weights.

Everything here integrates against y**(-s) on subsets of (0, inf).  Finite
ranges use composite Gauss-Legendre on panels whose width never exceeds their
distance from the origin.  Semi-infinite ranges with periodic integrands are
folded onto one period with the Hurwitz zeta function, which turns the sum
over infinitely many periods into a single smooth weight.
"""
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np
from scipy.optimize import brentq
from scipy.special import zeta

from .errors import Unsupported

GL_ORDER = 16


@lru_cache(maxsize=None)
def gauss_legendre(n=GL_ORDER):
    t, w = np.polynomial.legendre.leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def panel_nodes(edges, n=GL_ORDER):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    t, w = gauss_legendre(n)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * t[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def geometric_refine(edges, ratio=1.0):
    """Split panels so that width <= ratio * left endpoint (left endpoint > 0)."""
    edges = np.asarray(edges, dtype=float)
    out = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= ratio * a or a <= 0:
            out.append(np.array([b]))
            continue
        pts = []
        x = a
        while b - x > ratio * x:
            x = x * (1.0 + ratio)
            pts.append(x)
        pts.append(b)
        out.append(np.array(pts))
    return np.concatenate(out)


def power_moment(a, b, q):
    """Integral of y**(q - 1) over [a, b] for 0 < a <= b <= inf (q may be <= 0)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if q == 0:
        return np.log(b / a)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        bq = np.where(np.isinf(b), 0.0, np.power(b, q))
        if q > 0 and np.any(np.isinf(b)):
            raise ValueError("divergent moment")
        return (bq - np.power(a, q)) / q


def common_period(periods, max_den=256, rtol=1e-12):
    """Smallest common period of a list of positive periods, or raise."""
    periods = [p for p in periods if p is not None]
    if not periods:
        return None
    base = periods[0]
    num = 1
    for p in periods[1:]:
        fr = Fraction(p / base).limit_denominator(max_den)
        if abs(float(fr) * base - p) > rtol * p:
            raise Unsupported("tail periods are incommensurate")
        num = num * fr.numerator // gcd(num, fr.numerator)
    return base * num


def expand_phases(groups, period):
    """Replicate each group's phases, known modulo its own period, across the common ``period``."""
    out = []
    for phases, own in groups:
        reps = max(1, int(round(period / own))) if own else 1
        out.extend(ph + j * own for ph in phases for j in range(reps))
    return out


def periodic_window(Y, period, phases):
    """Edges of one period window [Y, Y + period] split at the given phases."""
    phases = np.asarray(list(phases), dtype=float)
    if phases.size:
        off = np.mod(phases - Y, period)
        off = off[(off > 1e-14 * period) & (off < period * (1 - 1e-14))]
        pts = np.unique(Y + off)
    else:
        pts = np.empty(0)
    return np.concatenate([[Y], pts, [Y + period]])


def periodic_nodes(Y, period, phases, s, n=GL_ORDER, extra_edges=()):
    """Nodes t and weights w with sum(w * f(t)) = int_Y^inf f(y) y**(-s) dy.

    f must be ``period``-periodic and smooth between the given phases.
    Requires s > 1 so that the Hurwitz zeta series converges.
    """
    if s <= 1:
        raise ValueError("periodic folding needs s > 1")
    edges = periodic_window(Y, period, phases)
    if len(extra_edges):
        edges = np.unique(np.concatenate([edges, np.asarray(extra_edges, float)]))
    edges = geometric_refine(edges)
    t, w = panel_nodes(edges, n)
    return t, w * period ** (-s) * zeta(s, t / period)


def power_integral(f, a, b, s, breaks=(), n=GL_ORDER):
    """Integral of f(y) y**(-s) over finite [a, b] with 0 < a, f smooth between breaks."""
    if b <= a:
        return 0.0
    br = np.asarray(list(breaks), dtype=float)
    br = br[(br > a) & (br < b)]
    edges = geometric_refine(np.concatenate([[a], np.sort(br), [b]]))
    t, w = panel_nodes(edges, n)
    return float(np.sum(w * f(t) * t ** (-s)))


def sign_change_points(f, edges, samples=9, xtol=1e-14):
    """Roots of f inside each panel, located by sampling then Brent's method.

    f must be vectorized and continuous inside each panel (jumps only at the
    edges).  Roots closer together than the sampling step can be missed.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return np.empty(0)
    u = np.linspace(0.0, 1.0, samples)
    pad = 1e-13 * np.maximum(1.0, np.abs(b))
    lo, hi = a + pad, b - pad
    xs = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    fs = np.asarray(f(xs.ravel()), dtype=float).reshape(xs.shape)
    sg = np.sign(fs)
    rows, cols = np.nonzero(sg[:, :-1] * sg[:, 1:] < 0)
    g = lambda t: float(f(np.array([t]))[0])
    roots = [brentq(g, xs[r, c], xs[r, c + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
             for r, c in zip(rows, cols)]
    return np.asarray(roots)
