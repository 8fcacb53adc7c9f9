"""Pointwise evaluation of linear, extremal and Bellman nonlocal operators.

Every evaluation integrates a symmetric difference

    D(y) = sum_j c_j (u_j(p_j + y) + u_j(p_j - y) - 2 u_j(p_j)),   y > 0,

against a power-law kernel, so that ``int_R delta2 v(x, y) K(y) dy`` equals
``int_0^inf D(y) K(y) dy``.  A linear operator is one term at p = x; shifted
differences and the P/N quantities are several terms.  The y-axis is split in
three parts:

* ``(0, r0)``: Taylor term D ~ (sum c_j u_j''(p_j)) y^2, integrated exactly;
* ``(r0, Y)``: composite Gauss-Legendre on panels cut at every grid-node
  crossing, tail breakpoint, kernel jump and (for extremal operators) every
  sign change of D;
* ``(Y, inf)``: all terms sit in their last tail piece.  Polynomial parts are
  collected into one polynomial in y whose coefficients of degree >= sigma
  must cancel, otherwise :class:`DivergentTail`.  Periodic parts (sign
  patterns, cosines, periodic modulations) are folded onto one period with
  the Hurwitz zeta function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import BadMeasure, DivergentTail, OutOfDomain, Unsupported
from .grid import EllipticityParams, GridFunction, taylor_coeffs
from .kernels import Const, KernelSpec, check_L0
from .quad import (common_period, expand_phases, gauss_legendre, geometric_refine, panel_nodes,
                   periodic_nodes, periodic_window, power_integral, sign_change_points)

INF = math.inf


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs of the singular quadrature.

    r0 defaults to 4h for the cubic scheme and h for the linear scheme and
    must be at least 2h (cubic) or h (linear).  The
    linear scheme (piecewise-linear interpolation, second-difference Taylor
    term with r0 = h) reproduces the discrete operator of the solvers exactly.
    """

    r0: float | None = None
    tol: float = 1e-10
    scheme: str | None = None
    n_gl: int = 16

    def radius(self, u: GridFunction):
        r0 = self.r0
        if r0 is None:
            r0 = u.h if self.resolve(u) == "linear" else 4 * u.h
        floor = 1.0 if self.resolve(u) == "linear" else 2.0
        if r0 < floor * u.h * (1 - 1e-12):
            raise ValueError("r0 is too small for the grid spacing")
        return r0

    def resolve(self, u: GridFunction):
        return self.scheme or u.interp


@dataclass(frozen=True)
class OperatorFamily:
    """Indexed family of (kernel, coefficient) pairs defining inf_a (L_a u + c_a)."""

    kernels: tuple
    coeffs: tuple
    params: EllipticityParams

    def __post_init__(self):
        if len(self.kernels) == 0 or len(self.kernels) != len(self.coeffs):
            raise ValueError("need one coefficient per kernel and at least one member")
        for k in self.kernels:
            if not check_L0(k, self.params):
                raise ValueError("family member fails the L0 bounds")

    def c(self, a, x):
        c = self.coeffs[a]
        return float(c(x)) if callable(c) else float(c)

    def __len__(self):
        return len(self.kernels)


# ---------------------------------------------------------------- core integrator


@dataclass
class _Term:
    c: float
    u: GridFunction
    p: float


def _prepare(u, cfg):
    scheme = cfg.resolve(u)
    return u if u.interp == scheme else u.with_interp(scheme)


def _check_inside(t: _Term, r0):
    u = t.u
    if abs(t.p) > u.X - max(r0, u.h) * (1 - 1e-12) + 1e-15:
        raise OutOfDomain(f"x={t.p} is too close to the grid edge X={u.X}")


def _second_derivative(t: _Term):
    u = t.u
    h = u.h
    pts = np.array([t.p - h, t.p, t.p + h])
    v = u(pts)
    return (v[0] - 2 * v[1] + v[2]) / h ** 2


def _D(terms, y):
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape)
    for t in terms:
        out = out + t.c * (t.u(t.p + y) + t.u(t.p - y) - 2.0 * t.u0)
    return out


def near_weight(k: KernelSpec | None, sigma, r0):
    """int_0^r0 y^2 b(y) (2-sigma) y^(-1-sigma) dy."""
    if k is None:
        return r0 ** (2 - sigma)
    total = 0.0
    edges = np.concatenate([[0.0], k.breaks(0.0, r0), [r0]])
    for a, b in zip(edges[:-1], edges[1:]):
        piece = next(p for p in k.pieces if p.lo <= 0.5 * (a + b) < p.hi)
        if isinstance(piece.mod, Const):
            total += piece.mod.value * (b ** (2 - sigma) - a ** (2 - sigma))
        else:
            # y = (a^q + (b^q - a^q) t)^(1/q), q = 2 - sigma, removes the singular weight
            q = 2 - sigma
            tt, ww = gauss_legendre(16)
            t01 = 0.5 * (tt + 1)
            yy = (a ** q + (b ** q - a ** q) * t01) ** (1 / q)
            total += (b ** q - a ** q) * float(np.sum(0.5 * ww * piece.mod(yy)))
    return total


def _poly_fast_path(terms, sigma):
    """Exact evaluation when every term is a global polynomial.

    Only even Taylor coefficients of degree >= 2 survive in D; any of them
    makes the integral diverge at infinity, so the result is either exactly
    0 or DivergentTail.  Coefficients at rounding level of their inputs
    count as cancelled.
    """
    n = max(len(t.u.poly) for t in terms)
    q = np.zeros(n)
    mag = np.zeros(n)
    for t in terms:
        tc = taylor_coeffs(t.u.poly, t.p)
        even = tc.copy()
        even[1::2] = 0.0
        even[0] = 0.0
        q[: len(tc)] += 2.0 * t.c * even
        mag[: len(tc)] += 2.0 * abs(t.c) * np.abs(even)
    if np.all(np.abs(q) <= 64 * np.finfo(float).eps * mag):
        return 0.0
    raise DivergentTail("polynomial of degree >= 2 is not integrable against the kernel tail")


def _far_start(terms, k, r0):
    Y = r0
    for t in terms:
        tail = t.u.tail
        aR = tail.right[-1].lo
        bL = tail.left[0].hi
        Y = max(Y, aR - t.p, t.p - bL)
    if k is not None:
        Y = max(Y, k.far.lo)
    return Y


def _finite_breaks(terms, k, lo, hi):
    out = [np.array([lo, hi])]
    for t in terms:
        u = t.u
        xs = u.x
        # grid nodes crossed by p + y and p - y
        out.append(xs - t.p)
        out.append(t.p - xs)
        for piece in u.tail.pieces:
            for z in (piece.lo, piece.hi):
                if not math.isinf(z):
                    out.append(np.array([z - t.p, t.p - z]))
            a, b = piece.lo, piece.hi
            # jumps of p + y inside the piece, for y in (lo, hi)
            za, zb = max(a, t.p + lo), min(b, t.p + hi)
            if za < zb:
                out.append(piece.expr.jumps(za, zb) - t.p)
            za, zb = max(a, t.p - hi), min(b, t.p - lo)
            if za < zb:
                out.append(t.p - piece.expr.jumps(za, zb))
    if k is not None:
        out.append(k.breaks(lo, hi))
    e = np.unique(np.concatenate(out))
    e = e[(e >= lo) & (e <= hi)]
    # merge breakpoints closer than rounding noise
    keep = np.concatenate([[True], np.diff(e) > 1e-13 * np.maximum(1.0, e[1:])])
    e = e[keep]
    e[-1] = hi
    return e


def side_far_data(expr, p, direction, coef=1.0):
    """Far-field description of y -> coef * expr(p + direction * y).

    Returns (q, mag, funcs): polynomial coefficients in y, their magnitudes
    (for cancellation checks) and the non-polynomial terms as tuples
    (coef, callable of y, period, phases, original term).
    """
    q = taylor_coeffs(expr.poly_coeffs(), p)
    if direction < 0:
        q[1::2] *= -1.0
    funcs = []
    for c, term in expr.nonpoly():
        if direction > 0:
            sh = term.shift_by(p)
            funcs.append((coef * c, sh, sh.period, tuple(sh.phases()), term))
        else:
            funcs.append((coef * c, (lambda y, term=term, p=p: term(p - y)), term.period,
                          tuple(p - v for v in term.phases()), term))
    return coef * q, abs(coef) * np.abs(q), funcs


def merge_far_data(parts, const=0.0):
    """Sum several side_far_data results and add a constant."""
    n = max(len(q) for q, _, _ in parts)
    q = np.zeros(n)
    mag = np.zeros(n)
    funcs = []
    for qq, mm, ff in parts:
        q[: len(qq)] += qq
        mag[: len(mm)] += mm
        funcs.extend(ff)
    q[0] += const
    mag[0] += abs(const)
    return q, mag, funcs


def _far_pieces(terms):
    """Polynomial coefficients in y and non-polynomial callables for y beyond the far start."""
    parts = []
    const = 0.0
    for t in terms:
        parts.append(side_far_data(t.u.tail.right[-1].expr, t.p, +1, t.c))
        parts.append(side_far_data(t.u.tail.left[0].expr, t.p, -1, t.c))
        const -= 2.0 * t.c * t.u0
    return merge_far_data(parts, const)


def check_far_poly(q, mag, sigma):
    """Drop coefficients of degree >= sigma after checking that they cancel."""
    q = q.copy()
    for k in range(len(q)):
        if k >= sigma:
            if abs(q[k]) > 1e-11 * max(1.0, float(mag.max())):
                raise DivergentTail(f"tail grows like |y|^{k} with sigma={sigma}")
            q[k] = 0.0
    return q


def _gfunc(funcs):
    def g(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape)
        for c, f, *_ in funcs:
            out = out + c * f(y)
        return out
    return g


def far_linear(q, funcs, k: KernelSpec, Y, sigma):
    cs = 2.0 - sigma
    mod = k.far.mod
    total = 0.0
    periodic_mod = mod.period is not None
    for deg, qk in enumerate(q):
        if qk == 0.0:
            continue
        if not periodic_mod:
            total += qk * mod.value * cs * Y ** (deg - sigma) / (sigma - deg)
        else:
            t, w = periodic_nodes(Y, mod.period, mod.phases, 1 + sigma - deg)
            total += qk * cs * float(np.sum(w * mod(t)))
    if funcs:
        if any(f[2] is None for f in funcs):
            if periodic_mod:
                raise Unsupported("non-periodic tail against a periodic modulation")
            g = _gfunc(funcs)
            growth = max(f[4].growth for f in funcs)
            if growth >= sigma:
                raise DivergentTail("tail growth >= sigma")
            val, _ = quad(lambda y: float(g(np.array([y]))[0]) * y ** (-1 - sigma), Y, INF, limit=500)
            return total + mod.value * cs * val
        periods = [f[2] for f in funcs] + ([mod.period] if periodic_mod else [])
        P = common_period(periods)
        groups = [(f[3], f[2]) for f in funcs] + ([(mod.phases, mod.period)] if periodic_mod else [])
        phases = expand_phases(groups, P)
        g = _gfunc(funcs)
        t, w = periodic_nodes(Y, P, phases, 1 + sigma)
        total += cs * float(np.sum(w * g(t) * mod(t)))
    return total


def far_split(q, funcs, Y, sigma, wpos, wneg):
    cs = 2.0 - sigma
    phi = lambda d: wpos * np.maximum(d, 0.0) + wneg * np.minimum(d, 0.0)
    nz = np.nonzero(q)[0]
    if funcs and (nz.size and nz.max() > 0):
        raise Unsupported("sign split of a growing tail with oscillating part")
    if funcs:
        if any(f[2] is None for f in funcs):
            raise Unsupported("sign split of a non-periodic tail")
        P = common_period([f[2] for f in funcs])
        phases = expand_phases([(f[3], f[2]) for f in funcs], P)
        g0 = _gfunc(funcs)
        g = lambda y: g0(y) + q[0]
        window = geometric_refine(periodic_window(Y, P, phases))
        roots = sign_change_points(g, window, samples=33)
        t, w = periodic_nodes(Y, P, phases, 1 + sigma, extra_edges=roots)
        return cs * float(np.sum(w * phi(g(t))))
    # pure polynomial of degree < sigma: integrate up to the last real root, then in closed form
    if not np.any(q):
        return 0.0
    poly = np.polynomial.Polynomial(q)
    rts = sorted(r.real for r in poly.roots() if abs(r.imag) < 1e-12 and r.real > Y) if len(q) > 1 else []
    edges = [Y, *rts]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += cs * power_integral(lambda y: phi(poly(y)), a, b, 1 + sigma)
    a = edges[-1]
    w = wpos if poly(2.0 * a + 1.0) > 0 else wneg
    for deg, qk in enumerate(q):
        if qk:
            total += w * qk * cs * a ** (deg - sigma) / (sigma - deg)
    return total


def integrate_terms(terms: Sequence[_Term], sigma, *, kernel: KernelSpec | None = None,
                    split=None, cfg: QuadratureConfig = QuadratureConfig()):
    """int_0^inf D(y) K(y) dy (linear mode) or int_0^inf phi(D(y)) K0(y) dy (split mode).

    ``split = (wpos, wneg)`` gives phi(d) = wpos d^+ - wneg d^-.
    """
    if kernel is not None and split is not None:
        raise ValueError("choose either a kernel or a sign split")
    if kernel is not None:
        sigma = kernel.sigma
    if all(t.u.poly is not None for t in terms):
        return _poly_fast_path(terms, sigma)
    terms = [_Term(t.c, _prepare(t.u, cfg), t.p) for t in terms]
    r0 = max(cfg.radius(t.u) for t in terms)
    for t in terms:
        _check_inside(t, r0)
        t.u0 = float(t.u(np.array([t.p]))[0])
    cs = 2.0 - sigma
    wpos, wneg = split if split is not None else (1.0, 1.0)
    phi = (lambda d: d) if split is None else (lambda d: wpos * np.maximum(d, 0.0) + wneg * np.minimum(d, 0.0))

    # (0, r0): Taylor term
    u2 = sum(t.c * _second_derivative(t) for t in terms)
    near = float(phi(np.array([u2]))[0]) * near_weight(kernel, sigma, r0)

    # (r0, Y): panels
    Y = _far_start(terms, kernel, r0)
    edges = _finite_breaks(terms, kernel, r0, Y) if Y > r0 else np.array([r0])
    mid = 0.0
    if edges.size > 1:
        if split is not None:
            roots = sign_change_points(lambda y: _D(terms, y), edges)
            if roots.size:
                edges = np.unique(np.concatenate([edges, roots]))
        edges = geometric_refine(edges)
        y, w = panel_nodes(edges, cfg.n_gl)
        d = phi(_D(terms, y))
        kb = kernel.b(y) if kernel is not None else 1.0
        mid = float(np.sum(w * d * kb * cs * y ** (-1.0 - sigma)))

    # (Y, inf): closed forms
    q, mag, funcs = _far_pieces(terms)
    q = check_far_poly(q, mag, sigma)
    if kernel is not None:
        far = far_linear(q, funcs, kernel, Y, sigma)
    else:
        far = far_split(q, funcs, Y, sigma, wpos, wneg)
    return near + mid + far


# ---------------------------------------------------------------- public operations


def linear_apply(u: GridFunction, k: KernelSpec, x, cfg: QuadratureConfig = QuadratureConfig()):
    """L u(x) = int delta2 u(x, y) K(x, y) dy."""
    return k.xf(x) * integrate_terms([_Term(1.0, u, float(x))], k.sigma, kernel=k, cfg=cfg)


def _weights(sign, p: EllipticityParams):
    if sign in ("minus", "-", -1):
        return (p.lam, p.Lam)
    if sign in ("plus", "+", 1):
        return (p.Lam, p.lam)
    raise ValueError("sign must be 'plus' or 'minus'")


def extremal_apply(u: GridFunction, sign, p: EllipticityParams, x, sigma,
                   cfg: QuadratureConfig = QuadratureConfig()):
    """M^- u = int (lambda (d2)^+ - Lambda (d2)^-) K0 and M^+ with lambda, Lambda swapped."""
    return integrate_terms([_Term(1.0, u, float(x))], sigma, split=_weights(sign, p), cfg=cfg)


def bellman_apply(u: GridFunction, F: OperatorFamily, x, cfg: QuadratureConfig = QuadratureConfig()):
    """(inf_a (L_a u(x) + c_a(x)), lowest minimizing index)."""
    vals = np.array([linear_apply(u, k, x, cfg) + F.c(a, x) for a, k in enumerate(F.kernels)])
    a = int(np.argmin(vals))
    return float(vals[a]), a


def translation_difference_apply(u: GridFunction, h, sign, p: EllipticityParams, x, sigma,
                                 cfg: QuadratureConfig = QuadratureConfig()):
    """M^pm (u(. + h) - u)(x)."""
    terms = [_Term(1.0, u, float(x) + h), _Term(-1.0, u, float(x))]
    return integrate_terms(terms, sigma, split=_weights(sign, p), cfg=cfg)


def check_measure(mu, tol=1e-12):
    mu = [(float(hj), float(wj)) for hj, wj in mu]
    if not mu:
        raise BadMeasure("empty measure")
    w = np.array([wj for _, wj in mu])
    if np.any(w < 0):
        raise BadMeasure("negative weight")
    if abs(w.sum() - 1.0) > tol:
        raise BadMeasure(f"weights sum to {w.sum()}, not 1")
    return mu


def average_difference_apply(u: GridFunction, mu, p: EllipticityParams, x, sigma,
                             cfg: QuadratureConfig = QuadratureConfig()):
    """M^+ (sum_j w_j u(. + h_j) - u)(x) for a discrete probability measure mu."""
    mu = check_measure(mu)
    terms = [_Term(wj, u, float(x) + hj) for hj, wj in mu if wj != 0.0]
    terms.append(_Term(-1.0, u, float(x)))
    return integrate_terms(terms, sigma, split=_weights("plus", p), cfg=cfg)


def positive_negative_parts(u: GridFunction, x, base, sigma, cfg: QuadratureConfig = QuadratureConfig()):
    """(int (d2u(x,.) - d2u(base,.))^+ K0, int (...)^- K0) over the real line."""
    terms = [_Term(1.0, u, float(x)), _Term(-1.0, u, float(base))]
    P = integrate_terms(terms, sigma, split=(1.0, 0.0), cfg=cfg)
    N = -integrate_terms(terms, sigma, split=(0.0, 1.0), cfg=cfg)
    return P, N + 0.0
