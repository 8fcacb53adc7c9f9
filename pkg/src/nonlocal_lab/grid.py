"""Grid functions with analytic exterior tails.

A :class:`GridFunction` stores samples on a uniform grid symmetric about the
origin and describes the function outside the grid by a :class:`TailSpec`, a
list of intervals each carrying a closed-form expression.  Expressions are
linear combinations of a few term types (polynomials, sign patterns,
cosines, absolute powers) that stay closed under shifting and scaling, which
is what the operator evaluators need to integrate tails exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DivergentTail, IntegerOrder, OutOfStencil
from .quad import (common_period, expand_phases, panel_nodes, periodic_nodes, periodic_window,
                   sign_change_points)

INF = math.inf


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Poly:
    """Polynomial with ascending coefficients in the global variable."""

    coeffs: tuple

    def __post_init__(self):
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(float(v) for v in (c or [0.0])))

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)

    def shift(self, s):
        return Poly(tuple(taylor_coeffs(self.coeffs, s)))

    @property
    def degree(self):
        return len(self.coeffs) - 1 if any(self.coeffs) else -1

    period = None
    growth = property(lambda self: max(self.degree, 0))

    def phases(self):
        return ()

    def jumps(self, lo, hi):
        return np.empty(0)

    def to_json(self):
        return {"kind": "poly", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class SignSin:
    """sign(sin(m pi (x - shift))), with value 0 on the zero set."""

    m: float
    shift: float = 0.0

    def __call__(self, x):
        t = self.m * (np.asarray(x, dtype=float) - self.shift)
        k = np.floor(t)
        r = t - np.round(t)
        out = np.where(np.mod(k, 2) == 0, 1.0, -1.0)
        return np.where(np.abs(r) <= 1e-12 * np.maximum(1.0, np.abs(t)), 0.0, out)

    def shift_by(self, s):
        return SignSin(self.m, self.shift - s)

    @property
    def period(self):
        return 2.0 / self.m

    growth = 0

    def phases(self):
        return (self.shift, self.shift + 1.0 / self.m)

    def jumps(self, lo, hi):
        k0 = math.ceil((lo - self.shift) * self.m)
        k1 = math.floor((hi - self.shift) * self.m)
        return self.shift + np.arange(k0, k1 + 1) / self.m

    def to_json(self):
        return {"kind": "sign_sin", "m": self.m, "shift": self.shift}


@dataclass(frozen=True)
class Cos:
    """cos(freq x + phase)."""

    freq: float
    phase: float = 0.0

    def __call__(self, x):
        return np.cos(self.freq * np.asarray(x, dtype=float) + self.phase)

    def shift_by(self, s):
        return Cos(self.freq, self.phase + self.freq * s)

    @property
    def period(self):
        return 2.0 * math.pi / self.freq

    growth = 0

    def phases(self):
        return ()

    def jumps(self, lo, hi):
        return np.empty(0)

    def to_json(self):
        return {"kind": "cos", "freq": self.freq, "phase": self.phase}


@dataclass(frozen=True)
class AbsPower:
    """|x - center|**p."""

    p: float
    center: float = 0.0

    def __call__(self, x):
        return np.abs(np.asarray(x, dtype=float) - self.center) ** self.p

    def shift_by(self, s):
        return AbsPower(self.p, self.center - s)

    period = None

    @property
    def growth(self):
        return self.p

    def phases(self):
        return ()

    def jumps(self, lo, hi):
        return np.array([self.center]) if lo < self.center < hi else np.empty(0)

    def to_json(self):
        return {"kind": "abs_power", "p": self.p, "center": self.center}


@dataclass(frozen=True)
class Func:
    """Arbitrary vectorized callable; usable only on bounded tail pieces."""

    f: Callable
    offset: float = 0.0

    def __call__(self, x):
        return np.asarray(self.f(np.asarray(x, dtype=float) + self.offset), dtype=float)

    def shift_by(self, s):
        return Func(self.f, self.offset + s)

    period = None
    growth = INF

    def phases(self):
        return ()

    def jumps(self, lo, hi):
        return np.empty(0)

    def to_json(self):
        raise ValueError("callable tail terms are not serializable")


def _shift_term(term, s):
    if isinstance(term, Poly):
        return term.shift(s)
    return term.shift_by(s)


def taylor_coeffs(coeffs, p):
    """Coefficients in y of P(p + y) for P with ascending coefficients."""
    c = np.asarray(coeffs, dtype=float)
    n = len(c)
    out = np.zeros(n)
    for k in range(n):
        acc = 0.0
        for j in range(n - 1, k - 1, -1):
            acc = acc * p + math.comb(j, k) * c[j]
        out[k] = acc
    return out


def _term_from_json(d):
    kind = d["kind"]
    if kind == "poly":
        return Poly(tuple(d["coeffs"]))
    if kind == "sign_sin":
        return SignSin(float(d["m"]), float(d.get("shift", 0.0)))
    if kind == "sign_cos":
        m = float(d["m"])
        return SignSin(m, float(d.get("shift", 0.0)) - 0.5 / m)
    if kind == "cos":
        return Cos(float(d["freq"]), float(d.get("phase", 0.0)))
    if kind == "sin":
        return Cos(float(d["freq"]), float(d.get("phase", 0.0)) - math.pi / 2)
    if kind == "abs_power":
        return AbsPower(float(d["p"]), float(d.get("center", 0.0)))
    raise ValueError(f"unknown tail term kind {kind!r}")


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class TailExpr:
    """Finite linear combination sum(coef * term)."""

    terms: tuple = ()

    @staticmethod
    def zero():
        return TailExpr(((1.0, Poly((0.0,))),))

    @staticmethod
    def constant(k):
        return TailExpr(((1.0, Poly((float(k),))),))

    @staticmethod
    def poly(coeffs):
        return TailExpr(((1.0, Poly(tuple(coeffs))),))

    @staticmethod
    def sign_sin(m, shift=0.0):
        return TailExpr(((1.0, SignSin(float(m), float(shift))),))

    @staticmethod
    def sign_cos(m):
        return TailExpr(((1.0, SignSin(float(m), -0.5 / m)),))

    @staticmethod
    def trig(amp, freq, phase=0.0):
        return TailExpr(((float(amp), Cos(float(freq), float(phase))),))

    @staticmethod
    def abs_power(p, center=0.0):
        return TailExpr(((1.0, AbsPower(float(p), float(center))),))

    @staticmethod
    def callable(f):
        return TailExpr(((1.0, Func(f)),))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, t in self.terms:
            out = out + c * t(x)
        return out

    def shift(self, s):
        return TailExpr(tuple((c, _shift_term(t, s)) for c, t in self.terms))

    def scale(self, a):
        return TailExpr(tuple((a * c, t) for c, t in self.terms))

    def __add__(self, other):
        return TailExpr(self.terms + other.terms)

    def poly_coeffs(self):
        """Ascending coefficients of the polynomial part."""
        out = np.zeros(1)
        for c, t in self.terms:
            if isinstance(t, Poly):
                pc = c * np.asarray(t.coeffs)
                if len(pc) > len(out):
                    out = np.concatenate([out, np.zeros(len(pc) - len(out))])
                out[: len(pc)] += pc
        return out

    def nonpoly(self):
        return tuple((c, t) for c, t in self.terms if not isinstance(t, Poly) and c != 0)

    @property
    def growth(self):
        g = 0.0
        pc = self.poly_coeffs()
        nz = np.nonzero(pc)[0]
        if nz.size:
            g = float(nz[-1])
        for c, t in self.nonpoly():
            g = max(g, t.growth)
        return g

    @property
    def periods(self):
        return [t.period for c, t in self.nonpoly() if t.period is not None]

    def phases(self):
        out = []
        for c, t in self.nonpoly():
            out.extend(t.phases())
        return out

    def jumps(self, lo, hi):
        js = [t.jumps(lo, hi) for c, t in self.terms]
        return np.unique(np.concatenate(js)) if js else np.empty(0)

    def is_piecewise_constant(self):
        return all(isinstance(t, SignSin) or (isinstance(t, Poly) and t.degree <= 0)
                   for c, t in self.terms)

    def value_set(self):
        """All values taken by a piecewise-constant expression."""
        base = float(self.poly_coeffs()[0])
        vals = {base}
        for c, t in self.nonpoly():
            vals = {v + c * s for v in vals for s in (-1.0, 0.0, 1.0)}
        return sorted(vals)

    def to_json(self):
        pc = self.poly_coeffs()
        np_terms = self.nonpoly()
        if not np_terms and len(pc) == 1:
            return "zero" if pc[0] == 0 else f"constant({pc[0]!r})"
        if (len(np_terms) == 1 and not np.any(pc) and np_terms[0][0] == 1.0
                and isinstance(np_terms[0][1], SignSin) and np_terms[0][1].shift == 0.0):
            return f"sign_sin({np_terms[0][1].m!r})"
        return {"terms": [dict(coef=c, **t.to_json()) for c, t in self.terms]}

    @staticmethod
    def from_json(obj):
        if isinstance(obj, (int, float)):
            return TailExpr.constant(obj)
        if isinstance(obj, str):
            s = obj.strip()
            if s == "zero":
                return TailExpr.zero()
            name, _, arg = s.partition("(")
            arg = arg.rstrip(")")
            if name == "constant":
                return TailExpr.constant(float(arg))
            if name == "sign_sin":
                return TailExpr.sign_sin(float(arg))
            if name == "sign_cos":
                return TailExpr.sign_cos(float(arg))
            raise ValueError(f"unknown tail formula {obj!r}")
        terms = tuple((float(d.get("coef", 1.0)), _term_from_json(d)) for d in obj["terms"])
        return TailExpr(terms)


# ---------------------------------------------------------------- tail spec


@dataclass(frozen=True)
class TailPiece:
    lo: float
    hi: float
    expr: TailExpr


@dataclass(frozen=True)
class TailSpec:
    """Pieces covering R minus (-X, X); left pieces end at -X, right ones start at X."""

    pieces: tuple

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(sorted(self.pieces, key=lambda p: p.lo)))

    @staticmethod
    def uniform(X, expr):
        return TailSpec((TailPiece(-INF, -X, expr), TailPiece(X, INF, expr)))

    @staticmethod
    def symmetric(X, breaks, exprs_right, exprs_left):
        """Pieces with mirrored breakpoints X < b_1 < ... on both sides."""
        edges = [X, *breaks, INF]
        right = [TailPiece(a, b, e) for a, b, e in zip(edges[:-1], edges[1:], exprs_right)]
        left = [TailPiece(-b, -a, e) for a, b, e in zip(edges[:-1], edges[1:], exprs_left)]
        return TailSpec(tuple(left + right))

    @property
    def left(self):
        return [p for p in self.pieces if p.hi <= 0]

    @property
    def right(self):
        return [p for p in self.pieces if p.lo >= 0]

    def validate(self, X, tol=1e-12):
        left, right = self.left, self.right
        if not left or not right:
            raise ValueError("tail must have pieces on both sides")
        if left[0].lo != -INF or right[-1].hi != INF:
            raise ValueError("tail must reach infinity on both sides")
        if abs(left[-1].hi + X) > tol or abs(right[0].lo - X) > tol:
            raise ValueError("tail must start at the grid edge")
        for side in (left, right):
            for p, q in zip(side[:-1], side[1:]):
                if abs(p.hi - q.lo) > tol:
                    raise ValueError("tail pieces leave a gap or overlap")
            for p in side:
                if not p.lo < p.hi:
                    raise ValueError("empty tail piece")
        return True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.nan)
        for p in self.right:
            sel = (x >= p.lo) & (x < p.hi) if p.hi < INF else (x >= p.lo)
            if np.any(sel):
                out[sel] = p.expr(x[sel])
        for p in self.left:
            sel = (x > p.lo) & (x <= p.hi) if p.lo > -INF else (x <= p.hi)
            if np.any(sel):
                out[sel] = p.expr(x[sel])
        return out

    def bound(self):
        """Sup of |tail| when every piece is bounded, else inf."""
        m = 0.0
        for p in self.pieces:
            e = p.expr
            if e.growth > 0 and (math.isinf(p.lo) or math.isinf(p.hi)):
                return INF
            pc = e.poly_coeffs()
            if len(pc) > 1 and np.any(pc[1:]):
                lo = max(p.lo, -1e6)
                hi = min(p.hi, 1e6)
                xs = np.linspace(lo, hi, 2001)
                m = max(m, float(np.max(np.abs(e(xs)))))
                continue
            m = max(m, abs(pc[0]) + sum(abs(c) for c, t in e.nonpoly()))
        return m

    def scale(self, a):
        return TailSpec(tuple(TailPiece(p.lo, p.hi, p.expr.scale(a)) for p in self.pieces))

    def to_json(self):
        enc = lambda v: None if math.isinf(v) else v
        return {"pieces": [{"from": enc(p.lo), "to": enc(p.hi), "formula": p.expr.to_json()}
                           for p in self.pieces]}

    @staticmethod
    def from_json(obj):
        pieces = []
        for d in obj["pieces"]:
            lo = -INF if d["from"] is None else float(d["from"])
            hi = INF if d["to"] is None else float(d["to"])
            pieces.append(TailPiece(lo, hi, TailExpr.from_json(d["formula"])))
        return TailSpec(tuple(pieces))


def _combine_tails(a: TailSpec, b: TailSpec, ca, cb):
    """Tail of ca*u + cb*v, refining to the common set of breakpoints."""
    def side(pa, pb):
        edges = sorted({p.lo for p in pa} | {p.hi for p in pa} | {p.lo for p in pb} | {p.hi for p in pb})
        out = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid = _mid(lo, hi)
            ea = next(p.expr for p in pa if p.lo <= mid <= p.hi)
            eb = next(p.expr for p in pb if p.lo <= mid <= p.hi)
            out.append(TailPiece(lo, hi, ea.scale(ca) + eb.scale(cb)))
        return out
    return TailSpec(tuple(side(a.left, b.left) + side(a.right, b.right)))


def _mid(lo, hi):
    if math.isinf(lo):
        return hi - 1.0
    if math.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- grid function


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on x_i = -X + i h plus an analytic tail outside [-X, X].

    ``interp`` is ``"cubic"`` (local 4-node Lagrange) or ``"linear"``.
    ``poly`` records ascending coefficients when the function is a global
    polynomial; evaluators then work in exact polynomial arithmetic.
    """

    X: float
    h: float
    values: np.ndarray
    tail: TailSpec
    interp: str = "cubic"
    poly: tuple | None = None

    def __post_init__(self):
        n = round(2 * self.X / self.h)
        if self.X <= 0 or self.h <= 0 or abs(n * self.h - 2 * self.X) > 1e-9 * self.X:
            raise ValueError("2X/h must be a positive integer")
        v = np.array(self.values, dtype=float)
        if v.shape != (n + 1,):
            raise ValueError(f"expected {n + 1} values, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.interp not in ("cubic", "linear"):
            raise ValueError("interp must be 'cubic' or 'linear'")
        self.tail.validate(self.X)

    # construction

    @staticmethod
    def from_function(f, X, h, tail=None, interp="cubic"):
        n = round(2 * X / h)
        x = -X + h * np.arange(n + 1)
        if tail is None:
            tail = TailSpec.uniform(X, TailExpr.callable(f))
        return GridFunction(X, h, f(x), tail, interp)

    @staticmethod
    def polynomial(coeffs, X, h):
        expr = TailExpr.poly(coeffs)
        n = round(2 * X / h)
        x = -X + h * np.arange(n + 1)
        return GridFunction(X, h, expr(x), TailSpec.uniform(X, expr), "cubic",
                            tuple(Poly(tuple(coeffs)).coeffs))

    @staticmethod
    def from_expr(expr: TailExpr, X, h, interp="cubic"):
        n = round(2 * X / h)
        x = -X + h * np.arange(n + 1)
        return GridFunction(X, h, expr(x), TailSpec.uniform(X, expr), interp)

    # basic accessors

    @property
    def n(self):
        return len(self.values)

    @property
    def x(self):
        return -self.X + self.h * np.arange(self.n)

    def index_of(self, x):
        i = (x + self.X) / self.h
        k = int(round(i))
        if abs(i - k) > 1e-9:
            raise ValueError(f"{x} is not a grid point")
        return k

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        inside = np.abs(x) <= self.X * (1 + 1e-15)
        if np.any(inside):
            out[inside] = self._interp(x[inside])
        if np.any(~inside):
            out[~inside] = self.tail(x[~inside])
        return out

    def _interp(self, x):
        v = self.values
        s_all = (x + self.X) / self.h
        n = self.n
        i = np.clip(np.floor(s_all).astype(int), 0, n - 2)
        if self.interp == "linear" or n < 4:
            t = s_all - i
            return v[i] * (1 - t) + v[i + 1] * t
        j = np.clip(i - 1, 0, n - 4)
        s = s_all - j
        l0 = -(s - 1) * (s - 2) * (s - 3) / 6
        l1 = s * (s - 2) * (s - 3) / 2
        l2 = -s * (s - 1) * (s - 3) / 2
        l3 = s * (s - 1) * (s - 2) / 6
        return l0 * v[j] + l1 * v[j + 1] + l2 * v[j + 2] + l3 * v[j + 3]

    # algebra (same grid only)

    def _check_same(self, other):
        if other.X != self.X or other.h != self.h:
            raise ValueError("grid functions live on different grids")

    def combine(self, other, a=1.0, b=1.0):
        self._check_same(other)
        poly = None
        if self.poly is not None and other.poly is not None:
            pa = np.zeros(max(len(self.poly), len(other.poly)))
            pa[: len(self.poly)] += a * np.asarray(self.poly)
            pa[: len(other.poly)] += b * np.asarray(other.poly)
            poly = tuple(Poly(tuple(pa)).coeffs)
        return GridFunction(self.X, self.h, a * self.values + b * other.values,
                            _combine_tails(self.tail, other.tail, a, b), self.interp, poly)

    def scale(self, a):
        poly = None if self.poly is None else tuple(a * c for c in self.poly)
        return GridFunction(self.X, self.h, a * self.values, self.tail.scale(a), self.interp, poly)

    def __add__(self, other):
        return self.combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self.combine(other, 1.0, -1.0)

    def with_interp(self, interp):
        return GridFunction(self.X, self.h, self.values, self.tail, interp, self.poly)

    # serialization

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "value"])
            for xi, vi in zip(self.x, self.values):
                w.writerow([repr(float(xi)), repr(float(vi))])

    def tail_to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.tail.to_json(), fh, indent=1)

    @staticmethod
    def load(csv_path, tail_path=None, interp="cubic"):
        xs, vs = [], []
        with open(csv_path, newline="") as fh:
            r = csv.DictReader(fh)
            for row in r:
                xs.append(float(row["x"]))
                vs.append(float(row["value"]))
        xs = np.asarray(xs)
        X = float(xs[-1])
        h = (xs[-1] - xs[0]) / (len(xs) - 1)
        if abs(xs[0] + X) > 1e-9 * X or np.max(np.abs(np.diff(xs) - h)) > 1e-9 * max(h, 1):
            raise ValueError("grid in CSV must be uniform and symmetric about 0")
        if tail_path is None:
            tail = TailSpec.uniform(X, TailExpr.zero())
        else:
            with open(tail_path) as fh:
                tail = TailSpec.from_json(json.load(fh))
        return GridFunction(X, h, np.asarray(vs), tail, interp)


# ---------------------------------------------------------------- operations


def delta2(u: GridFunction, x, y):
    """Second order incremental quotient (u(x+y) + u(x-y) - 2u(x)) / 2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.poly is not None:
        c = np.asarray(u.poly)
        # only even Taylor terms survive; P''/2 y^2 + P''''/24 y^4 ...
        out = np.zeros(np.broadcast(x, y).shape)
        for k in range(2, len(c), 2):
            ck = sum(math.comb(j, k) * c[j] * x ** (j - k) for j in range(k, len(c)))
            out = out + ck * y ** k
        return out
    return 0.5 * (u(x + y) + u(x - y)) - u(x)


def finite_diff_derivative(u: GridFunction, order: int, x):
    """Central difference of order 1 or 2 at a grid point x."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    i = u.index_of(x)
    if i < order or i > u.n - 1 - order:
        raise OutOfStencil(f"x={x} is within {order} nodes of the grid edge")
    v = u.values
    if order == 1:
        return (v[i + 1] - v[i - 1]) / (2 * u.h)
    return (v[i + 1] - 2 * v[i] + v[i - 1]) / u.h ** 2


def derivative_array(u: GridFunction, order: int):
    """Central differences at every node with a full stencil.

    Returns (x, values) restricted to nodes at least ``max(order, 1)`` away
    from the edge; order 0 returns the samples themselves.
    """
    v, h = u.values, u.h
    if order == 0:
        return u.x, v
    if order == 1:
        return u.x[1:-1], (v[2:] - v[:-2]) / (2 * h)
    if order == 2:
        return u.x[1:-1], (v[2:] - 2 * v[1:-1] + v[:-2]) / h ** 2
    raise ValueError("order must be 0, 1 or 2")


def weighted_l1_norm(u: GridFunction, sigma: float):
    """Integral of |u(y)| (1 + |y|)**(-1 - sigma) over the real line."""
    if not 0 < sigma < 2:
        raise ValueError("sigma must lie in (0, 2)")
    s = 1.0 + sigma
    w = lambda y: (1.0 + np.abs(y)) ** (-s)
    nodes, weights = panel_nodes(u.x, 8)
    total = float(np.sum(weights * np.abs(u(nodes)) * w(nodes)))
    for p in u.tail.pieces:
        e = p.expr
        if p.hi <= 0:
            f = lambda t, e=e: np.abs(e(-t))
            a, b = -p.hi, -p.lo
            jumps = -e.jumps(p.lo, p.hi)
        else:
            f = lambda t, e=e: np.abs(e(t))
            a, b = p.lo, p.hi
            jumps = e.jumps(p.lo, p.hi)
        total += _tail_abs_integral(f, e, a, b, s, sigma, jumps, -1.0 if p.hi <= 0 else 1.0)
    return total


def _tail_abs_integral(f, e, a, b, s, sigma, jumps, sgn):
    from scipy.integrate import quad

    if math.isinf(b):
        if e.growth >= sigma:
            raise DivergentTail(f"tail growth {e.growth} >= sigma={sigma}")
        pc = e.poly_coeffs()
        nonpoly = e.nonpoly()
        if len(pc) == 1 and all(t.period is not None for c, t in nonpoly):
            if not nonpoly:
                return abs(pc[0]) * (1 + a) ** (-sigma) / sigma
            if len(nonpoly) == 1 and pc[0] == 0 and isinstance(nonpoly[0][1], SignSin):
                return abs(nonpoly[0][0]) * (1 + a) ** (-sigma) / sigma
            period = common_period(e.periods)
            g = lambda t: f(t - 1.0)
            raw = expand_phases([(t.phases(), t.period) for c, t in nonpoly], period)
            phases = [1.0 + sgn * ph for ph in raw]
            window = periodic_window(1.0 + a, period, phases)
            kinks = sign_change_points(lambda t: e(sgn * (t - 1.0)), window)
            t, w = periodic_nodes(1.0 + a, period, list(phases) + list(kinks), s)
            return float(np.sum(w * g(t)))
        val, _ = quad(lambda y: f(np.array([y]))[0] * (1 + y) ** (-s), a, INF, limit=400)
        return val
    edges = np.unique(np.concatenate([[a], np.sort(np.abs(jumps)), [b]]))
    edges = edges[(edges >= a) & (edges <= b)]
    sub = [edges[0]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, int(math.ceil((hi - lo) / 0.25)))
        sub.extend(np.linspace(lo, hi, k + 1)[1:])
    sub = np.asarray(sub)
    sub = np.unique(np.concatenate([sub, sign_change_points(lambda t: e(sgn * t), sub)]))
    nodes, weights = panel_nodes(sub, 16)
    return float(np.sum(weights * f(nodes) * (1 + nodes) ** (-s)))


# ---------------------------------------------------------------- parameter records


@dataclass(frozen=True)
class HolderExponents:
    sigma: float
    alpha: float
    alpha_prime: float
    nu: int

    def __post_init__(self):
        if not 0 < self.sigma < 2:
            raise ValueError("sigma must lie in (0, 2)")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        total = self.sigma + self.alpha
        if abs(total - round(total)) < 1e-12:
            raise IntegerOrder(f"sigma + alpha = {total} is an integer")
        if self.nu != math.floor(total):
            raise ValueError("nu must equal floor(sigma + alpha)")
        if not (0 < self.alpha_prime < self.alpha):
            raise ValueError("alpha' must lie in (0, alpha)")
        if not (self.nu < self.sigma + self.alpha_prime < total):
            raise ValueError("need nu < sigma + alpha' < sigma + alpha")


@dataclass(frozen=True)
class EllipticityParams:
    lam: float
    Lam: float
    A0: float = 0.0
    C0: float = 0.0

    def __post_init__(self):
        if not 0 < self.lam <= self.Lam:
            raise ValueError("need 0 < lambda <= Lambda")
        if self.A0 < 0 or self.C0 < 0:
            raise ValueError("A0 and C0 must be nonnegative")
