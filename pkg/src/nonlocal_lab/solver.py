"""Dirichlet problems on (-R, R) with prescribed exterior data.

Discretization.  Nodes x_i = -R + i h, i = 0..N; the two end nodes carry
the exterior values g(-R), g(R).  Inside [-R, R] the unknown is the
piecewise-linear interpolant of the node values, so on every cell
[k h, (k+1) h] of the y-axis both u(x_i + y) and u(x_i - y) are linear in y
and integrate exactly against b(y) K0(y) through the two moments
m0 = int b K0 and m1 = int y b K0.  The cell (0, h) uses the second
difference times int_0^h y^2 b K0.  Beyond the grid the exterior data is
integrated as in the operators module (per-piece quadrature, then Hurwitz
folding of the periodic far field).  Every off-diagonal weight is
nonnegative and the exterior mass makes each interior row strictly
diagonally dominant, so the matrices are M-matrices.

The discrete operator coincides with ``linear_apply`` evaluated with the
``"linear"`` quadrature scheme, which is what the residual cross-checks use.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import MaxIterations, NoContraction, NonDominantMatrix, Unsupported
from .grid import EllipticityParams, GridFunction, TailSpec
from .kernels import (KernelSpec, MollifierSpec, check_L0, mollified_profile, mollified_xfactor,
                      mollify_coeff, xi)
from .operators import (OperatorFamily, QuadratureConfig, check_far_poly, far_linear,
                        merge_far_data, near_weight, side_far_data)
from .quad import (common_period, expand_phases, geometric_refine, panel_nodes, periodic_nodes,
                   power_moment)

INF = math.inf
LINEAR_SCHEME = QuadratureConfig(scheme="linear")


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    """inf_a (L_a u + c_a) = 0 (or L u + c = 0, or M^pm u = 0) in (-R, R), u = g outside.

    Exactly one of ``kernel``, ``family`` or ``extremal`` selects the
    operator.  ``c`` is a constant or a vectorized callable (single kernel
    only).  Extremal problems need ``params`` and ``sigma`` and
    piecewise-constant exterior data.
    """

    exterior: TailSpec
    h: float
    kernel: KernelSpec | None = None
    c: object = 0.0
    family: OperatorFamily | None = None
    extremal: str | None = None
    params: EllipticityParams | None = None
    sigma: float | None = None
    radius: float = 1.0
    tol: float = 1e-10
    max_iter: int = 50

    def __post_init__(self):
        modes = [self.kernel is not None, self.family is not None, self.extremal is not None]
        if sum(modes) != 1:
            raise ValueError("give exactly one of kernel, family, extremal")
        n = round(2 * self.radius / self.h)
        if n < 2 or abs(n * self.h - 2 * self.radius) > 1e-9 * self.radius:
            raise ValueError("2 R / h must be an integer >= 2")
        self.exterior.validate(self.radius)
        if not math.isfinite(self.exterior.bound()):
            raise ValueError("exterior data must be bounded")
        if self.extremal is not None:
            if self.extremal not in ("plus", "minus"):
                raise ValueError("extremal must be 'plus' or 'minus'")
            if self.params is None or self.sigma is None:
                raise ValueError("extremal problems need params and sigma")
            if not 0 < self.sigma < 2:
                raise ValueError("sigma must lie in (0, 2)")
            if not all(p.expr.is_piecewise_constant() for p in self.exterior.pieces):
                raise Unsupported("extremal problems need piecewise-constant exterior data")
        if self.kernel is not None and self.params is not None and not check_L0(self.kernel, self.params):
            raise ValueError("kernel fails the L0 bounds")
        if self.family is not None:
            sig = {k.sigma for k in self.family.kernels}
            if len(sig) != 1:
                raise ValueError("family members must share sigma")

    @property
    def mode(self):
        if self.kernel is not None:
            return "linear"
        return "family" if self.family is not None else "extremal"

    @property
    def order(self):
        if self.kernel is not None:
            return self.kernel.sigma
        if self.family is not None:
            return self.family.kernels[0].sigma
        return self.sigma

    @property
    def N(self):
        return round(2 * self.radius / self.h)

    @property
    def x(self):
        return -self.radius + self.h * np.arange(self.N + 1)

    def coeff(self, x):
        c = self.c
        return np.asarray(c(x), dtype=float) if callable(c) else np.full(np.shape(x), float(c))

    def weights(self):
        """(weight of positive part, weight of negative part) of the extremal operator."""
        p = self.params
        return (p.Lam, p.lam) if self.extremal == "plus" else (p.lam, p.Lam)

    def boundary_values(self):
        g = self.exterior
        return float(g(np.array([-self.radius]))[0]), float(g(np.array([self.radius]))[0])

    def as_grid_function(self, interior):
        """Grid function with the given interior node values and the exterior data as tail."""
        gl, gr = self.boundary_values()
        v = np.concatenate([[gl], np.asarray(interior, dtype=float), [gr]])
        return GridFunction(self.radius, self.h, v, self.exterior, "linear")


@dataclass
class SolveReport:
    solution: GridFunction
    residual: float
    iterations: int
    policy_trace: list = field(default_factory=list)
    contraction_factors: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)

    def to_json(self):
        return {"residual": self.residual, "iterations": self.iterations,
                "policy_trace": self.policy_trace,
                "contraction_factors": self.contraction_factors,
                "residual_history": self.residual_history}


# ---------------------------------------------------------------- row geometry


@dataclass
class _Row:
    """y-axis decomposition for one interior node."""

    ya: np.ndarray
    yb: np.ndarray
    y0: np.ndarray        # start of the grid cell containing [ya, yb]
    r_in: np.ndarray      # x + y stays inside [-R, R]
    l_in: np.ndarray
    jr: np.ndarray        # node at x + y0 (right), x - y0 (left)
    jl: np.ndarray
    gr: np.ndarray        # exterior values when piecewise constant
    gl: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    ext: np.ndarray       # int of exterior sides against b K0 per sub-interval
    near: float           # int_0^h y^2 b K0
    Y: float              # start of the closed-form far field
    far_mass: float       # int_Y^inf b K0
    far_g: float          # int_Y^inf (g(x+y) + g(x-y)) b K0
    far_groups: tuple = ()  # (values s, masses) of g(x+y) + g(x-y) for split far fields


def _side_breaks(tail: TailSpec, x, lo, hi, direction):
    """y in (lo, hi) where g(x + direction y) changes piece or jumps."""
    out = []
    pieces = tail.right if direction > 0 else tail.left
    for p in pieces:
        for z in (p.lo, p.hi):
            if math.isfinite(z):
                out.append(direction * (z - x))
        a, b = (x + lo, x + hi) if direction > 0 else (x - hi, x - lo)
        a, b = max(a, p.lo), min(b, p.hi)
        if a < b:
            out.extend(direction * (p.expr.jumps(a, b) - x))
    out = np.asarray(out, dtype=float)
    return out[(out > lo) & (out < hi)]


class _Assembler:
    """Per-node geometry and matrix assembly for one problem and one kernel.

    ``kernel=None`` means the plain weight K0 = (2 - sigma) |y|^(-1-sigma).
    """

    def __init__(self, prob: DirichletProblem, kernel: KernelSpec | None, sigma):
        self.p = prob
        self.k = kernel
        self.sigma = sigma
        self.cs = 2.0 - sigma
        self.g = prob.exterior
        self.exact = (kernel is None or kernel.piecewise_constant) and all(
            p.expr.is_piecewise_constant() for p in self.g.pieces)
        self.rows = [self._row(i) for i in range(1, prob.N)]

    def _bk0(self, y):
        b = 1.0 if self.k is None else self.k.b(y)
        return b * self.cs * y ** (-1.0 - self.sigma)

    def _row(self, i):
        p, h, R = self.p, self.p.h, self.p.radius
        N = p.N
        x = p.x[i]
        g = self.g
        aR = g.right[-1].lo
        bL = g.left[0].hi
        Y = max(h, R + abs(x), aR - x, x - bL)
        if self.k is not None:
            Y = max(Y, self.k.far.lo)
        ncell = int(round((R + abs(x)) / h))
        cells = h * np.arange(1, ncell + 1)
        parts = [cells, [Y], _side_breaks(g, x, h, Y, +1), _side_breaks(g, x, h, Y, -1)]
        if self.k is not None:
            parts.append(self.k.breaks(h, Y))
        e = np.unique(np.concatenate([np.asarray(q, dtype=float) for q in parts]))
        e = e[(e >= h * (1 - 1e-12)) & (e <= Y)]
        keep = np.concatenate([[True], np.diff(e) > 1e-12 * np.maximum(1.0, e[1:])])
        e = e[keep]
        e[0], e[-1] = h, Y
        if not self.exact:
            e = geometric_refine(e)
        ya, yb = e[:-1], e[1:]
        mid = 0.5 * (ya + yb)
        k = np.floor(ya / h + 1e-9)
        y0 = k * h
        ki = k.astype(int)
        tol = 1e-9 * h
        r_in = yb <= (N - i) * h + tol
        l_in = yb <= i * h + tol
        jr = np.where(r_in, i + ki, 0)
        jl = np.where(l_in, i - ki, 0)
        s = self.sigma
        if self.exact:
            b = 1.0 if self.k is None else self.k.b(mid)
            m0 = b * self.cs * power_moment(ya, yb, -s)
            m1 = b * self.cs * power_moment(ya, yb, 1 - s)
            gr = np.where(r_in, 0.0, g(x + mid))
            gl = np.where(l_in, 0.0, g(x - mid))
            ext = (gr + gl) * m0
        else:
            t, w = panel_nodes(e)
            t = t.reshape(len(ya), -1)
            w = w.reshape(len(ya), -1)
            kw = w * self._bk0(t)
            m0 = kw.sum(axis=1)
            m1 = (kw * t).sum(axis=1)
            vr = np.where(r_in[:, None], 0.0, g(x + t))
            vl = np.where(l_in[:, None], 0.0, g(x - t))
            ext = ((vr + vl) * kw).sum(axis=1)
            gr = np.where(r_in, 0.0, np.nan)
            gl = np.where(l_in, 0.0, np.nan)
        near = near_weight(self.k, s, h)
        fd = merge_far_data([side_far_data(g.right[-1].expr, x, +1), side_far_data(g.left[0].expr, x, -1)])
        q, mag, funcs = fd
        q = check_far_poly(q, mag, s)
        groups = ()
        if self.k is not None:
            far_mass = far_linear(np.array([1.0]), [], self.k, Y, s)
            far_g = far_linear(q, funcs, self.k, Y, s)
        else:
            far_mass = self.cs * Y ** (-s) / s
            flat = KernelSpec.flat(s)
            far_g = far_linear(q, funcs, flat, Y, s)
            groups = self._far_groups(q, funcs, Y)
        return _Row(ya, yb, y0, r_in, l_in, jr, jl, gr, gl, m0, m1, ext, near, Y,
                    far_mass, far_g, groups)

    def _far_groups(self, q, funcs, Y):
        """Distinct values of g(x+y) + g(x-y) beyond Y and their K0 masses."""
        if not self.exact:
            return ()
        s = self.sigma
        if not funcs:
            return (np.array([q[0]]), np.array([self.cs * Y ** (-s) / s]))
        P = common_period([f[2] for f in funcs])
        phases = expand_phases([(f[3], f[2]) for f in funcs], P)
        t, w = periodic_nodes(Y, P, phases, 1 + s)
        val = q[0] + sum(c * f(t) for c, f, *_ in funcs)
        val = np.round(val, 12)
        vals = np.unique(val)
        mass = np.array([self.cs * w[val == v].sum() for v in vals])
        return (vals, mass)

    # linear rows

    def linear_rows(self, xf=None):
        """(A, t): L u(x_i) = A[i] . u + t[i] on interior rows; u includes the end nodes."""
        p = self.p
        N, h = p.N, p.h
        A = np.zeros((N + 1, N + 1))
        t = np.zeros(N + 1)
        for i, r in zip(range(1, N), self.rows):
            f = 1.0 if xf is None else xf[i]
            row = A[i]
            wn = f * r.near / h ** 2
            row[i - 1] += wn
            row[i + 1] += wn
            row[i] -= 2 * wn
            wb = (r.m1 - r.y0 * r.m0) / h
            wa = r.m0 - wb
            np.add.at(row, r.jr[r.r_in], f * wa[r.r_in])
            np.add.at(row, r.jr[r.r_in] + 1, f * wb[r.r_in])
            np.add.at(row, r.jl[r.l_in], f * wa[r.l_in])
            np.add.at(row, r.jl[r.l_in] - 1, f * wb[r.l_in])
            row[i] -= f * (2 * r.m0.sum() + 2 * r.far_mass)
            t[i] = f * (r.ext.sum() + r.far_g)
        return A, t

    # sign-split rows (flat K0, piecewise-linear D)

    def split_rows(self, u, wpos, wneg, policy_u=None):
        """Rows of the extremal operator with b chosen by the sign of D for ``policy_u``.

        ``policy_u=None`` freezes b = wneg everywhere (the initial policy).
        Returns (A, t, flips) where flips counts sub-intervals split at a root.
        """
        p = self.p
        N, h = p.N, p.h
        A = np.zeros((N + 1, N + 1))
        t = np.zeros(N + 1)
        flips = 0
        cs, s = self.cs, self.sigma
        for i, r in zip(range(1, N), self.rows):
            row = A[i]
            ya, yb, y0 = r.ya, r.yb, r.y0
            jr, jl = r.jr, r.jl
            if policy_u is None:
                bn = wneg
                ya2, yb2, idx = ya, yb, np.arange(len(ya))
                bsub = np.full(len(ya), wneg)
            else:
                v = policy_u
                d2 = v[i + 1] + v[i - 1] - 2 * v[i]
                bn = wpos if d2 > 0 else wneg

                def D(y):
                    tt = (y - y0) / h
                    ur = np.where(r.r_in, v[jr] * (1 - tt) + v[np.minimum(jr + 1, N)] * tt, r.gr)
                    ul = np.where(r.l_in, v[jl] * (1 - tt) + v[np.maximum(jl - 1, 0)] * tt, r.gl)
                    return ur + ul - 2 * v[i]

                da, db = D(ya), D(yb)
                cross = da * db < 0
                flips += int(cross.sum())
                root = np.where(cross, ya + (yb - ya) * da / np.where(cross, da - db, 1.0), yb)
                # split crossing sub-intervals at the root
                idx = np.concatenate([np.arange(len(ya)), np.nonzero(cross)[0]])
                ya2 = np.concatenate([ya, root[cross]])
                yb2 = np.concatenate([np.where(cross, root, yb), yb[cross]])
                dmid = np.concatenate([np.where(cross, da, 0.5 * (da + db)), db[cross]])
                bsub = np.where(dmid > 0, wpos, wneg)
            m0 = bsub * cs * power_moment(ya2, yb2, -s)
            m1 = bsub * cs * power_moment(ya2, yb2, 1 - s)
            c0 = y0[idx]
            wb = (m1 - c0 * m0) / h
            wa = m0 - wb
            rin, lin = r.r_in[idx], r.l_in[idx]
            np.add.at(row, jr[idx][rin], wa[rin])
            np.add.at(row, jr[idx][rin] + 1, wb[rin])
            np.add.at(row, jl[idx][lin], wa[lin])
            np.add.at(row, jl[idx][lin] - 1, wb[lin])
            row[i] -= 2 * m0.sum()
            t[i] += np.sum(m0 * (np.where(rin, 0.0, r.gr[idx]) + np.where(lin, 0.0, r.gl[idx])))
            wn = bn * r.near / h ** 2
            row[i - 1] += wn
            row[i + 1] += wn
            row[i] -= 2 * wn
            vals, mass = r.far_groups
            ui = 0.0 if policy_u is None else policy_u[i]
            bf = np.where(vals - 2 * ui > 0, wpos, wneg) if policy_u is not None else np.full(len(vals), wneg)
            t[i] += np.sum(bf * vals * mass)
            row[i] -= 2 * np.sum(bf * mass)
        return A, t, flips


# ---------------------------------------------------------------- linear algebra


def _check_dominance(A, interior):
    B = A[interior]
    diag = B[np.arange(len(interior)), interior]
    off = B.copy()
    off[np.arange(len(interior)), interior] = 0.0
    scale = np.abs(diag).max()
    if np.any(diag >= 0) or np.any(off < -1e-12 * scale):
        raise NonDominantMatrix("discrete operator is not monotone")
    if np.any(off.sum(axis=1) > -diag * (1 + 1e-12)):
        raise NonDominantMatrix("interior rows are not strictly diagonally dominant")


def _solve_rows(prob: DirichletProblem, A, rhs):
    """Solve A u = rhs on interior rows with u fixed to g at the end nodes."""
    N = prob.N
    interior = np.arange(1, N)
    _check_dominance(A, interior)
    gl, gr = prob.boundary_values()
    M = A[1:N, 1:N]
    b = rhs[1:N] - A[1:N, 0] * gl - A[1:N, N] * gr
    lu = lu_factor(M)
    v = lu_solve(lu, b)
    v = v + lu_solve(lu, b - M @ v)  # one step of iterative refinement
    return np.concatenate([[gl], v, [gr]])


def _residual(A, t, u, extra, N):
    r = A[1:N] @ u + t[1:N] + extra[1:N]
    return float(np.max(np.abs(r)))


# ---------------------------------------------------------------- solvers


def solve_linear_dirichlet(p: DirichletProblem) -> SolveReport:
    """Direct solve of L u + c = 0 for a single kernel."""
    if p.mode != "linear":
        raise ValueError("solve_linear_dirichlet needs a single kernel")
    asm = _Assembler(p, p.kernel, p.kernel.sigma)
    xf = np.array([p.kernel.xf(x) for x in p.x]) if p.kernel.xfactor is not None else None
    A, t = asm.linear_rows(xf)
    c = p.coeff(p.x)
    u = _solve_rows(p, A, -(t + c))
    res = _residual(A, t, u, c, p.N)
    return SolveReport(p.as_grid_function(u[1:-1]), res, 1, residual_history=[res])


def _family_systems(p: DirichletProblem):
    F = p.family
    out = []
    for a, k in enumerate(F.kernels):
        asm = _Assembler(p, k, k.sigma)
        xf = np.array([k.xf(x) for x in p.x]) if k.xfactor is not None else None
        A, t = asm.linear_rows(xf)
        c = np.array([F.c(a, x) for x in p.x])
        out.append((A, t, c))
    return out


def _policy_values(systems, u, N):
    return np.array([A[1:N] @ u + t[1:N] + c[1:N] for A, t, c in systems])


def _argmin_lowest(vals, tie=1e-13):
    best = vals.min(axis=0)
    ok = vals <= best + tie * (1.0 + np.abs(best))
    return np.argmax(ok, axis=0)


def _policy_solve(p, systems, policy):
    N = p.N
    A = np.zeros((N + 1, N + 1))
    rhs = np.zeros(N + 1)
    for i in range(1, N):
        Aa, ta, ca = systems[policy[i - 1]]
        A[i] = Aa[i]
        rhs[i] = -(ta[i] + ca[i])
    return _solve_rows(p, A, rhs)


def solve_bellman_dirichlet(p: DirichletProblem) -> SolveReport:
    """Howard policy iteration for inf_a (L_a u + c_a) = 0 or M^pm u = 0."""
    if p.mode == "linear":
        rep = solve_linear_dirichlet(p)
        rep.policy_trace = [[0] * (p.N - 1)]
        return rep
    if p.mode == "family":
        return _howard_family(p)
    return _howard_extremal(p)


def _howard_family(p: DirichletProblem) -> SolveReport:
    N = p.N
    systems = _family_systems(p)
    policy = np.zeros(N - 1, dtype=int)
    trace, hist = [], []
    for it in range(1, p.max_iter + 1):
        u = _policy_solve(p, systems, policy)
        vals = _policy_values(systems, u, N)
        new = _argmin_lowest(vals)
        res = float(np.max(np.abs(vals.min(axis=0))))
        trace.append(policy.tolist())
        hist.append(res)
        if np.array_equal(new, policy):
            return SolveReport(p.as_grid_function(u[1:-1]), res, it, trace, residual_history=hist)
        policy = new
    raise MaxIterations(f"policy iteration did not settle in {p.max_iter} steps")


def _howard_extremal(p: DirichletProblem) -> SolveReport:
    N = p.N
    wpos, wneg = p.weights()
    asm = _Assembler(p, None, p.sigma)
    zero = np.zeros(N + 1)
    A, t, _ = asm.split_rows(None, wpos, wneg, None)
    u = _solve_rows(p, A, -t)
    trace, hist = [], []
    for it in range(1, p.max_iter + 1):
        A, t, flips = asm.split_rows(u, wpos, wneg, u)
        res = _residual(A, t, u, zero, N)
        trace.append(flips)
        hist.append(res)
        if res <= p.tol:
            return SolveReport(p.as_grid_function(u[1:-1]), res, it, trace, residual_history=hist)
        u = _solve_rows(p, A, -t)
    raise MaxIterations(f"policy iteration did not reach residual {p.tol} in {p.max_iter} steps")


def enumerate_policies(p: DirichletProblem):
    """Componentwise min over the solutions of every frozen policy (small problems only)."""
    if p.mode != "family":
        raise ValueError("enumeration needs a finite family")
    N = p.N
    if len(p.family) ** (N - 1) > 1 << 16:
        raise ValueError("too many policies to enumerate")
    systems = _family_systems(p)
    best = None
    for pol in itertools.product(range(len(p.family)), repeat=N - 1):
        u = _policy_solve(p, systems, np.array(pol))
        best = u if best is None else np.minimum(best, u)
    return p.as_grid_function(best[1:-1])


# ---------------------------------------------------------------- tiny-ball contraction


@dataclass
class _Deviation:
    S: np.ndarray   # (family, nodes)
    T: np.ndarray
    c: np.ndarray


def _deviation_terms(p: DirichletProblem, ms: MollifierSpec, ycut_extra=16.0, panels_per_eps=4):
    """S_a(x) = int_{2eps}^inf (K_a^eps - K0) dy and T_a(x) = int (g(x+y) + g(x-y)) (K_a^eps - K0) dy."""
    F = p.family
    g = p.exterior
    s = p.order
    cs = 2.0 - s
    e = ms.epsilon
    if p.radius >= e:
        raise ValueError("the ball must be smaller than the mollification scale")
    xs = p.x
    Ycut = max(max(k.far.lo for k in F.kernels), g.right[-1].lo + p.radius,
               -g.left[0].hi + p.radius) + ycut_extra
    nseg = int(math.ceil((Ycut - 2 * e) / (e / panels_per_eps)))
    base = np.linspace(2 * e, Ycut, nseg + 1)
    S = np.zeros((len(F), len(xs)))
    T = np.zeros((len(F), len(xs)))
    C = np.zeros((len(F), len(xs)))
    flat = KernelSpec.flat(s)
    for a, k in enumerate(F.kernels):
        if k.is_flat:
            # K0 is smooth off the origin; mollifying it would only add O(eps^2) noise
            C[a] = [mollify_coeff(_vectorized(F.coeffs[a]), ms, x) for x in xs]
            continue
        y_all, w_all = panel_nodes(base)
        prof = mollified_profile(k, ms, y_all)
        cut = xi(y_all / (4 * e))
        k0 = cs * y_all ** (-1.0 - s)
        for j, x in enumerate(xs):
            if j == 0 or j == len(xs) - 1:
                continue
            xf = mollified_xfactor(k, ms, x)
            dev = (1.0 - cut) * (xf * prof - k0)
            # exterior data may jump; refine its panels separately
            br = np.unique(np.concatenate([_side_breaks(g, x, 2 * e, Ycut, +1),
                                           _side_breaks(g, x, 2 * e, Ycut, -1)]))
            S[a, j] = np.sum(w_all * dev)
            if br.size:
                edges = np.unique(np.concatenate([base, br]))
                y, w = panel_nodes(edges)
                devy = (1.0 - xi(y / (4 * e))) * (xf * mollified_profile(k, ms, y) - cs * y ** (-1.0 - s))
                T[a, j] = np.sum(w * (g(x + y) + g(x - y)) * devy)
            else:
                T[a, j] = np.sum(w_all * (g(x + y_all) + g(x - y_all)) * dev)
            # beyond the cut the unmollified kernel is used
            S[a, j] += xf * far_linear(np.array([1.0]), [], k, Ycut, s) - cs * Ycut ** (-s) / s
            q, mag, funcs = merge_far_data([side_far_data(g.right[-1].expr, x, +1),
                                            side_far_data(g.left[0].expr, x, -1)])
            q = check_far_poly(q, mag, s)
            T[a, j] += xf * far_linear(q, funcs, k, Ycut, s) - far_linear(q, funcs, flat, Ycut, s)
            C[a, j] = mollify_coeff(_vectorized(F.coeffs[a]), ms, x)
    return _Deviation(S, T, C)


def _vectorized(c):
    if callable(c):
        return c
    return lambda x: np.full(np.shape(x), float(c))


def _flat_problem(p: DirichletProblem):
    return DirichletProblem(p.exterior, p.h, kernel=KernelSpec.flat(p.order), radius=p.radius,
                            tol=p.tol, max_iter=p.max_iter)


def solve_contraction(p: DirichletProblem, ms: MollifierSpec, tol=None, max_steps=100) -> SolveReport:
    """Fixed-point iteration L0 w_{n+1} = -min_a (T_a - 2 w_n S_a + c_a^eps) on a ball of radius < eps.

    The problem's family is mollified at scale eps; for |y| > 2 eps the
    points x +- y leave the ball, so the deviation from the flat operator only
    sees w at the centre node.  Stops when successive iterates differ by at
    most ``tol`` and reports the ratios of successive differences.
    """
    if p.mode != "family":
        raise ValueError("the contraction solver needs a family")
    tol = p.tol if tol is None else tol
    N = p.N
    dev = _deviation_terms(p, ms)
    asm = _Assembler(_flat_problem(p), None, p.order)
    A, t0 = asm.linear_rows()
    _check_dominance(A, np.arange(1, N))
    w = np.concatenate([[p.boundary_values()[0]], np.zeros(N - 1), [p.boundary_values()[1]]])
    gammas, diffs = [], []
    for step in range(1, max_steps + 1):
        nl = np.min(dev.T - 2 * w[None, :] * dev.S + dev.c, axis=0)
        w_new = _solve_rows(p, A, -(t0 + nl))
        d = float(np.max(np.abs(w_new - w)))
        # ratios of differences at round-off level are noise
        floor = 1e3 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w_new))))
        if diffs and diffs[-1] > floor:
            gammas.append(d / diffs[-1])
            if gammas[-1] >= 1.0 and step > 2:
                raise NoContraction(f"measured contraction factor {gammas[-1]:.3g} >= 1")
        diffs.append(d)
        w = w_new
        if d <= tol:
            nl = np.min(dev.T - 2 * w[None, :] * dev.S + dev.c, axis=0)
            res = float(np.max(np.abs((A @ w + t0 + nl)[1:N])))
            return SolveReport(p.as_grid_function(w[1:-1]), res, step,
                               contraction_factors=gammas, residual_history=diffs)
    raise MaxIterations(f"fixed-point iteration did not converge in {max_steps} steps")


def solve_tiny_ball_direct(p: DirichletProblem, ms: MollifierSpec) -> SolveReport:
    """Policy iteration on the same discrete tiny-ball problem as solve_contraction."""
    N = p.N
    dev = _deviation_terms(p, ms)
    asm = _Assembler(_flat_problem(p), None, p.order)
    A0, t0 = asm.linear_rows()
    systems = []
    for a in range(len(p.family)):
        A = A0.copy()
        A[np.arange(N + 1), np.arange(N + 1)] -= 2 * dev.S[a]
        systems.append((A, t0 + dev.T[a], dev.c[a]))
    policy = np.zeros(N - 1, dtype=int)
    trace = []
    for it in range(1, p.max_iter + 1):
        u = _policy_solve(p, systems, policy)
        vals = _policy_values(systems, u, N)
        new = _argmin_lowest(vals)
        trace.append(policy.tolist())
        if np.array_equal(new, policy):
            res = float(np.max(np.abs(vals.min(axis=0))))
            return SolveReport(p.as_grid_function(u[1:-1]), res, it, trace)
        policy = new
    raise MaxIterations("policy iteration did not settle")


# ---------------------------------------------------------------- ball updates


def ball_update_sweep(u: GridFunction, p: DirichletProblem, delta, passes: int) -> SolveReport:
    """Overlapping block Gauss-Seidel: replace u on each ball B_delta(z) by the local solve.

    Centres run left to right with spacing delta/2; the values outside the
    current ball (including the exterior data) are frozen during each local
    solve.  The global residual after each pass is recorded.
    """
    if p.mode != "linear":
        raise Unsupported("ball updates are implemented for linear problems")
    N, h = p.N, p.h
    if not (h <= delta <= p.radius):
        raise ValueError("delta must lie between h and R")
    if abs(u.X - p.radius) > 1e-12 or abs(u.h - h) > 1e-15:
        raise ValueError("u must live on the problem grid")
    asm = _Assembler(p, p.kernel, p.kernel.sigma)
    xf = np.array([p.kernel.xf(x) for x in p.x]) if p.kernel.xfactor is not None else None
    A, t = asm.linear_rows(xf)
    _check_dominance(A, np.arange(1, N))
    c = p.coeff(p.x)
    rhs = -(t + c)
    v = np.array(u.values, dtype=float)
    v[0], v[-1] = p.boundary_values()
    rad = int(round(delta / h))
    step = max(1, rad // 2)
    centres = list(range(1, N, step))
    if centres[-1] != N - 1:
        centres.append(N - 1)
    hist = [_residual(A, t, v, c, N)]
    for _ in range(passes):
        for ci in centres:
            blk = np.arange(max(1, ci - rad), min(N - 1, ci + rad) + 1)
            rest = rhs[blk] - A[blk] @ v + A[np.ix_(blk, blk)] @ v[blk]
            v[blk] = np.linalg.solve(A[np.ix_(blk, blk)], rest)
        hist.append(_residual(A, t, v, c, N))
    return SolveReport(p.as_grid_function(v[1:-1]), hist[-1], passes, residual_history=hist)


# ---------------------------------------------------------------- barrier decay


def barrier_check(u: GridFunction, p_exp, region, radius=1.0, rtol=0.1):
    """(C, pass): smallest C with |u| <= C dist(x, R \\ (-radius, radius))^p_exp on the region.

    Pass means C is finite and the same quantity on every other node differs
    by less than ``rtol``.
    """
    a, b = region
    x = u.x
    v = u.values
    dist = radius - np.abs(x)
    sel = (x >= a - 1e-12) & (x <= b + 1e-12) & (dist > 1e-12)
    if not np.any(sel):
        return 0.0, True

    def bound(mask):
        q = np.abs(v[mask]) / dist[mask] ** p_exp
        return float(q.max()) if q.size else 0.0

    C = bound(sel)
    idx = np.arange(len(x))
    coarse = sel & ((idx - round((u.X - radius) / u.h)) % 2 == 0)
    Cc = bound(coarse)
    ok = math.isfinite(C) and (C == 0.0 or abs(C - Cc) <= rtol * C)
    return C, bool(ok)
