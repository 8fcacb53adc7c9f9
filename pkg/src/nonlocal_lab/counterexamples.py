"""Bounded exterior data that destroys C^(sigma+alpha) regularity.

Data: u = 0 on the collars [-2, -1] and [1, 2], u = sign sin(m pi x) for
|x| >= 2.  The linear problem uses the kernel K_m (flat on |y| < 1, then
2 + sign cos(m pi y)); the nonlinear one uses M^+ with constants
(lambda, Lambda).  Each solve feeds seminorm tracking and a few exact
identities that isolate the effect of the oscillating tail.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import EllipticityParams, GridFunction, TailExpr, TailSpec, delta2
from .holder import SeminormQuery, alpha_prime, holder_quotient, seminorm
from .kernels import oscillating_kernel
from .operators import QuadratureConfig, extremal_apply, linear_apply
from .solver import (DirichletProblem, SolveReport, barrier_check, solve_bellman_dirichlet,
                     solve_linear_dirichlet)

LINEAR = QuadratureConfig(scheme="linear")


@dataclass(frozen=True)
class CounterexampleConfig:
    kind: str = "linear"
    sigma: float = 1.0
    lam: float = 1.0
    Lam: float = 2.0
    ms: tuple = (2, 4, 8, 16, 32)
    alpha: float = 0.1
    h: float | None = None
    tol: float = 1e-10
    barrier_exponent: float = 0.1

    def __post_init__(self):
        if self.kind not in ("linear", "nonlinear"):
            raise ValueError("kind must be 'linear' or 'nonlinear'")
        if not 0 < self.sigma < 2:
            raise ValueError("sigma must lie in (0, 2)")
        if not self.ms or any(int(m) != m or m < 1 for m in self.ms):
            raise ValueError("m values must be positive integers")
        object.__setattr__(self, "ms", tuple(int(m) for m in self.ms))
        if self.kind == "nonlinear" and not self.lam < self.Lam:
            raise ValueError("need lambda < Lambda")
        EllipticityParams(self.lam, self.Lam)
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.h is None:
            object.__setattr__(self, "h", 1.0 / (16 * max(self.ms)))
        if self.h > 1.0 / (8 * max(self.ms)) + 1e-15:
            raise ValueError("grid must have h <= 1/(8 max m)")
        n = 1.0 / self.h
        if abs(n - round(n)) > 1e-9:
            raise ValueError("1/h must be an integer")

    @property
    def params(self):
        return EllipticityParams(self.lam, self.Lam)

    def refined(self):
        return CounterexampleConfig(self.kind, self.sigma, self.lam, self.Lam, self.ms,
                                    self.alpha, self.h / 2, self.tol, self.barrier_exponent)


def exterior_data(m) -> TailSpec:
    """0 on the collars, sign sin(m pi x) beyond |x| = 2."""
    z, s = TailExpr.zero(), TailExpr.sign_sin(m)
    return TailSpec.symmetric(1.0, [2.0], [z, s], [z, s])


def build_linear(cfg: CounterexampleConfig, m=None) -> DirichletProblem:
    m = cfg.ms[0] if m is None else m
    return DirichletProblem(exterior_data(m), cfg.h, kernel=oscillating_kernel(cfg.sigma, m),
                            tol=cfg.tol)


def build_nonlinear(cfg: CounterexampleConfig, m=None) -> DirichletProblem:
    m = cfg.ms[0] if m is None else m
    if not cfg.lam < cfg.Lam:
        raise ValueError("need lambda < Lambda")
    return DirichletProblem(exterior_data(m), cfg.h, extremal="plus", params=cfg.params,
                            sigma=cfg.sigma, tol=cfg.tol)


def solve(cfg: CounterexampleConfig, m) -> SolveReport:
    if cfg.kind == "linear":
        return solve_linear_dirichlet(build_linear(cfg, m))
    return solve_bellman_dirichlet(build_nonlinear(cfg, m))


def split_solution(u: GridFunction):
    """(u1, u2): u1 = u on [-1, 1] with zero tail, u2 = 0 on (-2, 2) and the data beyond."""
    zero = TailSpec.uniform(u.X, TailExpr.zero())
    u1 = GridFunction(u.X, u.h, u.values, zero, u.interp)
    u2 = GridFunction(u.X, u.h, np.zeros(u.n), u.tail, u.interp)
    return u1, u2


def oscillating_part(cfg: CounterexampleConfig, m, h=None) -> GridFunction:
    """u2 built directly from the data, without solving."""
    h = cfg.h if h is None else h
    n = round(2 / h)
    return GridFunction(1.0, h, np.zeros(n + 1), exterior_data(m), "linear")


def oscillation_target(sigma):
    """Limit of L_m u2(1/(2m)): the tail mass 2 (2 - sigma) int_2^inf y^(-1-sigma) dy."""
    return (2.0 - sigma) * 2.0 ** (1.0 - sigma) / sigma


def oscillation_identities(cfg: CounterexampleConfig, u2: GridFunction, m) -> dict:
    """L_m u2 at 0 (odd symmetry gives 0) and at 1/(2m) (tends to the tail mass)."""
    k = oscillating_kernel(cfg.sigma, m)
    v0 = linear_apply(u2, k, 0.0, LINEAR)
    vh = linear_apply(u2, k, 1.0 / (2 * m), LINEAR)
    c = oscillation_target(cfg.sigma)
    return {"m": m, "at_zero": v0, "at_half_over_m": vh, "target": c,
            "deviation": abs(vh - c)}


def _sample_far(m, lo, count, spread=0.37):
    ys = []
    k = 0
    while len(ys) < count:
        y = lo + (k + 0.3) * spread
        k += 1
        if abs(math.cos(m * math.pi * y)) > 1e-3:
            ys.append(y if len(ys) % 2 == 0 else -y)
    return np.array(ys)


def nonlinear_identities(cfg: CounterexampleConfig, u: GridFunction, m, samples=20) -> dict:
    """u_m(0), the measured tau, and the optimal kernels at 0 and 1/(2m) for |y| > 2."""
    lam, Lam = cfg.lam, cfg.Lam
    u0 = float(u(np.array([0.0]))[0])
    x = u.x
    inner = np.abs(x) <= 0.5 + 1e-12
    tau = 1.0 - float(u.values[inner].max())
    ys = _sample_far(m, 2.0, samples)
    d0 = delta2(u, 0.0, ys)
    b = np.where(d0 > 0, Lam, lam)
    xh = 1.0 / (2 * m)
    yt = _sample_far(m, 2.0 + xh, samples)
    dh = delta2(u, xh, yt)
    bt = np.where(dh > 0, Lam, lam)
    closed = lam + 0.5 * (Lam - lam) * (1.0 + np.sign(np.cos(m * math.pi * yt)))
    return {"m": m, "u_at_zero": u0, "tau": tau,
            "b_at_zero": b.tolist(), "b_is_lambda": bool(np.all(b == lam)),
            "delta2_at_zero_max": float(d0.max()),
            "b_tilde": bt.tolist(), "b_tilde_closed_form": closed.tolist(),
            "b_tilde_matches": bool(np.array_equal(bt, closed))}


def claim_cross_check(cfg: CounterexampleConfig, u1: GridFunction, m, stride=4) -> dict:
    """[L_m u1]_{C^alpha'(-1/4, 1/4)} against ||u1||_{C^(sigma+alpha)} + ||u1||_{C^alpha}."""
    e = alpha_prime(cfg.sigma, cfg.alpha)
    k = oscillating_kernel(cfg.sigma, m)
    x = u1.x
    sel = np.nonzero(np.abs(x) <= 0.25 + 1e-12)[0][::stride]
    xs = x[sel]
    vals = np.array([linear_apply(u1, k, xi, LINEAR) for xi in xs])
    dx = np.abs(xs[None, :] - xs[:, None])
    np.fill_diagonal(dx, np.inf)
    lhs = float(np.max(np.abs(vals[None, :] - vals[:, None]) / dx ** e.alpha_prime))
    sup = float(np.max(np.abs(u1.values)))
    rhs = (sup + holder_quotient(u1, cfg.sigma + cfg.alpha, (-0.5, 0.5))
           + sup + holder_quotient(u1, cfg.alpha, (-1.0, 1.0)))
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else math.inf}


@dataclass
class BlowupReport:
    kind: str
    sigma: float
    alpha: float
    h: float
    rows: list = field(default_factory=list)
    refinement: dict = field(default_factory=dict)

    COLUMNS = ("m", "sup_norm", "calpha_seminorm", "csigma_alpha_seminorm", "id_at_zero",
               "id_at_half_over_m")

    def column(self, name):
        return [r[name] for r in self.rows]

    def to_json(self):
        return {"kind": self.kind, "sigma": self.sigma, "alpha": self.alpha, "h": self.h,
                "rows": self.rows, "refinement": self.refinement}

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for r in self.rows:
                w.writerow([r[c] for c in self.COLUMNS])


def seminorms(cfg: CounterexampleConfig, u: GridFunction):
    ca = seminorm(u, SeminormQuery(cfg.alpha, (-1.0, 1.0)))
    csa = seminorm(u, SeminormQuery(cfg.sigma + cfg.alpha, (-0.5, 0.5)))
    return ca, csa


def _sweep_one(args):
    cfg, m, extras = args
    rep = solve(cfg, m)
    u = rep.solution
    ca, csa = seminorms(cfg, u)
    u1, u2 = split_solution(u)
    row = {"m": m, "sup_norm": float(np.max(np.abs(u.values))), "calpha_seminorm": ca,
           "csigma_alpha_seminorm": csa, "iterations": rep.iterations, "residual": rep.residual}
    if cfg.kind == "linear":
        ident = oscillation_identities(cfg, u2, m)
        row["id_at_zero"] = ident["at_zero"]
        row["id_at_half_over_m"] = ident["at_half_over_m"]
        row["odd_defect"] = float(np.max(np.abs(u.values + u.values[::-1])))
    else:
        row["id_at_zero"] = extremal_apply(u2, "plus", cfg.params, 0.0, cfg.sigma, LINEAR)
        row["id_at_half_over_m"] = extremal_apply(u2, "plus", cfg.params, 1.0 / (2 * m), cfg.sigma, LINEAR)
        row.update({k: v for k, v in nonlinear_identities(cfg, u, m).items()
                    if k in ("u_at_zero", "tau", "b_is_lambda", "b_tilde_matches")})
    C, ok = barrier_check(u, cfg.barrier_exponent, (-1.0, 1.0))
    row["barrier_C"] = C
    row["barrier_stable"] = ok
    if extras:
        row["claim_cross_check"] = claim_cross_check(cfg, u1, m)
    return {k: _builtin(v) for k, v in row.items()}


def _builtin(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def blowup_sweep(cfg: CounterexampleConfig, refine=False, extras=True, workers=1) -> BlowupReport:
    """Solve for every m, track the seminorms and identities, optionally re-solve the largest m at h/2."""
    jobs = [(cfg, m, extras) for m in cfg.ms]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    rep = BlowupReport(cfg.kind, cfg.sigma, cfg.alpha, cfg.h, rows)
    if refine:
        m = max(cfg.ms)
        fine = cfg.refined()
        u = solve(fine, m).solution
        ca, csa = seminorms(fine, u)
        last = next(r for r in rows if r["m"] == m)
        rep.refinement = {
            "m": m, "h": fine.h, "calpha_seminorm": ca, "csigma_alpha_seminorm": csa,
            "calpha_change": abs(ca - last["calpha_seminorm"]) / last["calpha_seminorm"],
            "csigma_alpha_change": abs(csa - last["csigma_alpha_seminorm"]) / last["csigma_alpha_seminorm"],
        }
    return rep
