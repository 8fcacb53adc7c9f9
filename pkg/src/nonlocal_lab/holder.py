"""Hölder seminorms on grids, polynomial fits on balls, and growth checks.

For beta = k + beta' with k integer and beta' in (0, 1), the seminorm is the
largest quotient |D^k u(x) - D^k u(y)| / |x - y|^beta' over node pairs in a
region; D^k is a central difference.  Integer orders follow the convention
beta = (beta - 1) + 1, i.e. a Lipschitz quotient of D^(beta-1), and beta = 0
means sup |u|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegerOrder, OutOfStencil
from .grid import GridFunction, HolderExponents, derivative_array
from .quad import gauss_legendre

ALL_PAIRS_LIMIT = 4096
DENSE_LAGS = 256
LAG_RATIO = 1.02


@dataclass(frozen=True)
class SeminormQuery:
    beta: float
    region: tuple
    stride: int = 1

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if abs(self.beta - round(self.beta)) < 1e-12:
            raise IntegerOrder(f"beta = {self.beta} is an integer")
        a, b = self.region
        if not a < b:
            raise ValueError("empty region")
        if self.stride < 1:
            raise ValueError("stride must be a positive integer")

    @staticmethod
    def ball(beta, z, r, stride=1):
        return SeminormQuery(beta, (z - r, z + r), stride)


def split_order(beta):
    """(k, beta') with beta = k + beta', beta' in (0, 1]."""
    if beta == 0:
        return 0, 0.0
    k = math.ceil(beta) - 1
    return k, beta - k


def _lags(n):
    if n <= ALL_PAIRS_LIMIT:
        return range(1, n)
    lags = list(range(1, min(DENSE_LAGS, n - 1) + 1))
    L = float(lags[-1])
    while True:
        L *= LAG_RATIO
        if int(L) >= n - 1:
            break
        if int(L) > lags[-1]:
            lags.append(int(L))
    if lags[-1] != n - 1:
        lags.append(n - 1)
    return lags


def _pair_max(x, d, expo, weight=None):
    """max over pairs i < j of |d_j - d_i| / |x_j - x_i|^expo (times weight(i, j))."""
    n = len(x)
    best = 0.0
    for L in _lags(n):
        q = np.abs(d[L:] - d[:-L]) / np.abs(x[L:] - x[:-L]) ** expo
        if weight is not None:
            q = q * weight(L)
        if q.size:
            best = max(best, float(q.max()))
    return best


def _region_samples(u: GridFunction, k, a, b, stride=1, open_region=False):
    x, d = derivative_array(u, k)
    tol = 1e-9 * u.h
    if open_region:
        sel = (x > a + tol) & (x < b - tol)
    else:
        sel = (x >= a - tol) & (x <= b + tol)
    if a < -u.X + k * u.h - tol or b > u.X - k * u.h + tol:
        raise OutOfStencil(f"region ({a}, {b}) needs {k} nodes of margin inside the grid")
    idx = np.nonzero(sel)[0][::stride]
    return x[idx], d[idx]


def holder_quotient(u: GridFunction, beta, region, stride=1):
    """Seminorm of order beta on the closed region, any beta >= 0."""
    k, frac = split_order(beta)
    a, b = region
    x, d = _region_samples(u, k, a, b, stride)
    if beta == 0:
        return float(np.max(np.abs(d))) if d.size else 0.0
    if x.size < 2:
        return 0.0
    return _pair_max(x, d, frac)


def seminorm(u: GridFunction, q: SeminormQuery):
    """[u]_{C^beta(region)} as a max over node pairs."""
    return holder_quotient(u, q.beta, q.region, q.stride)


def adimensional_seminorm(u: GridFunction, beta, omega):
    """sup over pairs of d^beta |D^k u(x) - D^k u(y)| / |x - y|^beta', d = distance to the boundary."""
    if abs(beta - round(beta)) < 1e-12:
        raise IntegerOrder(f"beta = {beta} is an integer")
    k, frac = split_order(beta)
    a, b = omega
    x, d = _region_samples(u, k, a, b, open_region=True)
    if x.size < 2:
        return 0.0
    dist = np.minimum(x - a, b - x)
    weight = lambda L: np.minimum(dist[L:], dist[:-L]) ** beta
    return _pair_max(x, d, frac, weight)


def alpha_prime(sigma, alpha) -> HolderExponents:
    """Exponent record with alpha' = max(alpha/2, (sigma + alpha + nu)/2 - sigma)."""
    total = sigma + alpha
    if abs(total - round(total)) < 1e-12:
        raise IntegerOrder(f"sigma + alpha = {total} is an integer")
    nu = math.floor(total)
    ap = max(alpha / 2, (total + nu) / 2 - sigma)
    return HolderExponents(sigma, alpha, ap, nu)


# ---------------------------------------------------------------- growth control


@dataclass
class GrowthReport:
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r["passed"] for r in self.rows)

    def failures(self):
        return [r for r in self.rows if not r["passed"]]

    def to_json(self):
        return {"passed": self.passed, "rows": self.rows}


def growth_control_check(u: GridFunction, e: HolderExponents, C1, radii) -> GrowthReport:
    """Check [u]_{C^beta(B_R)} <= C1 R^(sigma + alpha - beta) for beta in {0, 1, ..., sigma + alpha'}."""
    top = e.sigma + e.alpha_prime
    betas = [float(b) for b in range(0, math.floor(top) + 1)] + [top]
    rep = GrowthReport()
    for R in radii:
        if R < 1:
            raise ValueError("radii must be at least 1")
        for beta in betas:
            val = holder_quotient(u, beta, (-R, R))
            bound = C1 * R ** (e.sigma + e.alpha - beta)
            rep.rows.append({"beta": beta, "R": float(R), "value": val, "bound": bound,
                             "ratio": val / bound, "passed": bool(val <= bound * (1 + 1e-12))})
    return rep


# ---------------------------------------------------------------- least-squares fits


@dataclass(frozen=True)
class PolyFit:
    """Best L2(B_r(z)) polynomial; ``coeffs`` are ascending in (x - z)."""

    nu: int
    z: float
    r: float
    coeffs: tuple
    orthogonality: tuple
    residual_norm: float

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float) - self.z, self.coeffs)


def _ball_nodes(u: GridFunction, z, r, npts=4):
    """Quadrature on [z - r, z + r], exact for the piecewise-cubic interpolant times a quadratic."""
    a, b = z - r, z + r
    if a < -u.X - 1e-12 or b > u.X + 1e-12:
        raise ValueError("ball leaves the grid domain")
    x = u.x
    inner = x[(x > a) & (x < b)]
    edges = np.concatenate([[a], inner, [b]])
    t, w = gauss_legendre(npts)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def l2_poly_fit(u: GridFunction, nu: int, z, r) -> PolyFit:
    """Normal equations in the Legendre basis of t = (x - z)/r."""
    if nu not in (0, 1, 2):
        raise ValueError("nu must be 0, 1 or 2")
    xq, wq = _ball_nodes(u, z, r)
    t = (xq - z) / r
    V = np.polynomial.legendre.legvander(t, nu)
    uq = u(xq)
    G = V.T @ (wq[:, None] * V)
    rhs = V.T @ (wq * uq)
    c_leg = np.linalg.solve(G, rhs)
    c_t = np.polynomial.legendre.leg2poly(c_leg)
    c_t = np.concatenate([c_t, np.zeros(nu + 1 - len(c_t))])
    coeffs = tuple(float(c) / r ** j for j, c in enumerate(c_t))
    res = uq - V @ c_leg
    scale = math.sqrt(float(np.sum(wq * uq ** 2)) * float(np.sum(wq))) or 1.0
    orth = tuple(float(v) / scale for v in V.T @ (wq * res))
    return PolyFit(nu, float(z), float(r), coeffs, orth, math.sqrt(float(np.sum(wq * res ** 2))))


# ---------------------------------------------------------------- scale-invariance claim


@dataclass(frozen=True)
class ClaimReport:
    lhs: float
    sup_scaled: float
    holds: bool

    def to_json(self):
        return {"lhs": self.lhs, "sup_scaled": self.sup_scaled, "holds": self.holds}


def interpolation_claim_check(u: GridFunction, beta, beta_prime, samples=1.0, tol=1e-12) -> ClaimReport:
    """Compare [u]_{C^beta(B_1/2)} with S = sup_{r, z in B_1/2} r^(beta'-beta) [u]_{C^beta'(B_r(z))}.

    Node pairs (p, q) are taken within distance ``samples`` of B_1/2.  A pair
    contributes its beta'-quotient to every ball around a node z of B_1/2
    that contains it, and the factor r^(beta'-beta) is largest for the
    smallest such ball, r = max(|p - z|, |q - z|); S is the max over pairs
    of that best contribution.
    """
    k = math.floor(beta)
    if not (k < beta_prime < beta):
        raise ValueError("need floor(beta) < beta' < beta")
    lhs = holder_quotient(u, beta, (-0.5, 0.5))
    reach = 0.5 + float(samples)
    x, d = _region_samples(u, k, max(-reach, -u.X + k * u.h), min(reach, u.X - k * u.h))
    zs = x[np.abs(x) <= 0.5 + 1e-12]
    zlo, zhi = zs[0], zs[-1]
    h = u.h
    S = 0.0
    for L in _lags(len(x)):
        p, q = x[:-L], x[L:]
        quot = np.abs(d[L:] - d[:-L]) / (q - p) ** (beta_prime - k)
        mid = np.clip(0.5 * (p + q), zlo, zhi)
        j = np.floor((mid - zlo) / h + 1e-9)
        best = np.full(p.shape, np.inf)
        for zc in (zlo + j * h, zlo + (j + 1) * h):
            zc = np.clip(zc, zlo, zhi)
            best = np.minimum(best, np.maximum(np.abs(p - zc), np.abs(q - zc)))
        S = max(S, float(np.max(quot * best ** (beta_prime - beta))))
    return ClaimReport(lhs, S, bool(lhs <= S * (1 + tol) + 1e-300))
