"""Kernel classes, certification checks and mollification.

A kernel is ``K(x, y) = xfactor(x) * b(|y|) * (2 - sigma) |y|^(-1-sigma)``
where the modulation ``b`` is a list of pieces in ``|y|``.  Piece kinds:

``Const(v)``
    constant value.
``SignCos(m, base, amp)``
    ``base + amp * sign(cos(m pi |y|))``, the rough oscillating modulation.
``CosMod(base, amp, freq)``
    ``base + amp * cos(freq |y|)``, smooth and periodic.
``Smooth(f)``
    any vectorized callable; only allowed on bounded pieces.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import NonHolderKernel, SingularArgument
from .grid import EllipticityParams, SignSin
from .quad import gauss_legendre, geometric_refine, panel_nodes, power_moment

INF = math.inf


@dataclass(frozen=True)
class Const:
    value: float

    def __call__(self, y):
        return np.full(np.shape(y), float(self.value))

    def jumps(self, lo, hi):
        return np.empty(0)

    period = None
    phases = ()
    piecewise_constant = True

    def bounds(self, lo, hi):
        return self.value, self.value

    def to_json(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class SignCos:
    m: float
    base: float = 2.0
    amp: float = 1.0

    def __call__(self, y):
        s = SignSin(self.m, -0.5 / self.m)(np.abs(y))
        return self.base + self.amp * s

    def jumps(self, lo, hi):
        return SignSin(self.m, -0.5 / self.m).jumps(lo, hi)

    @property
    def period(self):
        return 2.0 / self.m

    @property
    def phases(self):
        return (0.5 / self.m, 1.5 / self.m)

    piecewise_constant = True

    def bounds(self, lo, hi):
        return self.base - abs(self.amp), self.base + abs(self.amp)

    def to_json(self):
        return {"kind": "sign_cos", "m": self.m, "base": self.base, "amp": self.amp}


@dataclass(frozen=True)
class CosMod:
    base: float = 2.0
    amp: float = 1.0
    freq: float = 1.0

    def __call__(self, y):
        return self.base + self.amp * np.cos(self.freq * np.abs(y))

    def jumps(self, lo, hi):
        return np.empty(0)

    @property
    def period(self):
        return 2.0 * math.pi / self.freq

    phases = ()
    piecewise_constant = False

    def bounds(self, lo, hi):
        if hi - lo >= self.period or math.isinf(hi):
            return self.base - abs(self.amp), self.base + abs(self.amp)
        ys = np.linspace(lo, hi, 1001)
        v = self(ys)
        slack = abs(self.amp) * self.freq * (hi - lo) / 1000
        return float(v.min()) - slack, float(v.max()) + slack

    def to_json(self):
        return {"kind": "smooth_cos", "base": self.base, "amp": self.amp, "freq": self.freq}


@dataclass(frozen=True)
class Smooth:
    f: Callable
    lipschitz: float | None = None

    def __call__(self, y):
        return np.asarray(self.f(np.abs(np.asarray(y, dtype=float))), dtype=float)

    def jumps(self, lo, hi):
        return np.empty(0)

    period = None
    phases = ()
    piecewise_constant = False

    def bounds(self, lo, hi):
        ys = np.linspace(lo, hi, 1001)
        v = self(ys)
        if self.lipschitz is None:
            d = np.abs(np.diff(v))
            slack = 2.0 * float(d.max()) if d.size else 0.0
        else:
            slack = self.lipschitz * (hi - lo) / 2000
        return float(v.min()) - slack, float(v.max()) + slack

    def to_json(self):
        raise ValueError("callable modulations are not serializable")


@dataclass(frozen=True)
class ModPiece:
    lo: float
    hi: float
    mod: object


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Even kernel b(x, y) (2 - sigma) |y|^(-1-sigma) with piecewise modulation."""

    sigma: float
    pieces: tuple
    xfactor: Callable | None = None

    def __post_init__(self):
        if not 0 < self.sigma < 2:
            raise ValueError("sigma must lie in (0, 2)")
        ps = tuple(sorted(self.pieces, key=lambda p: p.lo))
        if ps[0].lo != 0 or ps[-1].hi != INF:
            raise ValueError("modulation pieces must cover [0, inf)")
        for p, q in zip(ps[:-1], ps[1:]):
            if p.hi != q.lo:
                raise ValueError("modulation pieces leave a gap or overlap")
        if isinstance(ps[-1].mod, Smooth):
            raise ValueError("the unbounded piece needs a closed-form modulation")
        object.__setattr__(self, "pieces", ps)

    # constructors

    @staticmethod
    def flat(sigma, value=1.0):
        return KernelSpec(sigma, (ModPiece(0.0, INF, Const(value)),))

    @staticmethod
    def oscillating(sigma, m, inner=1.0, radius=1.0, base=2.0, amp=1.0):
        """Flat inside |y| < radius, base + amp sign cos(m pi y) outside."""
        return KernelSpec(sigma, (ModPiece(0.0, radius, Const(inner)),
                                  ModPiece(radius, INF, SignCos(m, base, amp))))

    @staticmethod
    def smooth_cos(sigma, base=2.0, amp=1.0, freq=1.0):
        return KernelSpec(sigma, (ModPiece(0.0, INF, CosMod(base, amp, freq)),))

    @staticmethod
    def piecewise(sigma, edges, values):
        """Piecewise-constant modulation; edges are the interior breakpoints."""
        e = [0.0, *edges, INF]
        return KernelSpec(sigma, tuple(ModPiece(a, b, Const(v)) for a, b, v in zip(e[:-1], e[1:], values)))

    # evaluation

    @property
    def c_sigma(self):
        return 2.0 - self.sigma

    def b(self, y):
        """Modulation b(|y|) (x-independent part)."""
        ay = np.abs(np.asarray(y, dtype=float))
        out = np.empty(ay.shape)
        for p in self.pieces:
            sel = (ay >= p.lo) & (ay < p.hi)
            if np.any(sel):
                out[sel] = p.mod(ay[sel])
        return out

    def xf(self, x):
        return 1.0 if self.xfactor is None else float(self.xfactor(x))

    def envelope(self, y):
        return self.c_sigma * np.abs(y) ** (-1.0 - self.sigma)

    def __call__(self, x, y):
        return kernel_eval(self, x, y)

    @cached_property
    def piecewise_constant(self):
        return all(p.mod.piecewise_constant for p in self.pieces)

    @cached_property
    def is_flat(self):
        return self.xfactor is None and all(isinstance(p.mod, Const) and p.mod.value == 1.0
                                            for p in self.pieces)

    def breaks(self, lo, hi):
        """Points in (lo, hi) where b may jump or change formula."""
        out = []
        for p in self.pieces:
            if p.hi <= lo or p.lo >= hi:
                continue
            if lo < p.lo < hi:
                out.append(np.array([p.lo]))
            out.append(p.mod.jumps(max(lo, p.lo), min(hi, p.hi)))
        if not out:
            return np.empty(0)
        br = np.unique(np.concatenate(out))
        return br[(br > lo) & (br < hi)]

    @property
    def far(self):
        return self.pieces[-1]

    def moments(self, a, b):
        """Integrals of b(y) K0(y) and y b(y) K0(y) over [a_j, b_j] (0 < a_j < b_j < inf)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        s = self.sigma
        if self.piecewise_constant:
            lo, hi = float(a.min()), float(b.max())
            br = self.breaks(lo, hi)
            if br.size == 0:
                v = self.b(0.5 * (a + b))
                return (v * self.c_sigma * power_moment(a, b, -s),
                        v * self.c_sigma * power_moment(a, b, 1 - s))
            m0 = np.zeros(a.shape)
            m1 = np.zeros(a.shape)
            for j in range(a.size):
                inner = br[(br > a[j]) & (br < b[j])]
                e = np.concatenate([[a[j]], inner, [b[j]]])
                v = self.b(0.5 * (e[:-1] + e[1:]))
                m0[j] = np.sum(v * power_moment(e[:-1], e[1:], -s))
                m1[j] = np.sum(v * power_moment(e[:-1], e[1:], 1 - s))
            return m0 * self.c_sigma, m1 * self.c_sigma
        m0 = np.zeros(a.shape)
        m1 = np.zeros(a.shape)
        t, w = gauss_legendre(16)
        for j in range(a.size):
            e = geometric_refine(np.concatenate([[a[j]], self.breaks(a[j], b[j]), [b[j]]]))
            y, wy = panel_nodes(e)
            k0 = self.b(y) * self.envelope(y) * wy
            m0[j] = np.sum(k0)
            m1[j] = np.sum(k0 * y)
        return m0, m1

    def to_json(self):
        if self.xfactor is not None:
            raise ValueError("x-dependent kernels are not serializable")
        return {"sigma": self.sigma, "modulation": _mod_to_json(self)}


def _mod_to_json(k):
    ps = k.pieces
    if len(ps) == 1 and isinstance(ps[0].mod, Const):
        v = ps[0].mod.value
        return {"kind": "flat"} if v == 1.0 else {"kind": "constant", "value": v}
    if len(ps) == 1 and isinstance(ps[0].mod, CosMod):
        return ps[0].mod.to_json()
    if (len(ps) == 2 and isinstance(ps[0].mod, Const) and isinstance(ps[1].mod, SignCos)):
        d = ps[1].mod.to_json()
        d.update(inner="flat" if ps[0].mod.value == 1.0 else ps[0].mod.value, radius=ps[0].hi)
        return d
    return {"kind": "pieces", "pieces": [dict(p.mod.to_json(), **{"from": p.lo, "to": None if math.isinf(p.hi) else p.hi})
                                         for p in ps]}


def _mod_from_json(d):
    kind = d["kind"]
    if kind == "flat":
        return Const(1.0)
    if kind == "constant":
        return Const(float(d["value"]))
    if kind == "sign_cos":
        return SignCos(float(d["m"]), float(d.get("base", 2.0)), float(d.get("amp", 1.0)))
    if kind == "smooth_cos":
        return CosMod(float(d.get("base", 2.0)), float(d.get("amp", 1.0)), float(d.get("freq", 1.0)))
    raise ValueError(f"unknown modulation kind {kind!r}")


def kernel_from_json(obj) -> KernelSpec:
    """Parse the kernel DSL, e.g. {"sigma": 1, "modulation": {"kind": "sign_cos", "m": 4}}."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    sigma = float(obj["sigma"])
    mod = obj.get("modulation", {"kind": "flat"})
    kind = mod["kind"]
    if kind == "sign_cos":
        inner = mod.get("inner", "flat")
        inner = 1.0 if inner == "flat" else float(inner)
        return KernelSpec.oscillating(sigma, float(mod["m"]), inner, float(mod.get("radius", 1.0)),
                                      float(mod.get("base", 2.0)), float(mod.get("amp", 1.0)))
    if kind == "pieces":
        ps = []
        for d in mod["pieces"]:
            hi = INF if d.get("to") is None else float(d["to"])
            ps.append(ModPiece(float(d["from"]), hi, _mod_from_json(d)))
        return KernelSpec(sigma, tuple(ps))
    return KernelSpec(sigma, (ModPiece(0.0, INF, _mod_from_json(mod)),))


def oscillating_kernel(sigma, m):
    """The rough kernel K_m: flat on |y| < 1, (2 + sign cos(m pi y)) outside."""
    return KernelSpec.oscillating(sigma, m)


# ---------------------------------------------------------------- operations


def kernel_eval(k: KernelSpec, x, y):
    """K(x, y) = xfactor(x) b(y) (2 - sigma) |y|^(-1-sigma)."""
    y = np.asarray(y, dtype=float)
    if np.any(y == 0):
        raise SingularArgument("kernel evaluated at y = 0")
    out = k.xf(x) * k.b(y) * k.envelope(y)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class L0Check:
    ok: bool
    lam: float
    Lam: float
    witness: float | None = None

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"L0": self.ok, "lambda": self.lam, "Lambda": self.Lam, "witness": self.witness}


def modulation_range(k: KernelSpec, xs=(0.0,)):
    """(min b, max b, argmin y, argmax y) over all pieces and the sampled x."""
    lo, hi, ylo, yhi = INF, -INF, None, None
    for p in k.pieces:
        a, b = p.lo, (p.hi if not math.isinf(p.hi) else p.lo + (p.mod.period or 1.0))
        mn, mx = p.mod.bounds(a, b)
        ys = np.linspace(a, b, 1001)[1:-1]
        vals = p.mod(ys)
        for x in xs:
            f = k.xf(x)
            vmn, vmx = sorted((f * mn, f * mx))
            if vmn < lo:
                lo, ylo = vmn, float(ys[np.argmin(f * vals)])
            if vmx > hi:
                hi, yhi = vmx, float(ys[np.argmax(f * vals)])
    return lo, hi, ylo, yhi


def check_L0(k: KernelSpec, p: EllipticityParams, xs=(0.0,)) -> L0Check:
    """lambda <= b <= Lambda on every piece; exact for piecewise constants."""
    lo, hi, ylo, yhi = modulation_range(k, xs)
    tol = 1e-12
    if lo < p.lam - tol:
        return L0Check(False, lo, hi, ylo)
    if hi > p.Lam + tol:
        return L0Check(False, lo, hi, yhi)
    return L0Check(True, lo, hi, None)


def check_x_holder(k: KernelSpec, x, xp, r, alpha):
    """Smallest A0 with int_{r<|y|<2r} |K(x,y) - K(x',y)| <= A0 |x-x'|^alpha (2-sigma) r^-sigma."""
    if r <= 0:
        raise ValueError("r must be positive")
    if k.xfactor is None or x == xp:
        return 0.0
    dx = abs(k.xf(x) - k.xf(xp))
    if dx == 0:
        return 0.0
    m0, _ = k.moments(np.array([r]), np.array([2 * r]))
    annulus = 2.0 * float(m0[0]) * dx
    return annulus / (abs(x - xp) ** alpha * k.c_sigma * r ** (-k.sigma))


def check_y_holder_tail(k: KernelSpec, rho, alpha, x=0.0, Lam=None, npts=400, span=64.0):
    """Measured [K(x,.)]_{C^alpha(R \\ B_rho)} rho^(1+sigma+alpha) / ((2-sigma) Lambda).

    Raises NonHolderKernel when the modulation has jumps outside B_rho.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    for p in k.pieces:
        if p.hi <= rho:
            continue
        if isinstance(p.mod, SignCos) and p.mod.amp != 0:
            raise NonHolderKernel("sign-modulated kernel is not Hölder in y")
    for p, q in zip(k.pieces[:-1], k.pieces[1:]):
        if p.hi > rho:
            left = float(p.mod(np.array([p.hi * (1 - 1e-13)]))[0])
            right = float(q.mod(np.array([q.lo]))[0])
            if abs(left - right) > 1e-12:
                raise NonHolderKernel(f"modulation jumps at |y| = {p.hi}")
    if Lam is None:
        Lam = modulation_range(k, (x,))[1]
    ys = rho * np.geomspace(1.0, span, npts)
    ys = np.unique(np.concatenate([ys, rho + rho * np.geomspace(1e-6, 1.0, 60)]))
    kv = k.xf(x) * k.b(ys) * k.envelope(ys)
    best = 0.0
    for i in range(len(ys) - 1):
        d = np.abs(kv[i + 1:] - kv[i]) / (ys[i + 1:] - ys[i]) ** alpha
        best = max(best, float(d.max()))
    # pairs with the far point sent to infinity
    best = max(best, float(np.max(np.abs(kv) / (ys[-1] * 4) ** alpha)))
    return best * rho ** (1 + k.sigma + alpha) / (k.c_sigma * Lam)


# ---------------------------------------------------------------- mollification

_ETA_MASS = quad(lambda t: math.exp(-1.0 / (1.0 - t * t)), -1, 1, epsabs=1e-14, epsrel=1e-13)[0]


def eta(t):
    """Normalized bump exp(-1/(1-t^2)) on (-1, 1)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2)) / _ETA_MASS
    return out


def _step(u):
    u = np.asarray(u, dtype=float)
    f = lambda v: np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
    return f(u) / (f(u) + f(1.0 - u))


def xi(t):
    """Smooth cutoff: 1 on |t| <= 1/2, 0 on |t| >= 1."""
    t = np.abs(np.asarray(t, dtype=float))
    return _step(2.0 * (1.0 - t))


@dataclass(frozen=True)
class MollifierSpec:
    epsilon: float
    panels: int = 16

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    def nodes(self, breaks=()):
        """Quadrature nodes/weights for int f(t) eta_eps(t) dt over (-eps, eps)."""
        e = self.epsilon
        edges = np.linspace(-e, e, self.panels + 1)
        br = np.asarray(list(breaks), dtype=float)
        br = br[(br > -e) & (br < e)]
        if br.size:
            edges = np.unique(np.concatenate([edges, br]))
        t, w = panel_nodes(edges)
        return t, w * eta(t / e) / e

    def mass(self):
        t, w = self.nodes()
        return float(np.sum(w))


def _conv_y(k: KernelSpec, ms: MollifierSpec, y):
    """(b K0) convolved with eta_eps in y, at scalar y with |y| > eps."""
    e = ms.epsilon
    lo, hi = abs(y) - e, abs(y) + e
    br = k.breaks(max(lo, 1e-300), hi)
    # a jump of b(|z|) at |z| = c sits at t = y - c or y + c
    cuts = np.concatenate([y - br, y + br]) if br.size else ()
    t, w = ms.nodes(cuts)
    z = y - t
    return float(np.sum(w * k.b(z) * k.envelope(z)))


def _conv_x(k: KernelSpec, ms: MollifierSpec, x):
    if k.xfactor is None:
        return 1.0
    t, w = ms.nodes()
    return float(np.sum(w * np.array([k.xf(x - ti) for ti in t])))


def mollify_kernel(k: KernelSpec, ms: MollifierSpec, x, y):
    """xi(y/4eps) K0(y) + (1 - xi(y/4eps)) (K * eta_eps (x) eta_eps)(x, y)."""
    if y == 0:
        raise SingularArgument("kernel evaluated at y = 0")
    e = ms.epsilon
    k0 = k.c_sigma * abs(y) ** (-1.0 - k.sigma)
    if abs(y) <= 2 * e:
        return k0
    c = float(xi(y / (4 * e)))
    if c == 1.0:
        return k0
    return c * k0 + (1.0 - c) * _conv_x(k, ms, x) * _conv_y(k, ms, y)


def mollify_coeff(c, ms: MollifierSpec, x, breaks=()):
    """(c * eta_eps)(x) for a vectorized coefficient field c."""
    br = [x - b for b in breaks]
    t, w = ms.nodes(br)
    return float(np.sum(w * np.asarray(c(x - t), dtype=float)))


def mollified_ellipticity(k: KernelSpec, ms: MollifierSpec, p: EllipticityParams, x=0.0, ys=None):
    """Measured C with lambda/C <= K^eps / K0 <= C Lambda on sampled y."""
    e = ms.epsilon
    if ys is None:
        ys = np.unique(np.concatenate([e * np.linspace(2.0, 4.0, 41),
                                       np.geomspace(4 * e, 50.0, 400)]))
    ratio = np.array([mollify_kernel(k, ms, x, y) / (k.c_sigma * y ** (-1 - k.sigma)) for y in ys])
    C = max(1.0, float(ratio.max()) / p.Lam, p.lam / float(ratio.min()))
    return {"C": C, "ratio_min": float(ratio.min()), "ratio_max": float(ratio.max()),
            "L0": bool(C * p.Lam >= ratio.max() - 1e-12 and p.lam / C <= ratio.min() + 1e-12)}


def mollified_profile(k: KernelSpec, ms: MollifierSpec, ys):
    """(b K0) * eta_eps evaluated at each entry of ys (all with |y| > eps)."""
    ys = np.asarray(ys, dtype=float)
    return np.array([_conv_y(k, ms, float(y)) for y in ys.ravel()]).reshape(ys.shape)


def mollified_xfactor(k: KernelSpec, ms: MollifierSpec, x):
    return _conv_x(k, ms, x)
