"""Checks of the Liouville hypotheses on concrete global functions.

All checks run on finite samples of points, shifts and measures, so a pass
means "not falsified on the sample" and nothing more.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import EllipticityParams, GridFunction, HolderExponents
from .holder import growth_control_check, l2_poly_fit
from .operators import (QuadratureConfig, average_difference_apply, positive_negative_parts,
                        translation_difference_apply)

SAMPLE_NOTE = "finite sample: hypotheses not falsified on the sampled points, shifts and measures"


@dataclass(frozen=True, eq=False)
class LiouvilleInput:
    u: GridFunction
    exponents: HolderExponents
    C1: float
    params: EllipticityParams
    cfg: QuadratureConfig = QuadratureConfig()

    def __post_init__(self):
        if self.u.X < 8:
            raise ValueError("Liouville inputs need a grid reaching at least |x| = 8")
        if self.C1 <= 0:
            raise ValueError("C1 must be positive")

    @property
    def sigma(self):
        return self.exponents.sigma


def compute_P_N(inp: LiouvilleInput, x, base=0.0):
    """(P, N): integrals of the positive and negative parts of d2u(x, .) - d2u(base, .) against K0."""
    return positive_negative_parts(inp.u, x, base, inp.sigma, inp.cfg)


def _translation_margins(inp, x, shifts):
    lo, hi = -np.inf, np.inf
    for h in shifts:
        mm = translation_difference_apply(inp.u, h, "minus", inp.params, x, inp.sigma, inp.cfg)
        mp = translation_difference_apply(inp.u, h, "plus", inp.params, x, inp.sigma, inp.cfg)
        lo = max(lo, mm)
        hi = min(hi, mp)
    return lo, hi


def check_comparability(inp: LiouvilleInput, points, shifts=(0.5, -0.5, 1.0), base=0.0, atol=1e-8):
    """lambda/Lambda P <= N <= Lambda/lambda P at points where (ii) holds on the sampled shifts."""
    lam, Lam = inp.params.lam, inp.params.Lam
    rows = []
    for x in points:
        worst_minus, worst_plus = _translation_margins(inp, x, shifts)
        P, N = compute_P_N(inp, x, base)
        row = {"x": float(x), "P": P, "N": N, "M_minus_max": worst_minus, "M_plus_min": worst_plus}
        if worst_minus > atol or worst_plus < -atol:
            row["status"] = "hypothesis-not-verified"
        else:
            ok = lam / Lam * P <= N + atol and N <= Lam / lam * P + atol
            row["status"] = "pass" if ok else "fail"
        rows.append(row)
    return {"rows": rows, "passed": all(r["status"] != "fail" for r in rows), "note": SAMPLE_NOTE}


def check_hypotheses(inp: LiouvilleInput, shifts, measures, radii, points=(0.0, 0.5, -1.0, 2.0),
                     atol=1e-10):
    """Growth control (i), translation signs (ii) and averaged differences (iii) on samples."""
    growth = growth_control_check(inp.u, inp.exponents, inp.C1, radii)
    ii = []
    for x in points:
        for h in shifts:
            mm = translation_difference_apply(inp.u, h, "minus", inp.params, x, inp.sigma, inp.cfg)
            mp = translation_difference_apply(inp.u, h, "plus", inp.params, x, inp.sigma, inp.cfg)
            ii.append({"x": float(x), "h": float(h), "M_minus": mm, "M_plus": mp})
    iii = []
    for x in points:
        for mu in measures:
            v = average_difference_apply(inp.u, mu, inp.params, x, inp.sigma, inp.cfg)
            iii.append({"x": float(x), "measure": [list(map(float, a)) for a in mu], "M_plus": v})
    ii_minus = max((r["M_minus"] for r in ii), default=0.0)
    ii_plus = min((r["M_plus"] for r in ii), default=0.0)
    iii_min = min((r["M_plus"] for r in iii), default=0.0)
    rep = {
        "i": {"passed": growth.passed, "worst_ratio": max((r["ratio"] for r in growth.rows), default=0.0),
              "rows": growth.rows},
        "ii": {"passed": ii_minus <= atol and ii_plus >= -atol, "worst_M_minus": ii_minus,
               "worst_M_plus": ii_plus, "rows": ii},
        "iii": {"passed": iii_min >= -atol, "worst_M_plus": iii_min, "rows": iii},
        "note": SAMPLE_NOTE,
    }
    rep["passed"] = rep["i"]["passed"] and rep["ii"]["passed"] and rep["iii"]["passed"]
    return rep


def polynomial_conclusion_residual(inp: LiouvilleInput, R=None):
    """sup |u - p| / sup |u| on B_R(0), p the least-squares fit of degree nu (R defaults to the grid reach)."""
    u = inp.u
    R = u.X if R is None else R
    nu = min(inp.exponents.nu, 2)
    fit = l2_poly_fit(u, nu, 0.0, R)
    x = u.x
    sel = np.abs(x) <= R + 1e-12
    v = u.values[sel]
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(v - fit(x[sel])))) / scale
