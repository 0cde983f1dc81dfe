"""Exact exponent thresholds for extension estimates on additive Brownian graphs.

Everything here is rational arithmetic on ``fractions.Fraction``; the only
floating-point path is ``generalized_st_q`` on a tabulated spectrum.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy.optimize import minimize_scalar

from ._validation import ValidationError

INF = math.inf


def _q(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def _check_k(k):
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    return k


def dual(q):
    """Hölder conjugate q' with 1/q + 1/q' = 1."""
    if q == INF:
        return Fraction(1)
    q = _q(q)
    if q <= 1:
        raise ValidationError("the conjugate needs q > 1")
    return q / (q - 1)


def stein_tomas_q(dim_F, dim_Fr, d):
    """2 + 4(d - dim_Fr) / dim_F; +inf when dim_F = 0."""
    dim_F, dim_Fr = _q(dim_F), _q(dim_Fr)
    if dim_F < 0 or not 0 <= dim_Fr <= d:
        raise ValidationError("need dim_F >= 0 and 0 <= dim_Fr <= d")
    if dim_F == 0:
        return INF
    return 2 + 4 * (d - dim_Fr) / dim_F


@dataclass(frozen=True)
class SpectrumInput:
    """A spectrum theta -> dim_F^theta, either piecewise affine or tabulated.

    ``branches`` holds (intercept, slope) pairs whose pointwise minimum is
    the curve; ``table`` holds (theta, value) pairs read off a grid.
    """

    dim_Fr: Fraction
    d: int
    branches: tuple = ()
    table: tuple = ()

    def __post_init__(self):
        if bool(self.branches) == bool(self.table):
            raise ValidationError("give exactly one of branches or table")
        if self.table:
            th = np.array([t for t, _ in self.table], dtype=float)
            v = np.array([x for _, x in self.table], dtype=float)
            if np.any(np.diff(th) <= 0) or np.any(np.diff(v) < -1e-12):
                raise ValidationError("tabulated spectrum must be non-decreasing in theta")
            if np.any(v < 0) or np.any(v > self.d):
                raise ValidationError("spectrum values must lie in [0, d]")

    @classmethod
    def brownian(cls, k):
        k = _check_k(k)
        return cls(Fraction(2 * k + 1, 2), k + 1,
                   branches=((Fraction(k), Fraction(1, 2)), (Fraction(2), Fraction(k))))

    def value(self, theta):
        if self.branches:
            return min(a + b * theta for a, b in self.branches)
        th, v = zip(*self.table)
        return float(np.interp(float(theta), th, v))


def brownian_spectrum(k, theta):
    """min{k + theta/2, 2 + k theta}, exact for rational theta."""
    return SpectrumInput.brownian(k).value(_q(theta))


def phase_transition(k):
    """theta where the two branches cross, (k-2)/(k-1/2); None when k <= 2."""
    k = _check_k(k)
    return Fraction(k - 2) / Fraction(2 * k - 1, 2) if k > 2 else None


def _q_theta(spec, theta):
    F = spec.value(theta)
    denom = F - theta * spec.dim_Fr
    if F < spec.d * theta or denom <= 0:
        return None
    return 2 + 2 * (spec.d - spec.dim_Fr) * (2 - theta) / denom


@dataclass(frozen=True)
class Threshold:
    q: object
    optimal_theta: object
    admissible: bool = True
    note: str = ""


def generalized_st_q(spec):
    """Minimise 2 + 2(d - D)(2 - theta) / (F(theta) - theta D) over admissible theta.

    On each affine piece the objective is a monotone linear-fractional map,
    so for piecewise-affine input the minimum sits at 0, 1, a branch
    crossing or an admissibility boundary; these are evaluated exactly.
    """
    if spec.branches:
        cands = {Fraction(0), Fraction(1)}
        for (a1, b1), (a2, b2) in combinations(spec.branches, 2):
            if b1 != b2:
                cands.add((a2 - a1) / (b1 - b2))
        for a, b in spec.branches:
            if b != spec.d:
                cands.add(a / (spec.d - b))
        best = None
        for th in sorted(c for c in cands if 0 <= c <= 1):
            q = _q_theta(spec, th)
            if q is not None and (best is None or q < best.q):
                best = Threshold(q, th)
        return best or Threshold(INF, None, False, "no admissible theta in [0, 1]")
    th = np.array([t for t, _ in spec.table], dtype=float)

    def obj(t):
        q = _q_theta(spec, float(t))
        return INF if q is None else float(q)

    vals = np.array([obj(t) for t in th])
    if not np.isfinite(vals).any():
        return Threshold(INF, None, False, "no admissible theta on the table")
    i = int(np.argmin(vals))
    lo, hi = th[max(i - 1, 0)], th[min(i + 1, th.size - 1)]
    if hi > lo:
        res = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
        if res.fun < vals[i]:
            return Threshold(float(res.fun), float(res.x))
    return Threshold(float(vals[i]), float(th[i]))


def sufficient_q_bm(k):
    """4 for k = 1, (8k + 2)/(3k) for k >= 2."""
    k = _check_k(k)
    return Fraction(4) if k == 1 else Fraction(8 * k + 2, 3 * k)


def necessary_q_bm(k):
    """sup{2/theta : dim_F^theta < (k+1) theta} on the closed-form spectrum."""
    spec = SpectrumInput.brownian(k)
    # the set is an interval (theta*, 1]; theta* is where the curve meets d*theta
    roots = [a / (spec.d - b) for a, b in spec.branches if b != spec.d]
    theta_star = min(r for r in roots if 0 < r <= 1 and spec.value(r) == spec.d * r)
    q = 2 / theta_star
    assert q == 2 + Fraction(1, k)
    return q


def knapp_constraint(k, q, alpha):
    """p_min = kq / (k(q-1) - alpha); +inf when the constraint is vacuous."""
    k = _check_k(k)
    q, alpha = _q(q), _q(alpha)
    denom = k * (q - 1) - alpha
    if denom <= 0:
        return INF
    return k * q / denom


def hambrook_laba_q(k):
    k = _check_k(k)
    return Fraction(4 * (k + 1), 2 * k + 1)


@dataclass
class ExponentReport:
    k: int
    d: int
    sufficient_q: Fraction
    necessary_q: Fraction
    hambrook_laba_q: Fraction
    stein_tomas_q: Fraction
    optimal_theta: Fraction
    duals: dict = field(default_factory=dict)
    # every threshold in the source inequalities is an open endpoint
    strict: dict = field(default_factory=dict)


def report(k):
    k = _check_k(k)
    spec = SpectrumInput.brownian(k)
    gst = generalized_st_q(spec)
    suff = sufficient_q_bm(k)
    if gst.q != suff:
        raise AssertionError(f"optimised threshold {gst.q} != closed form {suff}")
    vals = {
        "sufficient_q": suff,
        "necessary_q": necessary_q_bm(k),
        "hambrook_laba_q": hambrook_laba_q(k),
        "stein_tomas_q": stein_tomas_q(spec.value(Fraction(0)), spec.dim_Fr, spec.d),
    }
    return ExponentReport(k, k + 1, optimal_theta=gst.optimal_theta,
                          duals={n: dual(v) for n, v in vals.items()},
                          strict={n: True for n in vals}, **vals)


def bounds_table(k_max):
    """Rows k, sufficient, necessary, hambrook_laba, stein_tomas for k = 1..k_max."""
    from .tables import Table

    rows = []
    for k in range(1, _check_k(k_max) + 1):
        r = report(k)
        rows.append((k, r.sufficient_q, r.necessary_q, r.hambrook_laba_q, r.stein_tomas_q))
    return Table(["k", "sufficient", "necessary", "hambrook_laba", "stein_tomas"],
                 ["integer"] + ["rational"] * 4, rows)


def report_table(rep):
    from .tables import Table

    names = ["sufficient_q", "necessary_q", "hambrook_laba_q", "stein_tomas_q"]
    rows = [(n, getattr(rep, n), rep.duals[n], "strict" if rep.strict[n] else "non-strict")
            for n in names]
    rows.append(("optimal_theta", rep.optimal_theta, rep.optimal_theta, "-"))
    return Table(["quantity", "value", "dual", "endpoint"],
                 ["text", "rational", "rational", "text"], rows)
