"""Knapp caps on a rough graph and the two sides of the extension inequality.

Take g to be the indicator of a delta-box around a centre s.  The graph
over that box sits inside a box R with horizontal sides 2 delta and height
equal to the oscillation of the sheet there.  On a shrunken dual box
R*/100 the phases of g mu stay coherent, so

    || (g mu)^ ||_q  >~  mu(R) |R*/100|**(1/q),    || g ||_{L^p(mu)} = mu(R)**(1/p),

and the ratio of the two sides diverges as delta -> 0 whenever
p < kq / (k(q-1) - alpha) for an alpha-Hölder graph.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import FitError, ResolutionError, ValidationError, check_real
from .fourier import windowed_transform_1d_many

DUAL_SHRINK = 100.0
MIN_NODES = 16


@dataclass(frozen=True)
class KnappCap:
    centre: tuple
    delta: float
    h_min: float
    h_max: float
    mass: float

    @property
    def k(self):
        return len(self.centre)

    @property
    def height(self):
        return self.h_max - self.h_min

    @property
    def height_side(self):
        # a flat cap has no vertical scale; a unit side keeps the dual box finite
        return self.height if self.height > 0 else 1.0

    @property
    def alpha_eff(self):
        return math.log(self.height_side) / math.log(self.delta)

    @property
    def windows(self):
        return [(c - self.delta, c + self.delta) for c in self.centre]

    def dual_half_sides(self):
        """Half side lengths of R*/100: horizontal axes first, then vertical."""
        horiz = [1.0 / (2.0 * self.delta) / DUAL_SHRINK / 2.0] * self.k
        return horiz + [1.0 / self.height_side / DUAL_SHRINK / 2.0]

    def dual_volume(self):
        return float(np.prod([2.0 * a for a in self.dual_half_sides()]))


def _window_range(path, a, b):
    t = path.times
    inner = path.values[(t > a) & (t < b)]
    ends = np.interp([a, b], t, path.values)
    vals = np.concatenate((inner, ends))
    return float(vals.min()), float(vals.max())


def build_cap(sheet, s=None, delta=2.0**-4):
    """Cap of half-width ``delta`` around ``s`` (default: domain midpoint).

    The centre is clamped so the t-box stays inside [0, 1]^k.
    """
    delta = check_real(delta, "delta", low=0.0, high=0.25, low_open=True)
    if delta < 4 * 2.0**-sheet.level:
        raise ResolutionError(
            f"delta={delta:g} is below 4 grid cells at level {sheet.level}")
    s = [0.5] * sheet.k if s is None else list(np.atleast_1d(np.asarray(s, dtype=float)))
    if len(s) != sheet.k:
        raise ValidationError(f"centre must have {sheet.k} coordinates")
    s = tuple(min(max(float(c), delta), 1.0 - delta) for c in s)
    lo = hi = 0.0
    for p, c in zip(sheet.paths, s):
        a, b = _window_range(p, c - delta, c + delta)
        lo += a
        hi += b
    return KnappCap(s, delta, lo, hi, (2.0 * delta) ** sheet.k)


def grid_mass(sheet, cap):
    """Mass of R counted on the grid: cells whose left-end graph point lies in R."""
    if sheet.k > 2:
        raise ValidationError("grid counting is implemented for k <= 2")
    t = sheet.paths[0].times
    masks = [(t >= a) & (t < b) for a, b in cap.windows]
    h = sheet.paths[0].h
    if sheet.k == 1:
        w = sheet.paths[0].values
        return np.count_nonzero(masks[0] & (w >= cap.h_min) & (w <= cap.h_max)) * h
    w = sheet.paths[0].values[:, None] + sheet.paths[1].values[None, :]
    inside = masks[0][:, None] & masks[1][None, :] & (w >= cap.h_min) & (w <= cap.h_max)
    return np.count_nonzero(inside) * h * h


def _gauss_legendre(half, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x * half, w * half


@dataclass
class KnappNorms:
    lhs: float
    rhs: float
    lhs_closed: float
    lhs_quadrature: float
    lhs_real_part: float


def knapp_norms(sheet, cap, p, q, n_nodes=MIN_NODES):
    """Lower bound on ||(g mu)^||_q (two routes, max reported) and ||g||_{L^p(mu)}."""
    p = check_real(p, "p", low=1.0)
    q = check_real(q, "q", low=1.0)
    if n_nodes < MIN_NODES:
        raise ValidationError(f"need at least {MIN_NODES} quadrature nodes per axis")
    rhs = cap.mass ** (1.0 / p)
    closed = cap.mass * cap.dual_volume() ** (1.0 / q)
    halves = cap.dual_half_sides()
    xi, wx = _gauss_legendre(halves[0], n_nodes)
    y, wy = _gauss_legendre(halves[-1], n_nodes)
    X, Y = np.meshgrid(xi, y, indexing="ij")
    mod_int = np.ones(n_nodes)
    real_int = np.ones(n_nodes)
    for path, (a, b), c in zip(sheet.paths, cap.windows, cap.centre):
        vals = windowed_transform_1d_many(path, a, b, X, Y)
        # rotate out the phase of the centre point before taking real parts
        rot = np.exp(2j * np.pi * (X * c + Y * float(path(c))))
        mod_int *= wx @ np.abs(vals) ** q
        real_int *= wx @ np.maximum((vals * rot).real, 0.0) ** q
    quad = float(wy @ mod_int) ** (1.0 / q)
    real_part = float(wy @ real_int) ** (1.0 / q)
    return KnappNorms(max(closed, quad), rhs, closed, quad, real_part)


@dataclass
class KnappResult:
    deltas: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    lhs_closed: np.ndarray
    lhs_quadrature: np.ndarray
    heights: np.ndarray
    p: float
    q: float
    alpha: float
    alpha_eff: float
    fitted_lhs_exponent: float
    fitted_rhs_exponent: float
    lhs_exponent_err: float
    ratio_slope: float
    ratio_slope_err: float
    caps: list = field(repr=False, default_factory=list)

    @property
    def k(self):
        return self.caps[0].k if self.caps else 1

    @property
    def predicted_lhs_exponent(self):
        return (self.k * (self.q - 1) - self.alpha_eff) / self.q

    @property
    def violated(self):
        """The lhs/rhs ratio diverges as delta -> 0 beyond two standard errors."""
        return self.ratio_slope < -2.0 * self.ratio_slope_err


def _slope(x, y):
    if x.size < 3:
        raise FitError("need at least three scales for a slope with an error bar")
    (b, a), cov = np.polyfit(np.log(x), np.log(y), 1, cov="unscaled")
    resid = np.log(y) - (a + b * np.log(x))
    s2 = float(resid @ resid) / (x.size - 2)
    return float(b), float(math.sqrt(max(cov[0, 0] * s2, 0.0)))


def knapp_scaling_fit(sheet, s, delta_list, p, q, alpha=0.45, n_nodes=MIN_NODES):
    """Fit lhs and rhs exponents in delta; alpha_eff is the slope of log height."""
    deltas = np.asarray(delta_list, dtype=float)
    if deltas.size < 4 or np.any(np.diff(deltas) >= 0):
        raise ValidationError("delta_list must hold >= 4 strictly decreasing values")
    e = np.log2(deltas)
    if not np.allclose(e, np.round(e)):
        raise ValidationError("delta_list must be powers of two")
    caps = [build_cap(sheet, s, d) for d in deltas]
    norms = [knapp_norms(sheet, c, p, q, n_nodes) for c in caps]
    lhs = np.array([n.lhs for n in norms])
    rhs = np.array([n.rhs for n in norms])
    heights = np.array([c.height_side for c in caps])
    alpha_eff = _slope(deltas, heights)[0] if np.ptp(heights) > 0 else 0.0
    b_l, e_l = _slope(deltas, lhs)
    b_r, _ = _slope(deltas, rhs)
    b_ratio, e_ratio = _slope(deltas, lhs / rhs)
    return KnappResult(deltas, lhs, rhs, np.array([n.lhs_closed for n in norms]),
                       np.array([n.lhs_quadrature for n in norms]), heights, p, q, alpha,
                       alpha_eff, b_l, b_r, e_l, b_ratio, e_ratio, caps)


def p_threshold(k, q, alpha):
    """Exponent p below which the extension estimate must fail: kq / (k(q-1) - alpha)."""
    return k * q / (k * (q - 1) - alpha)


def scaling_table(result):
    from .tables import Table

    rows = [(d, lc, lq, r, l / r) for d, lc, lq, r, l in
            zip(result.deltas, result.lhs_closed, result.lhs_quadrature, result.rhs, result.lhs)]
    return Table(["delta", "lhs_closed", "lhs_quadrature", "rhs", "ratio"],
                 ["real"] * 5, rows)


class KnappScaling(BaseEstimator):
    """Estimator wrapper around ``knapp_scaling_fit``; result in ``result_``."""

    def __init__(self, p=2.0, q=4.0, alpha=0.45, centre=None,
                 deltas=tuple(2.0**-m for m in range(4, 10)), n_nodes=MIN_NODES):
        self.p = p
        self.q = q
        self.alpha = alpha
        self.centre = centre
        self.deltas = deltas
        self.n_nodes = n_nodes

    def fit(self, sheet, y=None):
        self.result_ = knapp_scaling_fit(sheet, self.centre, self.deltas, self.p, self.q,
                                         self.alpha, self.n_nodes)
        return self

    def exponents(self):
        check_is_fitted(self, "result_")
        r = self.result_
        return r.fitted_lhs_exponent, r.fitted_rhs_exponent, r.predicted_lhs_exponent
