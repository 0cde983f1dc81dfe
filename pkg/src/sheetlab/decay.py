"""Decay regimes of the one-dimensional factors and the almost-sure envelope.

A factor ``|mu_j^(xi_j, y)|`` is bounded, up to a random constant, by

    |y| / |xi_j|                    if 1 <= |y| <= |y|^2 <= |xi_j|
    1 / |xi_j|                      if |y| <= 1 <= |xi_j|
    (1 + sqrt(ln|y|)) / |y|         if max(|xi_j|, 1) <= |y|^2
    1                               if max(|xi_j|, |y|) <= 1

The ``+1`` keeps the vertical branch positive as |y| -> 1+.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import FitError, ValidationError, check_level, check_seeds
from .fourier import transform_1d_many
from .paths import make_sheet


class Regime(enum.IntEnum):
    HORIZONTAL_HIGH_Y = 0
    HORIZONTAL_LOW_Y = 1
    VERTICAL = 2
    CORE = 3


HORIZONTAL = (Regime.HORIZONTAL_HIGH_Y, Regime.HORIZONTAL_LOW_Y)
MIN_FIT_SAMPLES = 30


def classify_regimes(xi, y):
    """Vectorised regime tags; ties go to the earlier-listed branch."""
    ax = np.abs(np.asarray(xi, dtype=float))
    ay = np.abs(np.asarray(y, dtype=float))
    ay2 = ay * ay
    tags = np.full(np.broadcast(ax, ay).shape, -1, dtype=np.int8)
    conds = [
        (1.0 <= ay) & (ay <= ay2) & (ay2 <= ax),
        (ay <= 1.0) & (1.0 <= ax),
        np.maximum(ax, 1.0) <= ay2,
        np.maximum(ax, ay) <= 1.0,
    ]
    for tag, cond in zip(Regime, conds):
        tags = np.where((tags < 0) & cond, int(tag), tags)
    return tags


def classify_regime(xi_j, y):
    tag = int(classify_regimes(xi_j, y))
    if tag < 0:
        raise ValidationError(f"({xi_j}, {y}) falls in no regime")
    return Regime(tag)


def envelope_values(xi, y):
    ax = np.abs(np.asarray(xi, dtype=float))
    ay = np.abs(np.asarray(y, dtype=float))
    tags = classify_regimes(ax, ay)
    with np.errstate(all="ignore"):
        vertical = (1.0 + np.sqrt(np.maximum(np.log(np.maximum(ay, 1e-300)), 0.0))) / ay
        out = np.choose(np.maximum(tags, 0), [ay / ax, 1.0 / ax, vertical, np.ones_like(ax)])
    return np.where(tags < 0, np.nan, out)


def envelope(xi_j, y):
    return float(envelope_values(xi_j, y))


def log_uniform_pairs(n, lo=2.0**-4, hi=2.0**12, seed=0):
    """``n`` pairs (xi_j, y) with log-uniform magnitudes and random signs."""
    rng = np.random.default_rng(seed)
    mags = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(n, 2)))
    return mags * rng.choice([-1.0, 1.0], size=(n, 2))


@dataclass
class EnvelopeReport:
    """Ratios |mu_j^| / envelope for every coordinate factor of one sheet."""

    constants: list
    max_ratios: list
    regime_counts: dict
    table: list = field(repr=False, default_factory=list)

    @property
    def constant(self):
        return max(self.constants)


def envelope_violation_report(sheet, samples, smoothing=0.0, quantile=0.99):
    """Empirical envelope constants (99th-percentile ratio) per coordinate."""
    pairs = np.asarray(samples, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValidationError("samples must be an (n, 2) array of (xi_j, y) pairs")
    tags = classify_regimes(pairs[:, 0], pairs[:, 1])
    counts = {r.name: int(np.sum(tags == r)) for r in Regime}
    empty = [name for name, c in counts.items() if c == 0]
    if empty:
        raise ValidationError(f"samples leave regimes empty: {empty}")
    env = envelope_values(pairs[:, 0], pairs[:, 1])
    constants, maxima, table = [], [], []
    for path in sheet.paths:
        mod = np.abs(transform_1d_many(path, pairs[:, 0], pairs[:, 1], smoothing))
        ratio = mod / env
        constants.append(float(np.quantile(ratio, quantile)))
        maxima.append(float(ratio.max()))
        table.append((mod, ratio))
    return EnvelopeReport(constants, maxima, counts, table)


def regime_table(report, samples, coord=0):
    from .tables import Table

    pairs = np.asarray(samples, dtype=float)
    tags = classify_regimes(pairs[:, 0], pairs[:, 1])
    env = envelope_values(pairs[:, 0], pairs[:, 1])
    mod, ratio = report.table[coord]
    rows = [(x, y, Regime(t).name, m, e, r)
            for (x, y), t, m, e, r in zip(pairs.tolist(), tags, mod, env, ratio)]
    return Table(["xi_j", "y", "regime", "modulus", "envelope", "ratio"],
                 ["real", "real", "text", "real", "real", "real"], rows)


@dataclass
class DecayFit:
    regime: Regime
    exponent: float
    n_samples: int
    residual_rms: float
    sufficient: bool = True


def fit_log_slope(x, values, bands):
    """Common slope of log|values| on log|x| with one intercept per band."""
    lx = np.log(np.abs(x))
    lv = np.log(np.maximum(np.abs(values), 1e-300))
    labels, inv = np.unique(bands, return_inverse=True)
    design = np.zeros((lx.size, labels.size + 1))
    design[:, 0] = lx
    design[np.arange(lx.size), 1 + inv] = 1.0
    if np.ptp(lx) == 0 or np.linalg.matrix_rank(design) < design.shape[1]:
        raise FitError("degenerate design: need spread in log-frequency within bands")
    coef, *_ = np.linalg.lstsq(design, lv, rcond=None)
    resid = lv - design @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def decay_fit(sheet, regime, samples, coord=0, smoothing=0.0, moduli=None):
    """Fit the decay exponent of one factor inside one regime.

    Horizontal regimes regress on log|xi_j| within dyadic bands of |y|;
    the vertical regime regresses on log|y| within dyadic bands of |xi_j|.
    """
    regime = Regime(regime)
    if regime is Regime.CORE:
        raise ValidationError("the CORE regime has no decay to fit")
    pairs = np.asarray(samples, dtype=float)
    mask = classify_regimes(pairs[:, 0], pairs[:, 1]) == regime
    n = int(mask.sum())
    if n < MIN_FIT_SAMPLES:
        return DecayFit(regime, float("nan"), n, float("nan"), sufficient=False)
    xi, y = pairs[mask, 0], pairs[mask, 1]
    if moduli is None:
        values = transform_1d_many(sheet.paths[coord], xi, y, smoothing)
    else:
        values = np.asarray(moduli)[mask]
    if regime is Regime.VERTICAL:
        x, other = y, xi
    else:
        x, other = xi, y
    bands = np.floor(np.log2(np.maximum(np.abs(other), 1e-300)))
    slope, rms = fit_log_slope(x, values, bands)
    return DecayFit(regime, slope, n, rms)


@dataclass
class LevelSweep:
    levels: list
    constants: list
    max_ratios: list

    @property
    def drift(self):
        return max(self.constants) / min(self.constants)


def envelope_level_sweep(seeds, levels, samples, smoothing=0.0):
    """Envelope constants of the same seeds refined to each level."""
    seeds = check_seeds(seeds)
    consts, maxima = [], []
    for level in levels:
        rep = envelope_violation_report(make_sheet(seeds, check_level(level)), samples, smoothing)
        consts.append(rep.constant)
        maxima.append(max(rep.max_ratios))
    return LevelSweep(list(levels), consts, maxima)


class DecayEnvelopeEstimator(BaseEstimator):
    """Fit envelope constants and per-regime decay exponents of a sheet.

    After ``fit``: ``report_`` (EnvelopeReport), ``fits_`` (dict of
    DecayFit per coordinate and regime) and ``constant_``.
    """

    def __init__(self, n_samples=10_000, lo=2.0**-4, hi=2.0**12, quantile=0.99,
                 smoothing=0.0, random_state=0):
        self.n_samples = n_samples
        self.lo = lo
        self.hi = hi
        self.quantile = quantile
        self.smoothing = smoothing
        self.random_state = random_state

    def fit(self, sheet, y=None):
        self.samples_ = log_uniform_pairs(self.n_samples, self.lo, self.hi, self.random_state)
        self.report_ = envelope_violation_report(sheet, self.samples_, self.smoothing, self.quantile)
        self.fits_ = {}
        for j in range(sheet.k):
            mod = self.report_.table[j][0]
            for regime in (*HORIZONTAL, Regime.VERTICAL):
                self.fits_[(j, regime)] = decay_fit(sheet, regime, self.samples_, j, moduli=mod)
        self.constant_ = self.report_.constant
        return self

    def horizontal_exponents(self):
        check_is_fitted(self, "fits_")
        return [f.exponent for (j, r), f in self.fits_.items() if r in HORIZONTAL and f.sufficient]
