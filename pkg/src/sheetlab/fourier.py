"""Fourier transform of the graph measure of a piecewise-linear sheet.

The transform of an additive sheet factors into one-dimensional transforms
of the coordinate paths at a shared vertical frequency, and each of those
is a finite sum of closed-form segment integrals.
"""

import math
import os
from dataclasses import dataclass

import numba
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from ._validation import NumericError, ValidationError, check_frequencies, check_real
from .paths import AdditiveSheet, BrownianPath


def _apply_thread_cap():
    cap = os.environ.get("SHEETLAB_THREADS")
    if cap:
        numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


_apply_thread_cap()


@dataclass(frozen=True)
class Frequency:
    xi: tuple
    y: float

    def __post_init__(self):
        xi = tuple(float(v) for v in np.atleast_1d(self.xi))
        if not all(math.isfinite(v) for v in xi) or not math.isfinite(self.y):
            raise ValidationError("frequency entries must be finite")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "y", float(self.y))

    @property
    def k(self):
        return len(self.xi)

    def as_array(self):
        return np.array(self.xi + (self.y,))

    def __neg__(self):
        return Frequency(tuple(-v for v in self.xi), -self.y)


@dataclass(frozen=True)
class TransformValue:
    value: complex

    @property
    def modulus(self):
        return abs(self.value)


def segment_integral(c, h):
    """Integral of exp(-2 pi i c u) over [0, h] as h e^{-i pi c h} sinc(pi c h)."""
    c = np.asarray(c, dtype=float)
    if np.any(np.asarray(h) <= 0):
        raise ValidationError("segment length must be positive")
    ch = c * h
    out = h * np.exp(-1j * np.pi * ch) * np.sinc(ch)
    return complex(out) if out.ndim == 0 else out


def smoothing_factor(y, level, smoothing):
    """Fourier factor of a vertical Gaussian of width ``smoothing * 2**(-level/2)``."""
    if not smoothing:
        return 1.0
    sigma2 = smoothing**2 * 2.0**-level
    return np.exp(-2.0 * np.pi**2 * sigma2 * np.asarray(y, dtype=float) ** 2)


def _segment_sums(t, w, xi, y):
    xi = np.ascontiguousarray(xi, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    out = np.empty(xi.shape[0], dtype=np.complex128)
    _kernels.segment_sum_many(np.ascontiguousarray(t), np.ascontiguousarray(w), xi, y, out)
    return out


def transform_1d_many(path, xi, y, smoothing=0.0):
    """Vectorised ``transform_1d``; ``xi`` and ``y`` broadcast together."""
    xi, y = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(y, dtype=float))
    shape = xi.shape
    vals = _segment_sums(path.times, path.values, xi.ravel(), y.ravel())
    vals = vals * smoothing_factor(y.ravel(), path.level, smoothing)
    return vals.reshape(shape)


def transform_1d(path, xi, y, smoothing=0.0):
    """Transform of the graph measure of one path at (xi, y)."""
    xi = check_real(xi, "xi")
    y = check_real(y, "y")
    return TransformValue(complex(transform_1d_many(path, [xi], [y], smoothing)[0]))


def transform_sheet(sheet, f, smoothing=0.0):
    if not isinstance(f, Frequency):
        arr = np.asarray(f, dtype=float).ravel()
        if arr.size == 1 and arr[0] == 0.0:
            arr = np.zeros(sheet.k + 1)
        f = Frequency(tuple(arr[:-1]), arr[-1]) if arr.size >= 2 else None
    if f is None or f.k != sheet.k:
        raise ValidationError(f"frequency dimension does not match k={sheet.k}")
    value = 1.0 + 0.0j
    for p, x in zip(sheet.paths, f.xi):
        value *= transform_1d(p, x, f.y, smoothing).value
    return TransformValue(value)


def transform_sheet_many(sheet, X, smoothing=0.0):
    """Transform at each row ``(xi_1..xi_k, y)`` of ``X``."""
    X = check_frequencies(X, sheet.k)
    out = np.ones(X.shape[0], dtype=np.complex128)
    for j, p in enumerate(sheet.paths):
        out *= transform_1d_many(p, X[:, j], X[:, -1], smoothing)
    return out


def transform_riemann_oracle(path, xi, y, N, a=0.0, b=1.0, chunk=1 << 20):
    """Midpoint Riemann sum of the same integrand on N subintervals of [a, b].

    Kept deliberately independent of the segment-sum code path.
    """
    if N < 1:
        raise ValidationError("N must be >= 1")
    H = (b - a) / N
    total = 0.0 + 0.0j
    for lo in range(0, N, chunk):
        m = np.arange(lo, min(lo + chunk, N))
        t = a + (m + 0.5) * H
        w = np.interp(t, path.times, path.values)
        total += np.exp(-2j * np.pi * (xi * t + y * w)).sum()
    return complex(total * H)


def _window(path, a, b):
    t = path.times
    inner = (t > a) & (t < b)
    tt = np.concatenate(([a], t[inner], [b]))
    ww = np.interp(tt, t, path.values)
    return tt, ww


def windowed_transform_1d_many(path, a, b, xi, y):
    a = check_real(a, "a", low=0.0, high=1.0)
    b = check_real(b, "b", low=0.0, high=1.0)
    if a >= b:
        raise ValidationError(f"window needs a < b, got [{a}, {b}]")
    xi, y = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(y, dtype=float))
    tt, ww = _window(path, a, b)
    return _segment_sums(tt, ww, xi.ravel(), y.ravel()).reshape(xi.shape)


def windowed_transform_1d(path, a, b, xi, y):
    """Transform of the graph measure restricted to ``a <= t <= b``."""
    return complex(windowed_transform_1d_many(path, a, b, [xi], [y])[0])


class TransformGrid:
    """Bilinear interpolation of |transform_1d| on a log-log (|xi|, |y|) lattice.

    Two lattices are kept, for sign(xi) == sign(y) and for opposite signs.
    The grid validates itself against direct evaluation and refuses to be
    used when the error, relative to the largest checked modulus, exceeds
    ``rtol``.  (Pointwise relative error is meaningless near zeros.)
    """

    def __init__(self, path, lo, hi, n=129, smoothing=0.0, rtol=0.01, n_check=200, seed=0):
        self.path = path
        self.lo, self.hi = float(lo), float(hi)
        self.n = n
        self.smoothing = smoothing
        g = np.geomspace(self.lo, self.hi, n)
        self._log_axis = np.log(g)
        X, Y = np.meshgrid(g, g, indexing="ij")
        same = np.abs(transform_1d_many(path, X, Y, smoothing))
        opposite = np.abs(transform_1d_many(path, X, -Y, smoothing))
        self._tables = (same, opposite)
        for tab in self._tables:
            tab.setflags(write=False)
        self.max_rel_error = self._validate(n_check, seed)
        if self.max_rel_error > rtol:
            raise NumericError(
                f"interpolated grid misses direct evaluation by "
                f"{self.max_rel_error:.3g} > {rtol}; refine it or evaluate directly")

    def _validate(self, n_check, seed):
        rng = np.random.default_rng(seed)
        lx = rng.uniform(np.log(self.lo), np.log(self.hi), size=(2, n_check))
        xi = np.exp(lx[0]) * rng.choice([-1.0, 1.0], n_check)
        y = np.exp(lx[1]) * rng.choice([-1.0, 1.0], n_check)
        direct = np.abs(transform_1d_many(self.path, xi, y, self.smoothing))
        interp = self(xi, y)
        return float(np.max(np.abs(interp - direct)) / max(float(direct.max()), 1e-300))

    def __call__(self, xi, y):
        xi = np.asarray(xi, dtype=float)
        y = np.asarray(y, dtype=float)
        ax = self._log_axis
        step = ax[1] - ax[0]
        u = np.clip((np.log(np.abs(xi)) - ax[0]) / step, 0, self.n - 1 - 1e-12)
        v = np.clip((np.log(np.abs(y)) - ax[0]) / step, 0, self.n - 1 - 1e-12)
        i, j = u.astype(int), v.astype(int)
        fu, fv = u - i, v - j
        same = np.sign(xi) == np.sign(y)
        out = np.empty(np.broadcast(xi, y).shape)
        for tab, mask in ((self._tables[0], same), (self._tables[1], ~same)):
            ii, jj, a, b = i[mask], j[mask], fu[mask], fv[mask]
            out[mask] = ((1 - a) * (1 - b) * tab[ii, jj] + a * (1 - b) * tab[ii + 1, jj]
                         + (1 - a) * b * tab[ii, jj + 1] + a * b * tab[ii + 1, jj + 1])
        return out


class SurfaceTransformer(BaseEstimator):
    """Estimator-style wrapper: ``fit`` on a sheet, ``transform`` frequency rows.

    Parameters
    ----------
    smoothing : float
        Width of an optional vertical Gaussian mollifier in units of
        ``2**(-level/2)``; 0 gives the exact piecewise-linear transform.
    """

    def __init__(self, smoothing=0.0):
        self.smoothing = smoothing

    def fit(self, sheet, y=None):
        if isinstance(sheet, BrownianPath):
            sheet = AdditiveSheet((sheet,))
        if not isinstance(sheet, AdditiveSheet):
            raise ValidationError("fit expects an AdditiveSheet or BrownianPath")
        check_real(self.smoothing, "smoothing", low=0.0)
        self.sheet_ = sheet
        self.k_ = sheet.k
        return self

    def transform(self, X):
        check_is_fitted(self, "sheet_")
        return transform_sheet_many(self.sheet_, X, self.smoothing)

    def modulus(self, X):
        return np.abs(self.transform(X))


def sweep_table(sheet, X, smoothing=0.0):
    """Frequency sweep as a table with columns xi_1..xi_k, y, Re, Im, modulus."""
    from .tables import Table

    X = check_frequencies(X, sheet.k)
    vals = transform_sheet_many(sheet, X, smoothing)
    names = [f"xi_{j + 1}" for j in range(sheet.k)] + ["y", "value", "modulus"]
    types = ["real"] * (sheet.k + 1) + ["complex", "real"]
    rows = [tuple(x) + (v, abs(v)) for x, v in zip(X.tolist(), vals)]
    return Table(names, types, rows)
