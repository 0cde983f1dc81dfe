"""Exceptions and input checks shared by the estimators and functions."""

from fractions import Fraction
from numbers import Integral, Real

import numpy as np

MAX_LEVEL = 26


class SheetlabError(Exception):
    """Base class for all package errors."""


class ValidationError(SheetlabError, ValueError):
    """Bad input: wrong shape, out-of-range parameter, duplicate seeds."""


class CapacityError(ValidationError):
    """Requested grid would not fit in addressable memory."""


class ResolutionError(ValidationError):
    """A scale is below what the grid model can resolve."""


class NumericError(SheetlabError, ArithmeticError):
    """A numerical procedure could not produce a meaningful answer."""


class FitError(NumericError):
    """Degenerate regression design."""


class CoverageError(NumericError):
    """The sampled grid does not cover the region a fit needs."""


def check_level(level):
    if isinstance(level, bool) or not isinstance(level, Integral):
        raise ValidationError(f"level must be an integer, got {level!r}")
    if level < 0:
        raise ValidationError(f"level must be >= 0, got {level}")
    if level > MAX_LEVEL:
        raise CapacityError(
            f"level {level} needs 2**{level}+1 values; the limit is {MAX_LEVEL}")
    return int(level)


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (Integral, np.integer)):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < 2**64:
        raise ValidationError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)


def check_seeds(seeds):
    seeds = [check_seed(s) for s in seeds]
    if not seeds:
        raise ValidationError("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise ValidationError(
            "seeds must be pairwise distinct (the coordinate paths are independent)")
    return seeds


def check_real(x, name, *, low=None, high=None, low_open=False, high_open=False):
    if isinstance(x, bool) or not isinstance(x, (Real, np.floating, np.integer)):
        raise ValidationError(f"{name} must be a real number, got {x!r}")
    x = float(x) if not isinstance(x, Fraction) else x
    if not np.isfinite(float(x)):
        raise ValidationError(f"{name} must be finite, got {x}")
    if low is not None and (x < low or (low_open and x == low)):
        raise ValidationError(f"{name} out of range: {x}")
    if high is not None and (x > high or (high_open and x == high)):
        raise ValidationError(f"{name} out of range: {x}")
    return x


def check_theta(theta, *, allow_zero=False):
    return check_real(theta, "theta", low=0.0, high=1.0, low_open=not allow_zero)


def check_frequencies(X, k):
    """Return ``X`` as a float array of shape (n, k + 1)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != k + 1:
        raise ValidationError(
            f"frequencies must have shape (n, {k + 1}) for k={k}, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("frequencies must be finite")
    return X


def check_dyadic_increasing(radii, name="radii"):
    r = np.asarray(radii, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D sequence")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ValidationError(f"{name} must be positive and strictly increasing")
    e = np.log2(r)
    if not np.allclose(e, np.round(e)):
        raise ValidationError(f"{name} must be powers of two")
    return r
