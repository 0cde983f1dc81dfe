"""Truncated (s, theta)-energies, threshold fits and the empirical spectrum.

The energy of the graph measure is

    J_{s,theta} = integral over |xi| > 1 of |mu^(xi)|**(2/theta) |xi|**(s/theta - d)

with d = k + 1.  It is estimated by importance sampling with log-uniform
coordinate magnitudes, truncated at a ladder of dyadic radii; its growth
rate in the radius is the measurable signature of divergence.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.isotonic import IsotonicRegression
from sklearn.utils.validation import check_is_fitted

from ._validation import (CoverageError, FitError, ResolutionError, ValidationError,
                          check_dyadic_increasing, check_level, check_real, check_theta)
from .fourier import transform_sheet_many
from .paths import AdditiveSheet, make_sheet, sheet_seeds

R_LO = 2.0**-4
BETA_CUT = 0.05
N_BUCKETS = 7  # Cases 1..6 plus bucket 0 for intermediate orderings
NONE = 0


@dataclass
class FrequencySamples:
    """Struct-of-arrays sample set: rows ``(xi_1..xi_k, y)``, density, case tag."""

    X: np.ndarray
    density: np.ndarray
    case: np.ndarray
    R: float
    r_lo: float = R_LO

    def __len__(self):
        return self.X.shape[0]

    @property
    def k(self):
        return self.X.shape[1] - 1

    @property
    def norm(self):
        return np.linalg.norm(self.X, axis=1)


def proposal_density(X, R, r_lo=R_LO):
    """Product density of independent log-uniform magnitudes with random signs."""
    X = np.asarray(X, dtype=float)
    ax = np.abs(X)
    inside = np.all((ax >= r_lo) & (ax <= R), axis=-1)
    dens = np.prod(1.0 / (2.0 * ax * math.log(R / r_lo)), axis=-1)
    return np.where(inside, dens, 0.0)


def sample_frequencies(k, R, count, seed=0, r_lo=R_LO):
    """``count`` frequencies with each of the k+1 magnitudes log-uniform on [r_lo, R]."""
    R = check_real(R, "R", low=1.0, low_open=True)
    if count < 0:
        raise ValidationError("count must be >= 0")
    rng = np.random.default_rng(seed)
    logs = rng.uniform(math.log(r_lo), math.log(R), size=(count, k + 1))
    X = np.exp(logs) * rng.choice([-1.0, 1.0], size=(count, k + 1))
    return FrequencySamples(X, proposal_density(X, R, r_lo), classify_cases(X), float(R), r_lo)


def classify_cases(X):
    """Case tag 1..6 per row of ``X``, or 0 for intermediate orderings.

    With ``a_1 >= ... >= a_k`` the sorted |xi_j|: for |y| > 1 the cases
    place 1, |y| and y**2 below, between or above the block of a's; for
    |y| <= 1 the frequency is dominated by the horizontal part.  Comparisons
    are non-strict and the first matching case wins.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    a = -np.sort(-np.abs(X[:, :-1]), axis=1)
    a1, ak = a[:, 0], a[:, -1]
    a2 = a[:, 1] if a.shape[1] > 1 else np.zeros_like(a1)
    y = np.abs(X[:, -1])
    y2 = y * y
    high = y > 1.0
    conds = [
        high & (a1 <= 1.0),
        high & (1.0 <= ak) & (a1 <= y),
        high & (y <= ak) & (a1 <= y2),
        high & (y2 <= ak),
        ~high & (a1 > 1.0) & (a2 <= y2),
        ~high & (ak > 1.0),
    ]
    tags = np.zeros(X.shape[0], dtype=np.int8)
    for tag, cond in enumerate(conds, start=1):
        tags = np.where((tags == 0) & cond, tag, tags)
    return tags


def classify_case(f):
    """Case tag of a single frequency (a ``Frequency`` or a row)."""
    row = f.as_array() if hasattr(f, "as_array") else np.asarray(f, dtype=float)
    return int(classify_cases(row[None, :])[0])


@dataclass
class EnergyEstimate:
    s: float
    theta: float
    radii: np.ndarray
    I_values: np.ndarray
    std_errors: np.ndarray
    valid: np.ndarray
    case_breakdown: np.ndarray = field(repr=False)


def _moduli(source, samples, smoothing):
    """Replicate-by-sample array of |mu^| for the supported input kinds."""
    if isinstance(source, AdditiveSheet):
        source = [source]
    if callable(source) and not isinstance(source, (list, tuple)):
        return np.atleast_2d(np.abs(np.asarray(source(samples.X), dtype=float)))
    if isinstance(source, (list, tuple)) and source and isinstance(source[0], AdditiveSheet):
        return np.stack([np.abs(transform_sheet_many(sh, samples.X, smoothing)) for sh in source])
    mods = np.atleast_2d(np.asarray(source, dtype=float))
    if mods.shape[-1] != len(samples):
        raise ValidationError("precomputed moduli must have one value per sample")
    return np.abs(mods)


class _EnergyBatch:
    """Reusable per-sample quantities for many (s, theta) evaluations."""

    def __init__(self, moduli, samples, radii):
        self.radii = check_dyadic_increasing(radii)
        if self.radii[-1] > samples.R * math.sqrt(samples.k + 1) + 1e-9:
            raise ValidationError("largest radius exceeds the sampled box")
        norm = samples.norm
        keep = (norm > 1.0) & (samples.density > 0)
        order = np.argsort(norm[keep], kind="stable")
        self.n = len(samples)
        self.d = samples.k + 1
        self.norm = norm[keep][order]
        self.log_mod = np.log(np.maximum(moduli[:, keep][:, order], 1e-300))
        self.log_w = -np.log(samples.density[keep][order])
        self.case = samples.case[keep][order]
        self.counts = np.searchsorted(self.norm, self.radii, side="right")

    def terms(self, s, theta):
        """Integrand / density averaged over replicates, per kept sample."""
        e = (2.0 / theta) * self.log_mod + (s / theta - self.d) * np.log(self.norm) + self.log_w
        return np.exp(e).mean(axis=0)

    def estimate(self, s, theta):
        f = self.terms(s, theta)
        I = np.empty(self.radii.size)
        se = np.empty(self.radii.size)
        for m, c in enumerate(self.counts):
            part = f[:c]
            I[m] = part.sum() / self.n
            # variance of the zero-padded per-sample contributions
            second = np.sum(part * part) / self.n
            se[m] = math.sqrt(max(second - I[m] ** 2, 0.0) / max(self.n - 1, 1))
        valid = self.counts > 0
        top = f[: self.counts[-1]]
        shares = np.zeros(N_BUCKETS)
        if top.size and top.sum() > 0:
            shares = np.bincount(self.case[: top.size], weights=top, minlength=N_BUCKETS)
            shares = shares / shares.sum()
        else:
            shares[NONE] = 1.0
        I = np.maximum.accumulate(I)  # guards against round-off only; terms are >= 0
        return EnergyEstimate(s, theta, self.radii, I, se, valid, shares)


def truncated_energy(source, s, theta, radii, samples, smoothing=0.0):
    """Importance-sampled truncated energy at every radius of ``radii``.

    ``source`` is a sheet, a list of sheets (replicates are averaged), a
    callable mapping frequency rows to |mu^|, or precomputed moduli.
    I(R) is the unbiased estimate (1/N) sum 1[1 < |xi| <= R] f / p.
    """
    theta = check_theta(theta)
    s = check_real(s, "s")
    return _EnergyBatch(_moduli(source, samples, smoothing), samples, radii).estimate(s, theta)


def growth_rate(estimate, method="cumulative"):
    """Growth exponent of the truncated energy over the top half of the radii.

    ``increment`` regresses log(I(R_m) - I(R_{m-1})) on log R_m: the annular
    increments of a power-law integrand scale exactly as R**beta on both
    sides of the threshold.  ``cumulative`` regresses log I(R) itself,
    whose local slope overstates beta near the threshold.
    """
    ok = estimate.valid & (estimate.I_values > 0)
    r, I = estimate.radii[ok], estimate.I_values[ok]
    if method == "increment":
        inc = np.diff(I)
        r, I = r[1:], inc
    elif method != "cumulative":
        raise ValidationError(f"unknown growth-rate method {method!r}")
    half = r.size // 2
    lr, li = r[half:], I[half:]
    pos = li > 0
    if pos.sum() < 2:
        raise FitError("need at least two radii with positive growth in the top half")
    return float(np.polyfit(np.log(lr[pos]), np.log(li[pos]), 1)[0])


def threshold_fit(estimates, theta, method="cumulative"):
    """Threshold s* from growth rates beta(s) = (s - s*) / theta.

    The slope is fixed at 1/theta, so s* is the mean of s - theta beta(s)
    over the divergent grid points and s_err its standard error.
    """
    theta = check_theta(theta)
    estimates = sorted(estimates, key=lambda e: e.s)
    s = np.array([e.s for e in estimates])
    if s.size < 2 or np.max(np.diff(s)) > 0.1 + 1e-12:
        raise ValidationError("the s-grid needs step <= 0.1")
    if min(e.radii.size for e in estimates) < 5:
        raise ValidationError("threshold fits need at least 5 radii")
    beta = np.array([growth_rate(e, method) for e in estimates])
    sel = beta > BETA_CUT
    if sel.all() or not sel.any():
        which = "every" if sel.all() else "no"
        raise CoverageError(f"{which} grid point diverges; widen the s-grid")
    roots = s[sel] - theta * beta[sel]
    if roots.size < 2:
        return float(roots[0]), float("nan")
    return float(roots.mean()), float(np.std(roots, ddof=1) / math.sqrt(roots.size))


def theory_curve(k, theta):
    theta = np.asarray(theta, dtype=float)
    return np.minimum(k + theta / 2.0, 2.0 + k * theta)


@dataclass
class SpectrumConfig:
    n_samples: int = 100_000
    radii: tuple = tuple(2.0**m for m in range(4, 15))
    s_step: float = 0.05
    half_width: float = 0.75
    n_seeds: int = 8
    level: int = 14
    smoothing: float = 0.25
    r_lo: float = R_LO
    base_seed: int = 0
    sample_seed: int = 1


@dataclass
class SpectrumCurve:
    k: int
    theta_grid: np.ndarray
    s_star: np.ndarray
    s_err: np.ndarray
    s_star_raw: np.ndarray
    theory: np.ndarray
    theta0_estimate: float
    per_seed: np.ndarray = field(repr=False)
    estimates: dict = field(repr=False, default_factory=dict)


def s_grid(k, theta, step=0.05, half_width=0.75):
    centre = float(theory_curve(k, theta))
    n = int(round(2 * half_width / step))
    return centre - half_width + step * np.arange(n + 1)


def sup_decay_estimate(moduli, samples, radii):
    """theta = 0 spectrum: -2 x slope of log max|mu^| over dyadic annuli."""
    norm = samples.norm
    r = np.asarray(radii, dtype=float)
    logs_max, centres = [], []
    for lo, hi in zip(r[:-1], r[1:]):
        inside = (norm > lo) & (norm <= hi)
        if inside.sum() == 0:
            continue
        logs_max.append(np.mean(np.log(np.max(moduli[:, inside], axis=1))))
        centres.append(math.log(lo))
    if len(centres) < 3:
        raise CoverageError("too few populated annuli for a sup-decay fit")
    return float(-2.0 * np.polyfit(centres, logs_max, 1)[0])


def replicate_sheets(k, config):
    level = check_level(config.level)
    return [make_sheet(sheet_seeds(config.base_seed, k, r), level)
            for r in range(config.n_seeds)]


def spectrum_curve(sheets, theta_grid, config=None):
    """Thresholds s*(theta) from replicate-averaged energies.

    ``sheets`` is a sheet, a list of replicate sheets, or an integer k (the
    replicates are then generated from ``config``).
    """
    config = config or SpectrumConfig()
    if isinstance(sheets, int):
        sheets = replicate_sheets(sheets, config)
    elif isinstance(sheets, AdditiveSheet):
        sheets = [sheets]
    k = sheets[0].k
    theta_grid = np.array([check_theta(t) for t in theta_grid])
    samples = sample_frequencies(k, config.radii[-1], config.n_samples, config.sample_seed,
                                 config.r_lo)
    mods = _moduli(list(sheets), samples, config.smoothing)
    pooled = _EnergyBatch(mods, samples, config.radii)
    singles = [_EnergyBatch(mods[i:i + 1], samples, config.radii) for i in range(len(sheets))]
    s_star, s_err = np.empty(theta_grid.size), np.empty(theta_grid.size)
    per_seed = np.full((len(sheets), theta_grid.size), np.nan)
    estimates = {}
    for i, th in enumerate(theta_grid):
        grid = s_grid(k, th, config.s_step, config.half_width)
        ests = [pooled.estimate(s, th) for s in grid]
        estimates[float(th)] = ests
        s_star[i], s_err[i] = threshold_fit(ests, th)
        for r, batch in enumerate(singles):
            try:
                per_seed[r, i] = threshold_fit([batch.estimate(s, th) for s in grid], th)[0]
            except (CoverageError, FitError):
                pass
    iso = IsotonicRegression(increasing=True).fit(theta_grid, s_star)
    theta0 = sup_decay_estimate(mods, samples, config.radii)
    return SpectrumCurve(k, theta_grid, iso.predict(theta_grid), s_err, s_star,
                         theory_curve(k, theta_grid), theta0, per_seed, estimates)


def spectrum_table(curve):
    from .tables import Table

    rows = [(curve.k, th, s, sr, e, t) for th, s, sr, e, t in
            zip(curve.theta_grid, curve.s_star, curve.s_star_raw, curve.s_err, curve.theory)]
    rows.append((curve.k, 0.0, curve.theta0_estimate, curve.theta0_estimate, float("nan"),
                 float(min(curve.k, 1))))
    return Table(["k", "theta", "s_star", "s_star_raw", "s_err", "theory"],
                 ["integer", "real", "real", "real", "real", "real"], rows)


def energy_table(estimate):
    from .tables import Table

    rows = [(estimate.s, estimate.theta, r, I, e, int(v)) for r, I, e, v in
            zip(estimate.radii, estimate.I_values, estimate.std_errors, estimate.valid)]
    return Table(["s", "theta", "radius", "I", "std_error", "valid"],
                 ["real", "real", "real", "real", "real", "integer"], rows)


# ---------------------------------------------------------------- Frostman


@dataclass
class FrostmanResult:
    exponent: float
    radii: np.ndarray
    masses: np.ndarray
    excluded: list


def _ball_mass_1d(path, centre, r):
    t, w = path.times, path.values
    lo = np.searchsorted(t, t[centre] - r, side="left")
    hi = np.searchsorted(t, t[centre] + r, side="right")
    dt = t[lo:hi] - t[centre]
    dw = w[lo:hi] - w[centre]
    return np.count_nonzero(dt * dt + dw * dw <= r * r) * path.h


def _ball_mass_2d(sheet, centre, r):
    p1, p2 = sheet.paths
    n = p1.n_segments
    t = p1.times
    i, j = centre
    span = int(math.ceil(r / p1.h))
    a = slice(max(i - span, 0), min(i + span, n) + 1)
    b = slice(max(j - span, 0), min(j + span, n) + 1)
    d1 = t[a] - t[i]
    d2 = t[b] - t[j]
    dw = (p1.values[a] - p1.values[i])[:, None] + (p2.values[b] - p2.values[j])[None, :]
    dist2 = d1[:, None] ** 2 + d2[None, :] ** 2 + dw**2
    return np.count_nonzero(dist2 <= r * r) * p1.h**2


def ball_mass(sheet, centre, r):
    """Mass of the grid graph measure inside the ball of radius r at a graph point.

    ``centre`` is a grid index (k=1) or index pair (k=2).
    """
    if sheet.k == 1:
        return _ball_mass_1d(sheet.paths[0], int(np.atleast_1d(centre)[0]), r)
    if sheet.k == 2:
        return _ball_mass_2d(sheet, tuple(int(c) for c in centre), r)
    raise ValidationError("ball masses are implemented for k = 1 and k = 2")


def frostman_probe(sheet, radii, centers=16, seed=0):
    """Slope of log max-over-centres mu(B(x, r)) against log r.

    ``sheet`` may be a list of replicate sheets; their log masses are
    averaged before the slope is taken.
    """
    sheets = [sheet] if isinstance(sheet, AdditiveSheet) else list(sheet)
    radii = check_dyadic_increasing(radii)
    level = sheets[0].level
    floor = 4.0 * 2.0**-level
    excluded = [float(r) for r in radii if r < floor]
    kept = np.array([r for r in radii if r >= floor])
    if kept.size < 3:
        raise ResolutionError(f"fewer than 3 radii above the grid floor {floor:g}")
    rng = np.random.default_rng(seed)
    logs = []
    for sh in sheets:
        idx = rng.integers(0, 2**sh.level + 1, size=(centers, sh.k))
        logs.append([math.log(max(ball_mass(sh, c, r) for c in idx)) for r in kept])
    masses = np.exp(np.mean(logs, axis=0))
    slope = float(np.polyfit(np.log(kept), np.log(masses), 1)[0])
    return FrostmanResult(slope, kept, masses, excluded)


# --------------------------------------------------------------- estimators


class SpectrumEstimator(BaseEstimator):
    """``fit(k or sheets)`` runs ``spectrum_curve``; results in ``curve_``."""

    def __init__(self, theta_grid=(0.4, 0.6, 0.8, 1.0), n_samples=100_000, n_seeds=8,
                 level=14, smoothing=0.25, s_step=0.05, half_width=0.75, max_exp=14,
                 base_seed=0, sample_seed=1):
        self.theta_grid = theta_grid
        self.n_samples = n_samples
        self.n_seeds = n_seeds
        self.level = level
        self.smoothing = smoothing
        self.s_step = s_step
        self.half_width = half_width
        self.max_exp = max_exp
        self.base_seed = base_seed
        self.sample_seed = sample_seed

    def config(self):
        return SpectrumConfig(self.n_samples, tuple(2.0**m for m in range(4, self.max_exp + 1)),
                              self.s_step, self.half_width, self.n_seeds, self.level,
                              self.smoothing, R_LO, self.base_seed, self.sample_seed)

    def fit(self, X, y=None):
        self.curve_ = spectrum_curve(X, self.theta_grid, self.config())
        return self

    def transform(self, X=None):
        check_is_fitted(self, "curve_")
        return np.column_stack([self.curve_.theta_grid, self.curve_.s_star])


FROSTMAN_DEFAULTS = {1: (20, -12, -5), 2: (12, -8, -4)}


def default_frostman_radii(k):
    _, lo, hi = FROSTMAN_DEFAULTS[k]
    return [2.0**m for m in range(lo, hi + 1)]


class FrostmanEstimator(BaseEstimator):
    """Frostman exponent of a sheet or of replicate sheets (log masses averaged).

    Default radii stay well above the vertical grid step 2**(-level/2),
    where counting vertices stops resolving the graph, and well below the
    scale where balls start to hold most of the mass.
    """

    def __init__(self, radii=None, centers=16, random_state=0):
        self.radii = radii
        self.centers = centers
        self.random_state = random_state

    def fit(self, sheets, y=None):
        first = sheets if isinstance(sheets, AdditiveSheet) else sheets[0]
        radii = self.radii if self.radii is not None else default_frostman_radii(first.k)
        self.result_ = frostman_probe(sheets, radii, self.centers, self.random_state)
        self.exponent_ = self.result_.exponent
        return self
