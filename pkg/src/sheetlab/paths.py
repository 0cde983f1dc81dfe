"""Dyadic Brownian paths, additive sheets and an empirical Hölder probe."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import ValidationError, check_level, check_real, check_seed, check_seeds
from .rng import derive_seed, hash_normals

DEFAULT_LEVEL = 12
DEFAULT_N_SEEDS = 8


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """Values of a path on the grid ``t = m / 2**level``, linear in between.

    ``seed`` is ``None`` for synthetic paths built from explicit values.
    """

    level: int
    values: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size != 2**self.level + 1:
            raise ValidationError(
                f"level {self.level} needs {2**self.level + 1} values, got {v.size}")
        if v[0] != 0.0:
            raise ValidationError("paths start at 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_segments(self):
        return 2**self.level

    @property
    def h(self):
        return 2.0**-self.level

    @property
    def times(self):
        return np.linspace(0.0, 1.0, self.n_segments + 1)

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values, dtype=float)
        level = int(round(np.log2(values.size - 1))) if values.size > 1 else -1
        if level < 0 or 2**level + 1 != values.size:
            raise ValidationError("number of values must be 2**level + 1")
        return cls(level, values - values[0], None)

    @classmethod
    def from_function(cls, f, level):
        """Sample a function handle ``f: [0, 1] -> R`` on the dyadic grid."""
        level = check_level(level)
        t = np.linspace(0.0, 1.0, 2**level + 1)
        v = np.asarray(f(t), dtype=float) * np.ones_like(t)
        return cls(level, v - v[0], None)


def gen_path(seed, level=DEFAULT_LEVEL):
    """Brownian path on the level-``level`` dyadic grid.

    W(1) is drawn first; every later midpoint is a Brownian-bridge draw keyed
    by ``(seed, refinement level, odd index)``, so coarser values never move
    when the level is raised.
    """
    seed = check_seed(seed)
    level = check_level(level)
    n = 2**level
    w = np.zeros(n + 1)
    w[n] = hash_normals(seed, 0, np.array([1]))[0]
    for lev in range(1, level + 1):
        step = 2 ** (level - lev + 1)
        half = step // 2
        at = np.arange(half, n, step)
        z = hash_normals(seed, lev, np.arange(1, 2**lev, 2))
        # bridge over an interval of length 2**-(lev-1): midpoint variance 2**-(lev+1)
        w[at] = 0.5 * (w[at - half] + w[at + half]) + np.sqrt(2.0 ** -(lev + 1)) * z
    return BrownianPath(level, w, seed)


@dataclass(frozen=True, eq=False)
class AdditiveSheet:
    """W(t) = sum_i path_i(t_i) over [0, 1]^k."""

    paths: tuple

    def __post_init__(self):
        paths = tuple(self.paths)
        if not paths:
            raise ValidationError("a sheet needs at least one path")
        if len({p.level for p in paths}) != 1:
            raise ValidationError("all paths of a sheet must share one level")
        object.__setattr__(self, "paths", paths)

    @property
    def k(self):
        return len(self.paths)

    @property
    def level(self):
        return self.paths[0].level

    @property
    def seeds(self):
        return [p.seed for p in self.paths]

    def __call__(self, t):
        """Evaluate at points ``t`` of shape (..., k)."""
        t = np.asarray(t, dtype=float)
        if t.shape[-1] != self.k:
            raise ValidationError(f"points must have last dimension {self.k}")
        return sum(p(t[..., i]) for i, p in enumerate(self.paths))


def make_sheet(seeds, level=DEFAULT_LEVEL):
    seeds = check_seeds(seeds)
    return AdditiveSheet(tuple(gen_path(s, level) for s in seeds))


def sheet_seeds(base_seed, k, replicate=0):
    """Distinct per-coordinate seeds for replicate ``replicate`` of a k-sheet."""
    return [derive_seed(base_seed, replicate, j) for j in range(k)]


def sheet_from_functions(functions, level=DEFAULT_LEVEL):
    """Additive sheet whose coordinate graphs are arbitrary function handles."""
    return AdditiveSheet(tuple(BrownianPath.from_function(f, level) for f in functions))


@dataclass(frozen=True)
class HolderProbe:
    alpha: float
    constant: float
    max_gap: float


def holder_probe(path, alpha):
    """Largest |w(s) - w(t)| / |s - t|**alpha over grid pairs at dyadic lags."""
    alpha = check_real(alpha, "alpha", low=0.0, high=1.0, low_open=True, high_open=True)
    w = path.values
    best = 0.0
    for j in range(0, path.level + 1):
        step = 2 ** (path.level - j)
        lag = step * path.h
        best = max(best, float(np.max(np.abs(w[step:] - w[:-step]))) / lag**alpha)
    return HolderProbe(alpha=alpha, constant=best, max_gap=path.h)


def path_table(path):
    from .tables import Table

    return Table(["t", "w"], ["real", "real"], list(zip(path.times, path.values)))
