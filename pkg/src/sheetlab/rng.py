"""Counter-based Gaussian draws keyed by (seed, level, index).

Every draw is a pure function of its key, so a path can be refined or
generated in any order without disturbing values that already exist.
The mixer is the SplitMix64 finaliser; uniforms use the top 53 bits and
normals come from the Box-Muller transform.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(x):
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def stream_key(seed, level):
    with np.errstate(over="ignore"):
        return _mix(_mix(np.uint64(seed) + _GOLDEN) ^ (np.uint64(level) * _M2 + _GOLDEN))


def hash_uniforms(seed, level, index, lane=0):
    """Uniforms in (0, 1) for each counter in ``index``."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = stream_key(seed, level) + np.uint64(lane) * _M1
        bits = _mix(key ^ _mix(idx * _GOLDEN + _GOLDEN))
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def hash_normals(seed, level, index):
    """Standard normal draw for each counter in ``index``."""
    u1 = hash_uniforms(seed, level, index, lane=0)
    u2 = hash_uniforms(seed, level, index, lane=1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def derive_seed(base, *keys):
    """Deterministic 64-bit child seed, e.g. ``derive_seed(base, replicate, coord)``."""
    with np.errstate(over="ignore"):
        x = _mix(np.uint64(base) + _GOLDEN)
        for k in keys:
            x = _mix(x ^ (np.uint64(k) * _GOLDEN + _M1))
    return int(x)
