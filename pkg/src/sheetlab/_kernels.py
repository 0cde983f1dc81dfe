"""Compiled inner loops for the oscillatory segment sums.

Phases are carried in turns (cycles) and reduced to [-1/2, 1/2] before a
short polynomial evaluation, which is much cheaper than libm sin/cos on
large arguments and accurate to ~1e-13.
"""

import warnings

import numba as nb
import numpy as np

# an old system TBB only costs a fallback to another threading layer
warnings.filterwarnings("ignore", message="The TBB threading layer", category=nb.NumbaWarning)

TWO_PI = 2.0 * np.pi
_BLOCK = 256
_SMALL = 0.02


@nb.njit(fastmath=True, inline="always", cache=True)
def _sincos_turns(u):
    # cos(2*pi*u), sin(2*pi*u)
    u = u - np.rint(u)
    q = np.rint(4.0 * u)
    v = u - 0.25 * q
    z = TWO_PI * v
    z2 = z * z
    s = z * (1.0 + z2 * (-1.0 / 6 + z2 * (1.0 / 120 + z2 * (-1.0 / 5040 + z2 * (
        1.0 / 362880 + z2 * (-1.0 / 39916800 + z2 / 6227020800.0))))))
    c = 1.0 + z2 * (-0.5 + z2 * (1.0 / 24 + z2 * (-1.0 / 720 + z2 * (
        1.0 / 40320 + z2 * (-1.0 / 3628800 + z2 / 479001600.0)))))
    cq = 1.0 - abs(q)
    sq = q * (2.0 - abs(q))
    return c * cq - s * sq, s * cq + c * sq


@nb.njit(fastmath=True, error_model="numpy", cache=True)
def _block_sum(t, w, a, b, lo, hi):
    # Vertex-difference form (E_m - E_{m+1}) / (2 pi i c) where the segment
    # phase is large; tan(x)/x expansion of the midpoint-sinc form where it
    # is small. Both are evaluated and selected to keep the loop branch-free.
    sr = 0.0
    si = 0.0
    er, ei = _sincos_turns(a * t[lo] + b * w[lo])
    for m in range(lo, hi):
        h = t[m + 1] - t[m]
        ch = a * h + b * (w[m + 1] - w[m])
        fr, fi = _sincos_turns(a * t[m + 1] + b * w[m + 1])
        # exp(-2 pi i u) = (cos, -sin); the conjugate is applied at the end
        inv = 1.0 / (TWO_PI * ch) * h
        dr = (fi - ei) * inv
        di = (er - fr) * inv
        x = np.pi * ch
        x2 = x * x
        g = 0.5 * h * (1.0 + x2 * (1.0 / 3 + x2 * (2.0 / 15 + x2 * (17.0 / 315))))
        small = abs(ch) < _SMALL
        sr += g * (er + fr) if small else dr
        si += g * (ei + fi) if small else di
        er = fr
        ei = fi
    return sr, -si


@nb.njit(cache=True)
def segment_sum(t, w, a, b):
    """Sum of exact segment integrals of exp(-2 pi i (a t + b w(t))).

    Block partials are combined with Neumaier compensation once the
    segment count exceeds one block.
    """
    n = t.shape[0] - 1
    if n <= _BLOCK:
        sr, si = _block_sum(t, w, a, b, 0, n)
        return complex(sr, si)
    sr = 0.0
    si = 0.0
    cr = 0.0
    ci = 0.0
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        pr, pi = _block_sum(t, w, a, b, lo, hi)
        tr = sr + pr
        if abs(sr) >= abs(pr):
            cr += (sr - tr) + pr
        else:
            cr += (pr - tr) + sr
        sr = tr
        ti = si + pi
        if abs(si) >= abs(pi):
            ci += (si - ti) + pi
        else:
            ci += (pi - ti) + si
        si = ti
    return complex(sr + cr, si + ci)


@nb.njit(parallel=True, cache=True)
def segment_sum_many(t, w, a, b, out):
    # each output slot is written by exactly one iteration: thread-count invariant
    for f in nb.prange(a.shape[0]):
        out[f] = segment_sum(t, w, a[f], b[f])
    return out
