"""Compiled inner loops.

The phase on each segment of a piecewise-linear path is affine in ``t``, so
``int exp(i phase) dt`` over the segment is ``dt * exp(i * mid) * sinc(half)``
with ``mid`` the phase at the segment midpoint and ``half`` half the phase
increment. ``half`` is formed from the grid increments rather than from the
difference of two node phases, which keeps it accurate at large frequencies.
"""

import numba
import numpy as np

# |beta * dt| below this uses the Taylor form of the kernel
TAYLOR_CUTOFF = 1e-8


@numba.njit(cache=True)
def _sinc(h):
    if abs(2.0 * h) < TAYLOR_CUTOFF:
        return 1.0 - h * h / 6.0
    return np.sin(h) / h


@numba.njit(cache=True)
def linear_phase_integrals(a, b, t, w, out):
    """``out[k] = int exp(i (a[k] t + b[k] W_t)) dt`` over the interpolant of (t, w)."""
    n = t.shape[0] - 1
    for k in range(a.shape[0]):
        ak = a[k]
        bk = b[k]
        sr = 0.0
        si = 0.0
        for j in range(n):
            dt = t[j + 1] - t[j]
            if dt == 0.0:
                continue
            dw = w[j + 1] - w[j]
            mid = ak * (t[j] + 0.5 * dt) + bk * (w[j] + 0.5 * dw)
            s = dt * _sinc(0.5 * (ak * dt + bk * dw))
            sr += s * np.cos(mid)
            si += s * np.sin(mid)
        out[k] = complex(sr, si)
    return out


@numba.njit(cache=True)
def segment_integrals(phase_mid, half, dt):
    """Per-segment integrals for precomputed midpoint phases and half increments."""
    n = dt.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for j in range(n):
        s = dt[j] * _sinc(half[j])
        out[j] = complex(s * np.cos(phase_mid[j]), s * np.sin(phase_mid[j]))
    return out


@numba.njit(cache=True)
def first_crossing(y, target):
    """Index ``j`` of the first segment ``[y[j], y[j+1]]`` that contains ``target``.

    Returns -1 when no segment does. Node hits are reported on the segment that
    ends at the node, except ``y[0]`` itself which returns 0.
    """
    if y[0] == target:
        return 0
    for j in range(y.shape[0] - 1):
        lo = y[j]
        hi = y[j + 1]
        if lo > hi:
            lo, hi = hi, lo
        if lo <= target <= hi:
            return j
    return -1
