"""Numba-compiled probe kernels.

Same arithmetic, in the same order, as the numpy path. No fastmath: the
two backends must agree bit for bit.
"""

import math

import numpy as np
from numba import njit

from ..lip import M


@njit(cache=True)
def _gather_sorted(f, valid, offsets, y, x, buf):
    # insertion into a small sorted buffer; segments hold a few dozen points at most
    h, w = f.shape
    count = 0
    for j in range(offsets.shape[0]):
        xx = x + offsets[j, 0]
        yy = y + offsets[j, 1]
        if yy < 0 or yy >= h or xx < 0 or xx >= w or not valid[yy, xx]:
            continue
        v = f[yy, xx]
        i = count
        while i > 0 and buf[i - 1] > v:
            buf[i] = buf[i - 1]
            i -= 1
        buf[i] = v
        count += 1
    return count


@njit(cache=True)
def _gather_min(f, valid, offsets, y, x):
    h, w = f.shape
    best = np.inf
    count = 0
    for j in range(offsets.shape[0]):
        xx = x + offsets[j, 0]
        yy = y + offsets[j, 1]
        if yy < 0 or yy >= h or xx < 0 or xx >= w or not valid[yy, xx]:
            continue
        v = f[yy, xx]
        if v < best:
            best = v
        count += 1
    return best, count


@njit(cache=True)
def _segment_rank(f, valid, offsets, discard_fraction, out):
    h, w = f.shape
    buf = np.empty(offsets.shape[0])
    for y in range(h):
        for x in range(w):
            n = _gather_sorted(f, valid, offsets, y, x, buf)
            if n == 0:
                out[y, x] = np.nan
            else:
                out[y, x] = buf[int(math.floor(discard_fraction * n))]
    return out


@njit(cache=True)
def _orientation_detector(f, valid, center, left, right, h_c, h_lr, discard_fraction, out):
    h, w = f.shape
    bl = np.empty(left.shape[0])
    br = np.empty(right.shape[0])
    dc = 1.0 - h_c / M
    ds = 1.0 - h_lr / M
    for y in range(h):
        for x in range(w):
            if not valid[y, x]:
                out[y, x] = np.nan
                continue
            lo, nc = _gather_min(f, valid, center, y, x)
            nl = _gather_sorted(f, valid, left, y, x, bl)
            nr = _gather_sorted(f, valid, right, y, x, br)
            if nc == 0 or nl == 0 or nr == 0:
                out[y, x] = np.nan
                continue
            c_c = (lo - h_c) / dc
            c_l = (bl[int(math.floor(discard_fraction * nl))] - h_lr) / ds
            c_r = (br[int(math.floor(discard_fraction * nr))] - h_lr) / ds
            c = min(c_c, min(c_l, c_r))
            e_l = (c_l - c) / (1.0 - c / M)
            e_r = (c_r - c) / (1.0 - c / M)
            out[y, x] = max(e_l, e_r)
    return out


def segment_rank(f, valid, offsets, discard_fraction):
    out = np.empty(f.shape)
    return _segment_rank(f, valid, offsets, float(discard_fraction), out)


def orientation_detector(f, valid, center, left, right, h_c, h_lr, discard_fraction):
    out = np.empty(f.shape)
    return _orientation_detector(
        f, valid, center, left, right, float(h_c), float(h_lr), float(discard_fraction), out
    )
