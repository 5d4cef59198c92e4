"""Pure-numpy probe kernels: one shifted stack per segment, sorted along axis 0."""

import numpy as np

from ..lip import M


def _shifted_stack(f, valid, offsets):
    h, w = f.shape
    pad = int(np.abs(offsets).max()) if len(offsets) else 0
    fp = np.pad(f, pad, mode="constant", constant_values=np.nan)
    vp = np.pad(valid, pad, mode="constant", constant_values=False)
    stack = np.empty((len(offsets), h, w))
    for j, (dx, dy) in enumerate(offsets):
        rows = slice(pad + dy, pad + dy + h)
        cols = slice(pad + dx, pad + dx + w)
        stack[j] = np.where(vp[rows, cols], fp[rows, cols], np.nan)
    return stack


def segment_rank(f, valid, offsets, discard_fraction):
    stack = _shifted_stack(f, valid, offsets)
    count = np.count_nonzero(~np.isnan(stack), axis=0)
    stack.sort(axis=0)  # NaN sorts last
    k = np.floor(discard_fraction * count).astype(np.int64)
    k = np.minimum(k, np.maximum(count - 1, 0))
    out = np.take_along_axis(stack, k[None], axis=0)[0]
    out[count == 0] = np.nan
    return out


def orientation_detector(f, valid, center, left, right, h_c, h_lr, discard_fraction):
    rc = segment_rank(f, valid, center, 0.0)
    rl = segment_rank(f, valid, left, discard_fraction)
    rr = segment_rank(f, valid, right, discard_fraction)
    c_c = (rc - h_c) / (1.0 - h_c / M)
    c_l = (rl - h_lr) / (1.0 - h_lr / M)
    c_r = (rr - h_lr) / (1.0 - h_lr / M)
    c = np.minimum(c_c, np.minimum(c_l, c_r))
    e_l = (c_l - c) / (1.0 - c / M)
    e_r = (c_r - c) / (1.0 - c / M)
    out = np.maximum(e_l, e_r)
    out[~valid] = np.nan
    return out
