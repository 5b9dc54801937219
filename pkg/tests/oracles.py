"""Independent reference computations used to check the library.

Nothing here imports the code under test except plain data types.
"""
import math

import numpy as np


def bilinear_align_corners(grid, out_h, out_w):
    """Per-pixel loop over a (A, B, C) grid, align-corners convention.

    A single input sample along an axis is extended as a constant; a single
    output sample takes the first input sample.
    """
    a, b, c = grid.shape
    out = np.zeros((out_h, out_w, c))

    def src(i, n_in, n_out):
        if n_in == 1:
            return 0, 0, 0.0
        pos = 0.0 if n_out == 1 else i * (n_in - 1) / (n_out - 1)
        lo = min(int(math.floor(pos)), n_in - 2)
        return lo, lo + 1, pos - lo

    for i in range(out_h):
        y0, y1, fy = src(i, a, out_h)
        for j in range(out_w):
            x0, x1, fx = src(j, b, out_w)
            for ch in range(c):
                top = grid[y0, x0, ch] * (1 - fx) + grid[y0, x1, ch] * fx
                bot = grid[y1, x0, ch] * (1 - fx) + grid[y1, x1, ch] * fx
                out[i, j, ch] = top * (1 - fy) + bot * fy
    return out


def alpha_bar_direct(t, T=1000, start=1e-4, end=0.02, rho=1.0):
    """Product of (1 - beta_i) for i = 1..t, betas computed one at a time."""
    prod = 1.0
    for i in range(1, t + 1):
        beta = start + (end - start) * (i - 1) / (T - 1) if T > 1 else start
        prod *= 1.0 - beta ** rho
    return prod


def two_pass_stats(images):
    """Population mean/std per channel over all pixels, two passes."""
    px = np.concatenate([np.asarray(im, dtype=np.float64).reshape(-1, 3) for im in images])
    mean = px.sum(axis=0) / px.shape[0]
    var = ((px - mean) ** 2).sum(axis=0) / px.shape[0]
    return px.shape[0], mean, np.sqrt(var)


def random_sequence(rng, T, J, scale=2.0):
    return rng.uniform(-scale, scale, size=(T, J, 3))


def bilinear_gather(grid, out_h, out_w):
    """Same four-neighbour formula as :func:`bilinear_align_corners`, gathered
    with fancy indexing so 224 x 224 outputs are cheap."""
    a, b, _ = grid.shape

    def src(n_in, n_out):
        i = np.arange(n_out, dtype=np.float64)
        if n_in == 1:
            z = np.zeros(n_out, dtype=np.int64)
            return z, z, np.zeros(n_out)
        pos = np.zeros(n_out) if n_out == 1 else i * (n_in - 1) / (n_out - 1)
        lo = np.minimum(np.floor(pos).astype(np.int64), n_in - 2)
        return lo, lo + 1, pos - lo

    y0, y1, fy = src(a, out_h)
    x0, x1, fx = src(b, out_w)
    fy, fx = fy[:, None, None], fx[None, :, None]
    top = grid[y0][:, x0] * (1 - fx) + grid[y0][:, x1] * fx
    bot = grid[y1][:, x0] * (1 - fx) + grid[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy
