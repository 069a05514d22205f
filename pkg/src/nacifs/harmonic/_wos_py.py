"""Pure numpy walk-on-spheres kernel, vectorized over walkers.

Same interface and same random streams as the compiled ``_wos_core``; the
arithmetic is written in the same order so both produce identical labels.
Nearest-disk search is brute force over the leaves, so this backend is only
practical for shallow approximations.
"""
from __future__ import annotations

import numpy as np

from ..rng import uniform_array, walker_keys

CHUNK = 2048


def _on_circle(keys, counters, idx):
    """Uniform points on the unit circle for walkers ``idx`` (rejection from the square)."""
    ox = np.empty(len(idx))
    oy = np.empty(len(idx))
    pending = np.arange(len(idx))
    while pending.size:
        w = idx[pending]
        u1 = uniform_array(keys[w], counters[w])
        counters[w] += np.uint64(1)
        u2 = uniform_array(keys[w], counters[w])
        counters[w] += np.uint64(1)
        x = 2.0 * u1 - 1.0
        y = 2.0 * u2 - 1.0
        s = x * x + y * y
        ok = (s > 0.0) & (s < 1.0)
        r = np.sqrt(s[ok])
        ox[pending[ok]] = x[ok] / r
        oy[pending[ok]] = y[ok] / r
        pending = pending[~ok]
    return ox, oy


def _reenter(R, x, y, keys, counters, idx):
    rho2 = x * x + y * y
    ax = (R * x) / rho2
    ay = (R * y) / rho2
    zx, zy = _on_circle(keys, counters, idx)
    nr = zx + ax
    ni = zy + ay
    dr = 1.0 + ax * zx + ay * zy
    di = ax * zy - ay * zx
    dd = dr * dr + di * di
    wr = (nr * dr + ni * di) / dd
    wi = (ni * dr - nr * di) / dd
    return R * wr, R * wi


def reentry_samples(px, py, R, seed, first, count, outx, outy):
    keys = walker_keys(seed, np.arange(first, first + count, dtype=np.uint64))
    counters = np.zeros(count, dtype=np.uint64)
    idx = np.arange(count)
    x, y = _reenter(R, np.full(count, float(px)), np.full(count, float(py)), keys, counters, idx)
    outx[:] = x
    outy[:] = y


def _nearest(xs, ys, lcx, lcy, lr):
    best = np.empty(len(xs))
    leaf = np.empty(len(xs), dtype=np.int64)
    for s in range(0, len(xs), CHUNK):
        dx = xs[s:s + CHUNK, None] - lcx[None, :]
        dy = ys[s:s + CHUNK, None] - lcy[None, :]
        dist = np.sqrt(dx * dx + dy * dy) - lr[None, :]
        j = np.argmin(dist, axis=1)
        leaf[s:s + CHUNK] = j
        best[s:s + CHUNK] = dist[np.arange(len(j)), j]
    return best, leaf


def run_walkers(cx, cy, hull, rad, first_child, n_child, leaf_start, max_stack,
                launch, x0, y0, r_launch, r_out, outer_radius, eps_abs, max_steps,
                seed, first, count, labels, steps):
    lcx = np.asarray(cx[leaf_start:])
    lcy = np.asarray(cy[leaf_start:])
    lr = np.asarray(rad[leaf_start:])
    keys = walker_keys(seed, np.arange(first, first + count, dtype=np.uint64))
    counters = np.zeros(count, dtype=np.uint64)
    labels[:] = -2
    steps[:] = 0
    if launch:
        jx, jy = _on_circle(keys, counters, np.arange(count))
        x = r_launch * jx
        y = r_launch * jy
    else:
        x = np.full(count, float(x0))
        y = np.full(count, float(y0))
    active = np.arange(count)
    while active.size:
        steps[active] += 1
        xa, ya = x[active], y[active]
        best, leaf = _nearest(xa, ya, lcx, lcy, lr)
        done = best < eps_abs * lr[leaf]
        labels[active[done]] = leaf[done]
        rho = np.sqrt(xa * xa + ya * ya)
        move = ~done
        if not launch:
            d_out = outer_radius - rho
            out = move & (d_out < eps_abs * outer_radius)
            labels[active[out]] = -1
            done |= out
            move &= ~out
            best = np.where(d_out < best, d_out, best)
        else:
            re = move & (rho > r_out)
            if re.any():
                w = active[re]
                x[w], y[w] = _reenter(r_launch, xa[re], ya[re], keys, counters, w)
            move &= ~re
        if move.any():
            w = active[move]
            jx, jy = _on_circle(keys, counters, w)
            x[w] = xa[move] + best[move] * jx
            y[w] = ya[move] + best[move] * jy
        keep = ~done & (steps[active] < max_steps)
        active = active[keep]
