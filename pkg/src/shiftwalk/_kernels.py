"""Inner loops for the Monte Carlo experiments.

Each kernel has a numba version and a numpy version with identical results;
``_accel.USE_NUMBA`` picks one at import time.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit, prange


@njit(cache=True)
def _example1_value(x, e, d):
    if x < 0.25:
        return (4.0 + e) * x
    if x < 0.5:
        return -(2.0 + e) * x + (3.0 + e) / 2.0
    if x < 0.75:
        return -(2.0 + d) * x + (3.0 + d) / 2.0
    return (4.0 + d) * x - (3.0 + d)


@njit(cache=True, parallel=True)
def _ctrw_numba(x0, e, d, n_steps, out_steps, out_signs, counts):
    cap = out_steps.shape[1]
    for p in prange(x0.size):
        x = x0[p]
        c = 0
        for k in range(1, n_steps + 1):
            y = _example1_value(x, e, d)
            j = math.floor(y)
            x = y - j
            if j != 0:
                if c < cap:
                    out_steps[p, c] = k
                    out_signs[p, c] = j
                c += 1
        counts[p] = c


def _ctrw_numpy(x0, e, d, n_steps, out_steps, out_signs, counts):
    cap = out_steps.shape[1]
    x = x0.astype(float).copy()
    counts[:] = 0
    for k in range(1, n_steps + 1):
        y = np.where(x < 0.25, (4.0 + e) * x,
                     np.where(x < 0.5, -(2.0 + e) * x + (3.0 + e) / 2.0,
                              np.where(x < 0.75, -(2.0 + d) * x + (3.0 + d) / 2.0,
                                       (4.0 + d) * x - (3.0 + d))))
        j = np.floor(y)
        x = y - j
        hit = np.flatnonzero(j != 0)
        if hit.size:
            slot = counts[hit]
            ok = slot < cap
            out_steps[hit[ok], slot[ok]] = k
            out_signs[hit[ok], slot[ok]] = j[hit[ok]].astype(np.int64)
            counts[hit] += 1


def ctrw_jumps(x0, e, d, n_steps, cap):
    """Jump steps and signs of ``floor(F)`` along ``example1(e, d)`` orbits.

    Returns ``(steps, signs, counts)``; rows hold the first ``cap`` jumps and
    ``counts`` the true number, so ``counts > cap`` signals truncation.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    steps = np.zeros((x0.size, cap), dtype=np.int64)
    signs = np.zeros((x0.size, cap), dtype=np.int64)
    counts = np.zeros(x0.size, dtype=np.int64)
    kern = _ctrw_numba if USE_NUMBA else _ctrw_numpy
    kern(x0, float(e), float(d), int(n_steps), steps, signs, counts)
    return steps, signs, counts


@njit(cache=True, parallel=True)
def _example2_sums_numba(u, p, c, checkpoints, out):
    n_paths, n = u.shape
    for i in prange(n_paths):
        s = 0.0
        q = 0
        for k in range(n):
            x = u[i, k]
            d1 = abs(x - 0.25)
            d3 = abs(x - 0.75)
            if d1 == 0.0 or d3 == 0.0:
                v = 0.0
            else:
                v = math.floor(c * (d3 ** p - d1 ** p) + 0.5)
            s += v
            while q < checkpoints.size and checkpoints[q] == k + 1:
                out[i, q] = s
                q += 1


def _example2_sums_numpy(u, p, c, checkpoints, out):
    d1 = np.abs(u - 0.25)
    d3 = np.abs(u - 0.75)
    with np.errstate(all="ignore"):
        v = np.floor(c * (np.power(d3, p) - np.power(d1, p)) + 0.5)
    v[(d1 == 0) | (d3 == 0)] = 0.0
    cs = np.cumsum(v, axis=1)
    for q, k in enumerate(checkpoints):
        out[:, q] = cs[:, k - 1]


def example2_increment_sums(u, kappa, c, checkpoints):
    """Partial sums of ``floor(F(u_k))`` for ``example2`` at the given step counts.

    ``u`` has shape ``(n_paths, n)``; ``checkpoints`` are increasing step
    counts in ``1..n``. A draw exactly at a singularity contributes 0.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    cp = np.ascontiguousarray(checkpoints, dtype=np.int64)
    out = np.zeros((u.shape[0], cp.size))
    kern = _example2_sums_numba if USE_NUMBA else _example2_sums_numpy
    kern(u, -1.0 / float(kappa), float(c), cp, out)
    return out
