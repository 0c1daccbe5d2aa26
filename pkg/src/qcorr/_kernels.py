"""Compiled inner loops for the qubit-remainder measurement problem.

``cond_entropy`` is the closed-form conditional entropy used by
``pairwise._MeasurementProblem.scalar``; ``nelder_mead_2d`` follows
``optimize.nelder_mead`` step for step (same coefficients, same tie-breaks).
"""

import math

import numpy as np
from numba import njit

BRANCH_EPS = 1e-14


@njit(cache=True)
def cond_entropy(a, s, k, theta, phi):
    st = math.sin(theta)
    return cond_entropy_dir(a, s, k, st * math.cos(phi), st * math.sin(phi), math.cos(theta))


@njit(cache=True)
def cond_entropy_dir(a, s, k, n0, n1, n2):
    na = n0 * a[0] + n1 * a[1] + n2 * a[2]
    kn0 = n0 * k[0, 0] + n1 * k[1, 0] + n2 * k[2, 0]
    kn1 = n0 * k[0, 1] + n1 * k[1, 1] + n2 * k[2, 1]
    kn2 = n0 * k[0, 2] + n1 * k[1, 2] + n2 * k[2, 2]
    total = 0.0
    for sign in (1.0, -1.0):
        p = 0.5 + sign * 0.5 * na
        if p < BRANCH_EPS:
            continue
        r = 0.5 * math.sqrt((s[0] + sign * kn0) ** 2 + (s[1] + sign * kn1) ** 2 + (s[2] + sign * kn2) ** 2)
        lam = 0.5 * (p + r)
        total += p * math.log2(p) - lam * math.log2(lam)
        lam = 0.5 * (p - r)
        if lam > 0.0:
            total -= lam * math.log2(lam)
    return total


@njit(cache=True)
def grid_values(a, s, k, dirs):
    out = np.empty(dirs.shape[0])
    for i in range(dirs.shape[0]):
        out[i] = cond_entropy_dir(a, s, k, dirs[i, 0], dirs[i, 1], dirs[i, 2])
    return out


@njit(cache=True)
def _sort3(vals, tags, pts):
    for i in range(1, 3):
        j = i
        while j > 0 and (vals[j] < vals[j - 1] or (vals[j] == vals[j - 1] and tags[j] < tags[j - 1])):
            vals[j], vals[j - 1] = vals[j - 1], vals[j]
            tags[j], tags[j - 1] = tags[j - 1], tags[j]
            for c in range(2):
                pts[j, c], pts[j - 1, c] = pts[j - 1, c], pts[j, c]
            j -= 1


@njit(cache=True)
def nelder_mead_2d(a, s, k, x0, y0, step0, step1, xtol, max_evals):
    """Returns (theta, phi, value, evals)."""
    pts = np.empty((3, 2))
    pts[0, 0], pts[0, 1] = x0, y0
    pts[1, 0], pts[1, 1] = x0 + step0, y0
    pts[2, 0], pts[2, 1] = x0, y0 + step1
    vals = np.empty(3)
    tags = np.empty(3, dtype=np.int64)
    for i in range(3):
        vals[i] = cond_entropy(a, s, k, pts[i, 0], pts[i, 1])
        tags[i] = i
    evals = 3
    tag = 3
    while True:
        _sort3(vals, tags, pts)
        diam = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                dij = math.sqrt((pts[i, 0] - pts[j, 0]) ** 2 + (pts[i, 1] - pts[j, 1]) ** 2)
                if dij > diam:
                    diam = dij
        if diam < xtol or evals >= max_evals:
            return pts[0, 0], pts[0, 1], vals[0], evals

        c0 = (pts[0, 0] + pts[1, 0]) / 2.0
        c1 = (pts[0, 1] + pts[1, 1]) / 2.0
        w0, w1 = pts[2, 0], pts[2, 1]
        f_best, f_second, f_worst = vals[0], vals[1], vals[2]
        xr0 = 2.0 * c0 - w0
        xr1 = 2.0 * c1 - w1
        fr = cond_entropy(a, s, k, xr0, xr1)
        evals += 1
        tag += 1
        if fr < f_best:
            xe0 = 3.0 * c0 - 2.0 * w0
            xe1 = 3.0 * c1 - 2.0 * w1
            fe = cond_entropy(a, s, k, xe0, xe1)
            evals += 1
            if fe < fr:
                pts[2, 0], pts[2, 1], vals[2] = xe0, xe1, fe
            else:
                pts[2, 0], pts[2, 1], vals[2] = xr0, xr1, fr
            tags[2] = tag
            continue
        if fr < f_second:
            pts[2, 0], pts[2, 1], vals[2], tags[2] = xr0, xr1, fr, tag
            continue
        if fr < f_worst:
            xc0 = 0.5 * (c0 + xr0)
            xc1 = 0.5 * (c1 + xr1)
            fc = cond_entropy(a, s, k, xc0, xc1)
            evals += 1
            if fc <= fr:
                pts[2, 0], pts[2, 1], vals[2], tags[2] = xc0, xc1, fc, tag
                continue
        else:
            xc0 = 0.5 * (c0 + w0)
            xc1 = 0.5 * (c1 + w1)
            fc = cond_entropy(a, s, k, xc0, xc1)
            evals += 1
            if fc < f_worst:
                pts[2, 0], pts[2, 1], vals[2], tags[2] = xc0, xc1, fc, tag
                continue
        for i in range(1, 3):
            pts[i, 0] = 0.5 * (pts[0, 0] + pts[i, 0])
            pts[i, 1] = 0.5 * (pts[0, 1] + pts[i, 1])
            tag += 1
            vals[i] = cond_entropy(a, s, k, pts[i, 0], pts[i, 1])
            tags[i] = tag
        evals += 2
