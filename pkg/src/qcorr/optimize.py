"""Deterministic Nelder-Mead simplex minimizer."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence


@dataclass(frozen=True)
class SimplexResult:
    x: tuple[float, ...]
    fun: float
    evals: int
    converged: bool


def _diameter(pts) -> float:
    d = 0.0
    for i in range(len(pts)):
        pi = pts[i]
        for j in range(i + 1, len(pts)):
            dij = math.dist(pi, pts[j])
            if dij > d:
                d = dij
    return d


def nelder_mead(
    f: Callable[[Sequence[float]], float],
    x0: Sequence[float],
    step: Sequence[float],
    *,
    xtol: float = 1e-8,
    max_evals: int = 500,
) -> SimplexResult:
    """Minimize ``f`` from an axis-aligned initial simplex around ``x0``.

    Stops when the simplex diameter drops below ``xtol`` or after ``max_evals``
    function evaluations.  Standard coefficients (reflect 1, expand 2,
    contract 1/2, shrink 1/2); ties keep the earlier vertex first.
    """
    n = len(x0)
    x0 = tuple(float(v) for v in x0)
    pts = [x0]
    for i in range(n):
        pts.append(tuple(v + (step[i] if k == i else 0.0) for k, v in enumerate(x0)))
    simplex = [(f(p), k, p) for k, p in enumerate(pts)]
    evals = n + 1
    tag = n + 1  # insertion counter: deterministic tie-break

    while True:
        simplex.sort()
        pts = [v[2] for v in simplex]
        if _diameter(pts) < xtol:
            return SimplexResult(pts[0], simplex[0][0], evals, True)
        if evals >= max_evals:
            return SimplexResult(pts[0], simplex[0][0], evals, False)

        f_best = simplex[0][0]
        f_second = simplex[-2][0]
        f_worst, _, worst = simplex[-1]
        cen = tuple(sum(p[i] for p in pts[:-1]) / n for i in range(n))
        xr = tuple(2.0 * c - w for c, w in zip(cen, worst))
        fr = f(xr)
        evals += 1
        tag += 1
        if fr < f_best:
            xe = tuple(3.0 * c - 2.0 * w for c, w in zip(cen, worst))
            fe = f(xe)
            evals += 1
            simplex[-1] = (fe, tag, xe) if fe < fr else (fr, tag, xr)
            continue
        if fr < f_second:
            simplex[-1] = (fr, tag, xr)
            continue
        if fr < f_worst:
            xc = tuple(0.5 * (c + r) for c, r in zip(cen, xr))
            fc = f(xc)
            evals += 1
            if fc <= fr:
                simplex[-1] = (fc, tag, xc)
                continue
        else:
            xc = tuple(0.5 * (c + w) for c, w in zip(cen, worst))
            fc = f(xc)
            evals += 1
            if fc < f_worst:
                simplex[-1] = (fc, tag, xc)
                continue
        best = pts[0]
        new = [simplex[0]]
        for p in pts[1:]:
            q = tuple(0.5 * (b + v) for b, v in zip(best, p))
            tag += 1
            new.append((f(q), tag, q))
        evals += n
        simplex = new
