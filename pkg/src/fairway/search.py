"""One-dimensional search routines used by the route-choice solvers."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_min(f: Callable[[float], float], a: float, b: float, tol: float = 1e-6) -> float:
    """Minimizer of a unimodal ``f`` on ``[a, b]`` to within ``tol``.

    The returned point is the best of the final bracket's evaluated points and
    its endpoints, so boundary minima are found exactly.
    """
    lo, hi = min(a, b), max(a, b)
    a0, b0 = lo, hi
    fa, fb = f(lo), f(hi)
    h = hi - lo
    if h <= tol:
        return a0 if fa <= fb else b0

    c = lo + INV_PHI_SQ * h
    d = lo + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            h = hi - lo
            c = lo + INV_PHI_SQ * h
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            h = hi - lo
            d = lo + INV_PHI * h
            fd = f(d)

    candidates = [(fa, a0), (fc, c), (fd, d), (fb, b0)]
    best = min(candidates, key=lambda p: (p[0], p[1]))
    return best[1]


def bisect_decreasing(g: Callable[[float], float], lo: float, hi: float, tol: float, max_steps: int = 200):
    """Bisection for the sign change of ``g`` given ``g(lo) > 0 >= g(hi)``.

    Returns ``(lo, hi, steps)`` with ``hi - lo <= tol`` or after ``max_steps``.
    """
    steps = 0
    while hi - lo > tol and steps < max_steps:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        steps += 1
    return lo, hi, steps
