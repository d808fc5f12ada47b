"""Weighted isotonic regression and greatest convex minorants.

The pooling kernels are compiled with numba because the Monte Carlo
samplers call them millions of times on vectors of a few hundred points.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import numpy as np
from numba import njit


@njit(cache=True)
def _pava_kernel(values, weights):
    m = values.shape[0]
    level = np.empty(m)
    wsum = np.empty(m)
    size = np.empty(m, dtype=np.int64)
    top = -1
    for i in range(m):
        top += 1
        level[top] = values[i]
        wsum[top] = weights[i]
        size[top] = 1
        while top > 0 and level[top - 1] > level[top]:
            w = wsum[top - 1] + wsum[top]
            level[top - 1] = (wsum[top - 1] * level[top - 1] + wsum[top] * level[top]) / w
            wsum[top - 1] = w
            size[top - 1] += size[top]
            top -= 1
    out = np.empty(m)
    pos = 0
    for b in range(top + 1):
        for _ in range(size[b]):
            out[pos] = level[b]
            pos += 1
    return out


@njit(cache=True)
def isotonic_value_at(values, index):
    """Unit-weight isotonic regression of ``values`` evaluated at ``index``.

    Same pooling as :func:`pava`, without materialising the fitted vector.
    """
    m = values.shape[0]
    total = np.empty(m)
    size = np.empty(m, dtype=np.int64)
    top = -1
    for i in range(m):
        top += 1
        total[top] = values[i]
        size[top] = 1
        while top > 0 and total[top - 1] * size[top] > total[top] * size[top - 1]:
            total[top - 1] += total[top]
            size[top - 1] += size[top]
            top -= 1
    pos = 0
    for b in range(top + 1):
        pos += size[b]
        if index < pos:
            return total[b] / size[b]
    return np.nan


def pava(values, weights=None) -> np.ndarray:
    """Weighted least-squares projection onto nondecreasing vectors.

    Parameters
    ----------
    values : array-like of shape (m,)
        Finite responses.
    weights : array-like of shape (m,), optional
        Strictly positive weights; unit weights when omitted.

    Returns
    -------
    ndarray of shape (m,)
        The nondecreasing vector minimising ``sum(w * (v - f)**2)``.
    """
    v = np.ascontiguousarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("empty series")
    if weights is None:
        w = np.ones_like(v)
    else:
        w = np.ascontiguousarray(weights, dtype=float)
        if w.shape != v.shape:
            raise ValueError("values and weights differ in length")
        if not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise ValueError("invalid weight")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite value")
    return _pava_kernel(v, w)


@dataclass(frozen=True)
class ConvexMinorant:
    """Piecewise-linear convex minorant given by its breakpoints."""

    x: np.ndarray
    y: np.ndarray

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    def __call__(self, t):
        return np.interp(t, self.x, self.y)


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def gcm(x, y) -> ConvexMinorant:
    """Greatest convex minorant of the points ``(x[i], y[i])``.

    ``x`` must be strictly increasing. Collinear interior points are not
    kept as breakpoints, so consecutive slopes are strictly increasing.
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("x and y must be 1-d of equal length")
    if xs.size < 2:
        raise ValueError("degenerate diagram")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("non-finite diagram point")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("diagram abscissas must be strictly increasing")

    hull: list[int] = []
    for i in range(xs.size):
        # pop while the last turn is not strictly convex (counter-clockwise)
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            if _cross(xs[o], ys[o], xs[a], ys[a], xs[i], ys[i]) <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    idx = np.array(hull)
    return ConvexMinorant(xs[idx], ys[idx])


def left_slope(cm: ConvexMinorant, x: float) -> float:
    """Left derivative of ``cm`` at ``x``.

    At a breakpoint this is the slope of the incoming segment. Undefined at
    (and left of) the first breakpoint and beyond the last one.
    """
    if not (cm.x[0] < x <= cm.x[-1]):
        raise ValueError("slope undefined")
    seg = bisect_left(cm.x.tolist(), x) - 1
    return float((cm.y[seg + 1] - cm.y[seg]) / (cm.x[seg + 1] - cm.x[seg]))


def left_slopes(cm: ConvexMinorant, xs) -> np.ndarray:
    """Vectorised :func:`left_slope` over query points ``xs``."""
    q = np.asarray(xs, dtype=float)
    if np.any(q <= cm.x[0]) or np.any(q > cm.x[-1]):
        raise ValueError("slope undefined")
    seg = np.searchsorted(cm.x, q, side="left") - 1
    return cm.slopes[seg]
