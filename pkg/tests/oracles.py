"""Brute-force references, independent of the package's pooling and hull code."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def isotonic_brute_force(values, weights):
    """Minimise the weighted SSE over every partition into contiguous blocks.

    Only partitions with nondecreasing block means are feasible; the optimum
    of the isotonic problem is always one of them. Candidates within float
    noise of the best SSE are re-ranked in exact rational arithmetic, so
    near-ties are decided correctly.
    """
    v = np.asarray(values, float)
    w = np.asarray(weights, float)
    m = v.size
    cands = []
    for cuts in itertools.product([False, True], repeat=m - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [m]
        means = [np.dot(w[s:e], v[s:e]) / w[s:e].sum() for s, e in zip(bounds[:-1], bounds[1:])]
        if any(b < a - 1e-12 * (1 + abs(a)) for a, b in zip(means[:-1], means[1:])):
            continue
        fit = np.concatenate([np.full(e - s, mu) for s, e, mu in zip(bounds[:-1], bounds[1:], means)])
        cands.append((float(np.dot(w, (v - fit) ** 2)), bounds))
    floor = min(sse for sse, _ in cands)
    short = [b for sse, b in cands if sse <= floor + 1e-9 * (1 + floor)]
    vq = [Fraction(x) for x in v]
    wq = [Fraction(x) for x in w]
    best, best_fit = None, None
    for bounds in short:
        blocks = list(zip(bounds[:-1], bounds[1:]))
        means = [sum(wq[i] * vq[i] for i in range(s, e)) / sum(wq[s:e]) for s, e in blocks]
        if any(b < a for a, b in zip(means[:-1], means[1:])):
            continue
        sse = sum(wq[i] * (vq[i] - mu) ** 2 for (s, e), mu in zip(blocks, means) for i in range(s, e))
        if best is None or sse < best:
            best = sse
            best_fit = np.concatenate([np.full(e - s, float(mu)) for (s, e), mu in zip(blocks, means)])
    return best_fit


def isotonic_minmax_at(values, j):
    """Unit-weight isotonic value at ``j`` by ``max_{i<=j} min_{k>=j} mean(v[i..k])``."""
    v = np.asarray(values, float)
    csum = np.concatenate([[0.0], np.cumsum(v)])
    best = -np.inf
    for i in range(j + 1):
        k = np.arange(j, v.size)
        means = (csum[k + 1] - csum[i]) / (k + 1 - i)
        best = max(best, means.min())
    return best


def lower_hull_slow(x, y):
    """Lower convex hull by checking every pair: a segment belongs to the GCM
    iff no point lies strictly below its supporting line."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    keep = [0]
    i = 0
    while i < x.size - 1:
        # next breakpoint: the farthest j minimising the slope from i
        slopes = (y[i + 1 :] - y[i]) / (x[i + 1 :] - x[i])
        smin = slopes.min()
        cand = np.flatnonzero(np.isclose(slopes, smin, rtol=0, atol=1e-12)) + i + 1
        i = int(cand.max())
        keep.append(i)
    return x[keep], y[keep]
