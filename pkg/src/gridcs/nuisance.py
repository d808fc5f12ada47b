"""Plug-in estimates of F(x0), g(x0), f(x0) and the scale parameters alpha, beta.

Grid indices are 1-based throughout, matching ``t_i = a + i*delta``.
Windows that would run past the grid are clamped to it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .model import BinnedCounts, StepEstimate


class NuisanceError(ValueError):
    """A nuisance parameter cannot be estimated from the data."""


@dataclass(frozen=True)
class NuisanceEstimates:
    F_hat: float
    g_hat: float
    f_hat: float
    alpha_hat: float
    beta_hat: float
    j_star: int = 0
    i_star: int = 0
    clamped: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_F_x0(est: StepEstimate, l: int, r: int, rho: float, grid_only: bool = False) -> float:
    """``rho*F(t_l) + (1-rho)*F(t_r)``, or ``F(t_l)`` in grid-point-only mode.

    The weights are applied literally, so at ``rho = 0``
    the value comes entirely from ``t_r``.
    """
    if grid_only:
        return est.at(l)
    return rho * est.at(l) + (1.0 - rho) * est.at(r)


def find_j_star(binned: BinnedCounts, l: int, r: int, threshold_mult: float = 1.0) -> tuple[int, bool]:
    """Smallest ``j >= 1`` whose window ``[l-j, l+j]`` holds a share ``>= mult/log n``.

    Returns ``(j, clamped)``; ``clamped`` flags a window truncated at the grid
    edges or a threshold that was never reached.
    """
    if not threshold_mult > 0:
        raise ValueError("threshold_mult must be positive")
    n = binned.n
    K = binned.grid.K
    if n < 3:
        raise NuisanceError("need n >= 3 for the 1/log n threshold")
    target = threshold_mult / math.log(n)
    csum = np.concatenate([[0], np.cumsum(binned.N)])
    jmax = max(l - 1, K - l, 1)
    for j in range(1, jmax + 1):
        lo, hi = max(l - j, 1), min(l + j, K)
        if (csum[hi] - csum[lo - 1]) / n >= target:
            if lo == 1 and hi == K and (l - j < 1 and l + j > K):
                warnings.warn("j* window spans the whole grid", RuntimeWarning, stacklevel=2)
            return j, (lo != l - j or hi != l + j)
    warnings.warn("windowed mass never reaches the 1/log n threshold", RuntimeWarning, stacklevel=2)
    return jmax, True


def estimate_g_x0(binned: BinnedCounts, l: int, r: int, j_star: int) -> float:
    """``(N_{l-j+1} + ... + N_{r+j}) / (n (t_{r+j} - t_{l-j}))`` with clamped indices."""
    grid = binned.grid
    lo = max(l - j_star, 0)
    hi = min(r + j_star, grid.K)
    width = grid.point(hi) - grid.point(lo)
    if width <= 0:
        raise NuisanceError("zero-width window for g")
    return float(binned.N[lo:hi].sum() / (binned.n * width))


def find_i_star(est: StepEstimate, l: int, j_star: int) -> int:
    """Smallest ``i > j_star`` with ``F(t_{l-i}) < F(t_{l+i})`` (indices clamped)."""
    K = est.grid.K
    i = j_star + 1
    while True:
        lo, hi = max(l - i, 1), min(l + i, K)
        if est.at(lo) < est.at(hi):
            return i
        if lo == 1 and hi == K:
            raise NuisanceError("flat estimate, slope unidentifiable")
        i += 1


def estimate_f_x0(est: StepEstimate, binned: BinnedCounts, l: int, i_star: int) -> float:
    """Slope of the ``N``-weighted least-squares line through ``F`` on ``[l-i*, l+i*]``."""
    K = est.grid.K
    lo, hi = max(l - i_star, 1), min(l + i_star, K)
    t = est.grid.point(np.arange(lo, hi + 1))
    F = est.levels[lo - 1 : hi]
    w = binned.N[lo - 1 : hi].astype(float)
    if np.count_nonzero(w) < 2:
        raise NuisanceError("singular design for the slope of F")
    tbar = np.average(t, weights=w)
    Fbar = np.average(F, weights=w)
    sxx = np.sum(w * (t - tbar) ** 2)
    if sxx <= 0:
        raise NuisanceError("singular design for the slope of F")
    return float(np.sum(w * (t - tbar) * (F - Fbar)) / sxx)


def assemble(F_hat: float, g_hat: float, f_hat: float, **extra) -> NuisanceEstimates:
    """``alpha = sqrt(F(1-F)/g)`` and ``beta = f/2``."""
    if not 0 < F_hat < 1:
        raise NuisanceError("degenerate alpha: F(x0) estimate is 0 or 1")
    if not g_hat > 0:
        raise NuisanceError("nonpositive design density estimate")
    if not f_hat > 0:
        raise NuisanceError("nonpositive event density estimate")
    alpha = math.sqrt(F_hat * (1.0 - F_hat) / g_hat)
    return NuisanceEstimates(F_hat, g_hat, f_hat, alpha, f_hat / 2.0, **extra)


def estimate_nuisance(
    est: StepEstimate,
    binned: BinnedCounts,
    l: int,
    r: int,
    rho: float,
    threshold_mult: float = 1.0,
    grid_only: bool = False,
) -> NuisanceEstimates:
    """The full plug-in chain: ``F(x0)``, then ``j*`` and ``g``, then ``i*`` and ``f``."""
    F_hat = estimate_F_x0(est, l, r, rho, grid_only)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        j_star, clamped = find_j_star(binned, l, r, threshold_mult)
    g_hat = estimate_g_x0(binned, l, r, j_star)
    i_star = find_i_star(est, l, j_star)
    f_hat = estimate_f_x0(est, binned, l, i_star)
    K = est.grid.K
    clamped = bool(clamped or l - i_star < 1 or l + i_star > K or r + j_star > K)
    return assemble(F_hat, g_hat, f_hat, j_star=j_star, i_star=i_star, clamped=clamped)
