"""Grid-based current status data and the NPMLE of the event-time CDF."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .isotonic import gcm, left_slopes, pava

SNAP_TOL = 1e-9


def tolerant_floor(x: float, rtol: float = 1e-9) -> int:
    """``floor`` that forgives round-off just below an integer."""
    return math.floor(x + rtol * max(1.0, abs(x)))


@dataclass(frozen=True)
class GridSpec:
    """Regular inspection grid ``t_i = a + i*delta``, ``i = 1..K``."""

    a: float
    b: float
    delta: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("grid requires a < b")
        if not self.delta > 0:
            raise ValueError("grid spacing must be positive")
        if self.K < 1:
            raise ValueError("grid has no points")

    @property
    def K(self) -> int:
        return tolerant_floor((self.b - self.a) / self.delta)

    @property
    def points(self) -> np.ndarray:
        return self.a + self.delta * np.arange(1, self.K + 1)

    def point(self, i: int) -> float:
        """Grid point ``t_i`` with 1-based ``i``; ``i = 0`` gives ``a``."""
        return self.a + i * self.delta

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "delta": self.delta, "K": self.K}


@dataclass(frozen=True)
class ObservationSet:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d of equal length")
        if x.size == 0:
            raise ValueError("empty observation set")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("responses must be 0/1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y.astype(np.int64))

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class BinnedCounts:
    """Per-grid-point counts ``N`` and response sums ``Z`` (both length K)."""

    grid: GridSpec
    N: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        N = np.asarray(self.N, dtype=np.int64)
        Z = np.asarray(self.Z, dtype=np.int64)
        if N.shape != (self.grid.K,) or Z.shape != N.shape:
            raise ValueError("counts must have one entry per grid point")
        if np.any(N < 0) or np.any(Z < 0) or np.any(Z > N):
            raise ValueError("need 0 <= Z <= N")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "Z", Z)

    @property
    def n(self) -> int:
        return int(self.N.sum())

    @property
    def means(self) -> np.ndarray:
        """Naive averages ``Z/N``; NaN on empty grid points."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.N > 0, self.Z / np.maximum(self.N, 1), np.nan)


@dataclass(frozen=True)
class StepEstimate:
    """Right-continuous step function with level ``levels[i-1]`` on ``[t_i, t_{i+1})``."""

    grid: GridSpec
    levels: np.ndarray
    n_empty: int = field(default=0)

    def __call__(self, t: float) -> float:
        return eval_step(self, t)

    def at(self, i: int) -> float:
        """Level at grid point ``t_i`` (1-based)."""
        return float(self.levels[i - 1])


def bin_observations(obs: ObservationSet, grid: GridSpec) -> BinnedCounts:
    pos = (obs.x - grid.a) / grid.delta
    idx = np.rint(pos).astype(np.int64)
    bad = (np.abs(pos - idx) > SNAP_TOL) | (idx < 1) | (idx > grid.K)
    if np.any(bad):
        raise ValueError(f"off-grid observation: x={obs.x[np.argmax(bad)]!r}")
    N = np.bincount(idx - 1, minlength=grid.K)
    Z = np.bincount(idx - 1, weights=obs.y, minlength=grid.K).astype(np.int64)
    return BinnedCounts(grid, N, Z)


def _fill_empty(levels_nonempty: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # carry the previous level across empty points; leading ones take the first fitted level
    K = mask.size
    out = np.empty(K)
    out[mask] = levels_nonempty
    idx = np.where(mask, np.arange(K), -1)
    np.maximum.accumulate(idx, out=idx)
    first = np.argmax(mask)
    idx[idx < 0] = first
    return out[idx]


def _prepare(binned: BinnedCounts):
    mask = binned.N > 0
    if not mask.any():
        raise ValueError("no observations")
    n_empty = int((~mask).sum())
    if n_empty:
        warnings.warn(f"{n_empty} empty grid point(s) excluded from the fit", RuntimeWarning, stacklevel=3)
    return mask, n_empty


def npmle(binned: BinnedCounts) -> StepEstimate:
    """Weighted isotonic regression of the naive averages ``Z/N`` with weights ``N``."""
    mask, n_empty = _prepare(binned)
    N = binned.N[mask].astype(float)
    fitted = pava(binned.Z[mask] / N, N)
    return StepEstimate(binned.grid, _fill_empty(fitted, mask), n_empty)


def npmle_via_gcm(binned: BinnedCounts) -> StepEstimate:
    """NPMLE as left slopes of the GCM of the cumulative sum diagram ``(G_n, V_n)``.

    Independent of :func:`npmle`; kept as a cross-check path.
    """
    mask, n_empty = _prepare(binned)
    n = binned.n
    Gn = np.concatenate([[0.0], np.cumsum(binned.N[mask]) / n])
    Vn = np.concatenate([[0.0], np.cumsum(binned.Z[mask]) / n])
    fitted = left_slopes(gcm(Gn, Vn), Gn[1:])
    return StepEstimate(binned.grid, _fill_empty(fitted, mask), n_empty)


def eval_step(est: StepEstimate, t: float) -> float:
    g = est.grid
    if not g.a <= t <= g.b:
        raise ValueError("out of domain")
    i = tolerant_floor((t - g.a) / g.delta, 1e-12)
    if i < 1:
        return 0.0
    return float(est.levels[min(i, g.K) - 1])


def locate_anchor(grid: GridSpec, x0: float) -> tuple[int, int, float]:
    """1-based indices ``l, r = l+1`` with ``t_l <= x0 < t_r`` and ``rho = (x0 - t_l)/delta``."""
    pos = (x0 - grid.a) / grid.delta
    l = tolerant_floor(pos, 1e-12)
    if not 1 <= l < grid.K:
        raise ValueError("anchor outside grid")
    rho = (x0 - grid.point(l)) / grid.delta
    rho = min(max(rho, 0.0), math.nextafter(1.0, 0.0))
    return l, l + 1, rho


def naive_is_monotone(binned: BinnedCounts) -> bool:
    m = binned.means[binned.N > 0]
    return bool(np.all(np.diff(m) >= 0))
