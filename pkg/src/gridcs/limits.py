"""Monte Carlo samplers for the limit laws of the grid NPMLE.

Three laws appear depending on how fast the grid fills in:

* the boundary family ``S_c``: left slope at 0 of the GCM of the discrete
  process ``{ck, alpha W(ck) + beta c^2 k(1+k)}``, sampled as the isotonic
  regression at ``k = 0`` of ``alpha Z_k / sqrt(c) + 2 beta c k``;
* the Chernoff-type law ``g_{alpha,beta}(0)``, slope at 0 of the GCM of
  ``alpha W(h) + beta h^2``;
* the Gaussian law, which needs only a normal quantile.
"""
from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import asdict, dataclass
from functools import partial

import numpy as np
from numba import njit
from scipy.stats import norm

from . import rng as _rng
from .isotonic import isotonic_value_at


@dataclass(frozen=True)
class LimitParams:
    c: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("c", "alpha", "beta"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")

    @property
    def theta(self) -> float:
        """Drift of the standardised form ``Z_k + theta k``."""
        return 2.0 * self.beta * self.c**1.5 / self.alpha

    @property
    def scale(self) -> float:
        return self.alpha / math.sqrt(self.c)


@dataclass(frozen=True)
class SamplerConfig:
    K_a: int = 300
    B: int = 3000
    seed: int = 0
    fine_step: float = 0.005
    fine_halfwidth: float = 20.0

    def __post_init__(self):
        if self.K_a < 1 or self.B < 1:
            raise ValueError("K_a and B must be >= 1")
        if not (self.fine_step > 0 and self.fine_halfwidth > self.fine_step):
            raise ValueError("need 0 < fine_step < fine_halfwidth")


@dataclass(frozen=True)
class QuantileTable:
    probs: np.ndarray
    quants: np.ndarray
    params: dict
    config: dict

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "config": self.config,
            "probs": [float(p) for p in self.probs],
            "quants": [float(q) for q in self.quants],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "QuantileTable":
        return cls(np.asarray(d["probs"], float), np.asarray(d["quants"], float), d["params"], d["config"])

    def quantile(self, p: float) -> float:
        hit = np.flatnonzero(np.isclose(self.probs, p, rtol=0, atol=1e-12))
        if hit.size == 0:
            raise KeyError(f"probability {p} not in table")
        return float(self.quants[hit[0]])


def empirical_quantile(draws, probs) -> np.ndarray:
    """Lower empirical quantile ``x_(ceil(p B))``."""
    x = np.sort(np.asarray(draws, dtype=float))
    p = np.atleast_1d(np.asarray(probs, dtype=float))
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("probabilities must lie in (0, 1)")
    k = np.ceil(p * x.size - 1e-9).astype(np.int64)
    return x[np.clip(k, 1, x.size) - 1]


# -- boundary family ---------------------------------------------------------


@njit(cache=True)
def _boundary_batch(noise, scale, drift):
    B, m = noise.shape
    K_a = (m - 1) // 2
    d = np.empty(m)
    out = np.empty(B)
    for b in range(B):
        for i in range(m):
            d[i] = scale * noise[b, i] + drift * (i - K_a)
        out[b] = isotonic_value_at(d, K_a)
    return out


def sample_boundary_slope(params: LimitParams, K_a: int, noise) -> float:
    """One draw of ``X_{c,K_a}(0)`` from ``2K_a+1`` normals indexed ``k = -K_a..K_a``."""
    z = np.asarray(noise, dtype=float)
    if z.shape != (2 * K_a + 1,):
        raise ValueError(f"need {2 * K_a + 1} normal draws")
    k = np.arange(-K_a, K_a + 1)
    d = params.alpha * z / math.sqrt(params.c) + 2.0 * params.beta * params.c * k
    return float(isotonic_value_at(d, K_a))


def standard_boundary_slope(theta: float, noise) -> float:
    """Isotonic regression at the centre of ``Z_k + theta k``.

    ``S_{c,alpha,beta} = (alpha/sqrt(c)) * standard_boundary_slope(2 beta c^1.5/alpha)``
    pathwise for the same normals.
    """
    z = np.asarray(noise, dtype=float)
    K_a = (z.size - 1) // 2
    return float(isotonic_value_at(z + theta * np.arange(-K_a, K_a + 1), K_a))


def boundary_noise(seed: int, key: tuple, count: int, K_a: int) -> np.ndarray:
    return _rng.substream(seed, *key).standard_normal((count, 2 * K_a + 1))


def boundary_from_noise(params: LimitParams, noise: np.ndarray) -> np.ndarray:
    """Draws of ``S_c`` for each row of a normal matrix of width ``2K_a+1``."""
    return _boundary_batch(np.ascontiguousarray(noise, dtype=float), params.scale, 2.0 * params.beta * params.c)


def _boundary_block(item, params, K_a, seed):
    j, count = item
    return boundary_from_noise(params, boundary_noise(seed, (_rng.BOUNDARY, j), count, K_a))


def boundary_draws(params: LimitParams, cfg: SamplerConfig, threads: int | None = 1) -> np.ndarray:
    """``cfg.B`` independent draws of ``S_c``; deterministic in ``cfg.seed``."""
    fn = partial(_boundary_block, params=params, K_a=cfg.K_a, seed=cfg.seed)
    return np.concatenate(_rng.pmap(fn, _rng.blocks(cfg.B), threads))


def quantiles_boundary(params: LimitParams, probs, cfg: SamplerConfig, threads: int | None = 1) -> QuantileTable:
    if cfg.B < 100:
        warnings.warn("unstable quantiles: fewer than 100 draws", RuntimeWarning, stacklevel=2)
    probs = np.sort(np.atleast_1d(np.asarray(probs, dtype=float)))
    q = empirical_quantile(boundary_draws(params, cfg, threads), probs)
    return QuantileTable(probs, q, asdict(params), asdict(cfg))


# -- Chernoff-type law -------------------------------------------------------


@njit(cache=True)
def _gcm_left_slope_at(x, y, j):
    # lower hull by monotone chain with exact cross-product tests
    m = x.shape[0]
    hull = np.empty(m, dtype=np.int64)
    top = -1
    for i in range(m):
        while top >= 1:
            o = hull[top - 1]
            a = hull[top]
            cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o])
            if cross <= 0:
                top -= 1
            else:
                break
        top += 1
        hull[top] = i
    for s in range(1, top + 1):
        if hull[s] >= j:
            p = hull[s - 1]
            q = hull[s]
            return (y[q] - y[p]) / (x[q] - x[p])
    return np.nan


@njit(cache=True)
def _chernoff_batch(noise, alpha, beta, step):
    B, m2 = noise.shape
    half = m2 // 2
    m = m2 + 1
    h = np.empty(m)
    y = np.empty(m)
    out = np.empty(B)
    sd = np.sqrt(step)
    for i in range(m):
        h[i] = (i - half) * step
    for b in range(B):
        # W(0) = 0 with independent wings to the right and to the left
        y[half] = 0.0
        for i in range(half + 1, m):
            y[i] = y[i - 1] + sd * noise[b, i - 1]
        for i in range(half - 1, -1, -1):
            y[i] = y[i + 1] + sd * noise[b, i]
        for i in range(m):
            y[i] = alpha * y[i] + beta * h[i] * h[i]
        out[b] = _gcm_left_slope_at(h, y, half)
    return out


def _check_localization(alpha: float, beta: float, cfg: SamplerConfig) -> int:
    if cfg.fine_halfwidth < 10.0 * (alpha / beta) ** (2.0 / 3.0):
        raise ValueError("localization risk: fine_halfwidth below 10*(alpha/beta)^(2/3)")
    return int(round(cfg.fine_halfwidth / cfg.fine_step))


def sample_chernoff_slope(alpha: float, beta: float, cfg: SamplerConfig, gen: np.random.Generator) -> float:
    """One draw of ``g_{alpha,beta}(0)`` from a discretised two-sided Brownian path.

    The path lives on ``[-fine_halfwidth, fine_halfwidth]`` with spacing
    ``fine_step``, both in the native ``h`` scale.
    """
    half = _check_localization(alpha, beta, cfg)
    noise = gen.standard_normal((1, 2 * half))
    return float(_chernoff_batch(noise, float(alpha), float(beta), cfg.fine_step)[0])


def _chernoff_block(item, alpha, beta, cfg, half):
    j, count = item
    noise = _rng.substream(cfg.seed, _rng.CHERNOFF, j).standard_normal((count, 2 * half))
    return _chernoff_batch(noise, alpha, beta, cfg.fine_step)


def chernoff_draws(alpha: float, beta: float, cfg: SamplerConfig, threads: int | None = 1) -> np.ndarray:
    """``cfg.B`` draws of ``g_{alpha,beta}(0)``, simulated directly at ``(alpha, beta)``."""
    half = _check_localization(alpha, beta, cfg)
    fn = partial(_chernoff_block, alpha=float(alpha), beta=float(beta), cfg=cfg, half=half)
    return np.concatenate(_rng.pmap(fn, _rng.blocks(cfg.B), threads))


@functools.lru_cache(maxsize=16)
def _standard_chernoff_sorted(cfg: SamplerConfig) -> np.ndarray:
    return np.sort(chernoff_draws(1.0, 1.0, cfg))


def chernoff_quantile(alpha: float, beta: float, cfg: SamplerConfig, p) -> np.ndarray:
    """Quantiles of ``g_{alpha,beta}(0)`` via ``(alpha^2 beta)^{1/3} g_{1,1}(0)``.

    The standardised draws are cached per sampler configuration.
    """
    base = empirical_quantile(_standard_chernoff_sorted(cfg), p)
    return np.cbrt(alpha * alpha * beta) * base


# -- interval half-widths ----------------------------------------------------


def gaussian_ci_halfwidth(alpha: float, c: float, n: int, gamma: float, p: float) -> float:
    """``n^{-(1-gamma)/2} alpha c^{-1/2} z_p`` for a sparse grid (``gamma < 1/3``)."""
    if not 0 < gamma < 1 / 3:
        raise ValueError("wrong regime: gamma must lie in (0, 1/3)")
    if alpha <= 0 or c <= 0 or n < 1:
        raise ValueError("alpha, c and n must be positive")
    return float(n ** (-(1 - gamma) / 2) * alpha / math.sqrt(c) * norm.ppf(p))


def chernoff_ci_halfwidth(alpha: float, beta: float, n: int, cfg: SamplerConfig, p: float) -> float:
    """``n^{-1/3}`` times the ``p``-quantile of ``g_{alpha,beta}(0)``."""
    return float(chernoff_quantile(alpha, beta, cfg, p)[0] / np.cbrt(n))
