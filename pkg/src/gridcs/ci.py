"""Wald-type confidence intervals for F(t_l).

The adaptive interval pretends the grid exponent is 1/3, solves for the
matching scale ``c_hat`` and reads quantiles off the boundary family
``S_{c_hat}``; it needs neither the true exponent nor the true scale. The
two oracle intervals assume the regime is known and serve as benchmarks.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .limits import (
    LimitParams,
    SamplerConfig,
    boundary_from_noise,
    chernoff_ci_halfwidth,
    empirical_quantile,
    gaussian_ci_halfwidth,
    quantiles_boundary,
)
from .model import StepEstimate
from .nuisance import NuisanceEstimates

MODES = ("adaptive", "oracle-gaussian", "oracle-chernoff")


@dataclass(frozen=True)
class CiRequest:
    """What interval to build.

    ``eta`` is the total miscoverage: quantiles are taken at ``eta/2`` and
    ``1 - eta/2`` for a nominal level ``1 - eta``.
    """

    eta: float
    anchor: tuple[int, int, float]
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    mode: str = "adaptive"
    gamma0: float | None = None
    c0: float | None = None

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class CiResult:
    lower: float
    upper: float
    estimate: float
    t_l: float
    c_hat: float | None
    q_lo: float
    q_hi: float
    clamped: bool
    mode: str
    eta: float
    n: int
    nuisance: NuisanceEstimates | None = None

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        d = asdict(self)
        d["length"] = self.length
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def compute_c_hat(a: float, b: float, K: int, n: int) -> float:
    """Scale solving ``floor((b-a)/(c n^{-1/3})) = K``; the closed form ``(b-a) n^{1/3} / K``."""
    if K < 1 or n < 1 or not b > a:
        raise ValueError("need K >= 1, n >= 1 and b > a")
    return float((b - a) * np.cbrt(n) / K)


def _clamp(lo: float, hi: float) -> tuple[float, float, bool]:
    lo, hi = float(lo), float(hi)
    clo, chi = min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)
    return clo, chi, bool(clo != lo or chi != hi)


def adaptive_interval(
    est: StepEstimate,
    nuis: NuisanceEstimates,
    n: int,
    c_hat: float,
    req: CiRequest,
    noise: np.ndarray | None = None,
) -> CiResult:
    """``[F(t_l) - n^{-1/3} q(S, 1-eta/2), F(t_l) - n^{-1/3} q(S, eta/2)]`` with ``S = S_{c_hat}``.

    ``noise`` (rows of ``2K_a+1`` normals) replaces fresh sampling; the
    simulation study uses it to share draws between procedures.
    """
    l = req.anchor[0]
    params = LimitParams(c_hat, nuis.alpha_hat, nuis.beta_hat)
    probs = [req.eta / 2, 1 - req.eta / 2]
    if noise is None:
        q_lo, q_hi = quantiles_boundary(params, probs, req.sampler).quants
    else:
        q_lo, q_hi = empirical_quantile(boundary_from_noise(params, noise), probs)
    center = est.at(l)
    rate = 1.0 / np.cbrt(n)
    lower, upper, clamped = _clamp(center - rate * q_hi, center - rate * q_lo)
    return CiResult(lower, upper, center, est.grid.point(l), c_hat, float(q_lo), float(q_hi),
                    clamped, "adaptive", req.eta, n, nuis)


def oracle_interval_gaussian(est: StepEstimate, l: int, alpha_true: float, c0: float, gamma0: float,
                             n: int, eta: float) -> CiResult:
    half = gaussian_ci_halfwidth(alpha_true, c0, n, gamma0, 1 - eta / 2)
    center = est.at(l)
    lower, upper, clamped = _clamp(center - half, center + half)
    q = half * n ** ((1 - gamma0) / 2)
    return CiResult(lower, upper, center, est.grid.point(l), None, -q, q, clamped,
                    "oracle-gaussian", eta, n)


def oracle_interval_chernoff(est: StepEstimate, l: int, alpha_true: float, beta_true: float, n: int,
                             eta: float, cfg: SamplerConfig) -> CiResult:
    half = chernoff_ci_halfwidth(alpha_true, beta_true, n, cfg, 1 - eta / 2)
    center = est.at(l)
    lower, upper, clamped = _clamp(center - half, center + half)
    q = half * np.cbrt(n)
    return CiResult(lower, upper, center, est.grid.point(l), None, -q, q, clamped,
                    "oracle-chernoff", eta, n)
