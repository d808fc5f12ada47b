"""Simulation study: data generation on a grid, coverage of the adaptive
interval, and ECDF comparisons of the boundary family with its limits.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
from typing import Callable

import numpy as np
from scipy import stats

from . import rng as _rng
from .ci import CiRequest, adaptive_interval, compute_c_hat, oracle_interval_chernoff, oracle_interval_gaussian
from .limits import LimitParams, SamplerConfig, boundary_draws, boundary_noise, chernoff_draws
from .model import GridSpec, ObservationSet, bin_observations, locate_anchor, naive_is_monotone, npmle, tolerant_floor
from .nuisance import NuisanceError, assemble, estimate_nuisance


class PointMass:
    """Degenerate event-time law, used to pin every response to 0 or 1."""

    def __init__(self, at: float):
        self.at = at

    def cdf(self, t):
        return np.where(np.asarray(t) >= self.at, 1.0, 0.0)

    def pdf(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def rvs(self, size, random_state):
        return np.full(size, self.at, dtype=float)


def make_dist(family: str, params: dict, a: float = 0.0, b: float = 1.0):
    """Frozen distribution with ``cdf``, ``pdf`` and ``rvs`` for a named family.

    ``uniform`` takes ``lo``/``hi`` (default ``[a, b]``), ``exp`` takes
    ``rate``, ``point`` takes ``at``.
    """
    if family == "uniform":
        lo, hi = params.get("lo", a), params.get("hi", b)
        return stats.uniform(loc=lo, scale=hi - lo)
    if family == "exp":
        return stats.expon(scale=1.0 / params.get("rate", 1.0))
    if family == "point":
        return PointMass(params["at"])
    raise ValueError(f"unknown distribution family {family!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    gamma0: float
    c0: float
    n: int
    a: float = 0.0
    b: float = 1.0
    x0: float = 0.5
    F_family: str = "uniform"
    F_params: dict = field(default_factory=dict)
    G_family: str = "uniform"
    G_params: dict = field(default_factory=dict)
    reps: int = 1000
    eta: float = 0.05
    seed: int = 0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    threshold_mult: float = 1.0
    name: str = ""
    # programmatic override of the design law; not serialisable
    G_custom: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.a < self.x0 < self.b:
            raise ValueError("need a < x0 < b")
        if not 0 < self.gamma0 <= 1:
            raise ValueError("gamma0 must lie in (0, 1]")
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if self.n < 1 or self.reps < 1:
            raise ValueError("n and reps must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")

    @property
    def F(self):
        return make_dist(self.F_family, self.F_params, self.a, self.b)

    @property
    def G(self):
        if self.G_custom is not None:
            return self.G_custom
        return make_dist(self.G_family, self.G_params, self.a, self.b)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "G_custom"}
        d["sampler"] = asdict(self.sampler)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        d = dict(d)
        if isinstance(d.get("sampler"), dict):
            d["sampler"] = SamplerConfig(**d["sampler"])
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**d)


def load_battery(path) -> list[ScenarioSpec]:
    """Scenarios from a JSON file ``{"defaults": {...}, "scenarios": [{...}, ...]}``.

    Each scenario entry overrides the defaults; ``sampler`` dicts are merged.
    """
    with open(path) as fh:
        cfg = json.load(fh)
    defaults = cfg.get("defaults", {})
    out = []
    for entry in cfg["scenarios"]:
        merged = {**defaults, **entry}
        merged["sampler"] = {**defaults.get("sampler", {}), **entry.get("sampler", {})}
        out.append(ScenarioSpec.from_dict(merged))
    return out


def build_grid(spec: ScenarioSpec) -> GridSpec:
    delta = spec.c0 * spec.n ** (-spec.gamma0)
    if tolerant_floor((spec.b - spec.a) / delta) < 2:
        raise ValueError("grid too coarse")
    return GridSpec(spec.a, spec.b, delta)


def discretize_G(grid: GridSpec, G_cdf: Callable) -> np.ndarray:
    """Mass of the discretised design law at each grid point.

    ``p_1 = G(t_1)``, ``p_i = G(t_i) - G(t_{i-1})``, ``p_K = 1 - G(t_{K-1})``.
    """
    K = grid.K
    if K == 1:
        return np.ones(1)
    Gt = np.asarray(G_cdf(grid.points[:-1]), dtype=float)
    edges = np.concatenate([[0.0], Gt, [1.0]])
    p = np.diff(edges)
    if np.any(p < -1e-15):
        raise ValueError("invalid CDF")
    return np.clip(p, 0.0, None)


def generate_dataset(spec: ScenarioSpec, gen: np.random.Generator, grid: GridSpec | None = None) -> ObservationSet:
    grid = build_grid(spec) if grid is None else grid
    p = discretize_G(grid, spec.G.cdf)
    cum = np.cumsum(p)
    u = gen.random(spec.n)
    idx = np.minimum(np.searchsorted(cum, u * cum[-1], side="right"), grid.K - 1)
    x = grid.points[idx]
    T = np.asarray(spec.F.rvs(size=spec.n, random_state=gen), dtype=float)
    return ObservationSet(x, (T <= x).astype(np.int64))


def true_nuisance(spec: ScenarioSpec):
    F, G = spec.F, spec.G
    return assemble(float(F.cdf(spec.x0)), float(G.pdf(spec.x0)), float(F.pdf(spec.x0)))


@dataclass(frozen=True)
class CoverageReport:
    scenario: ScenarioSpec
    CR_practical: float
    CR_theoretical: float
    AL_practical: float
    AL_theoretical: float
    failures: int
    successes: int
    K: int
    c_hat: float
    per_rep: list = field(default_factory=list, compare=False, repr=False)

    CSV_FIELDS = ("name", "F_family", "F_params", "gamma0", "c0", "n", "K", "c_hat", "reps",
                  "CR_P", "CR_T", "AL_P", "AL_T", "failures")

    def row(self) -> dict:
        s = self.scenario
        return {
            "name": s.name,
            "F_family": s.F_family,
            "F_params": json.dumps(s.F_params, sort_keys=True),
            "gamma0": s.gamma0,
            "c0": s.c0,
            "n": s.n,
            "K": self.K,
            "c_hat": self.c_hat,
            "reps": s.reps,
            "CR_P": self.CR_practical,
            "CR_T": self.CR_theoretical,
            "AL_P": self.AL_practical,
            "AL_T": self.AL_theoretical,
            "failures": self.failures,
        }


PER_REP_FIELDS = ("rep", "ok_P", "cover_P", "lower_P", "upper_P", "cover_T", "lower_T", "upper_T",
                  "F_hat_tl", "F_tl", "alpha_hat", "beta_hat")


def _replicate(rep: int, spec: ScenarioSpec, grid: GridSpec, anchor, c_hat: float, truth) -> dict:
    data_gen = _rng.substream(spec.seed, _rng.DATA, rep)
    binned = bin_observations(generate_dataset(spec, data_gen, grid), grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = npmle(binned)
    l, r, rho = anchor
    req = CiRequest(spec.eta, anchor, spec.sampler)
    # practical and theoretical intervals share the same normals
    noise = boundary_noise(spec.seed, (_rng.BOUNDARY, rep), spec.sampler.B, spec.sampler.K_a)
    F_tl = float(spec.F.cdf(grid.point(l)))
    row = {"rep": rep, "F_hat_tl": est.at(l), "F_tl": F_tl}
    try:
        nuis = estimate_nuisance(est, binned, l, r, rho, spec.threshold_mult)
    except NuisanceError:
        row.update(ok_P=0, cover_P=0, lower_P=math.nan, upper_P=math.nan, alpha_hat=math.nan, beta_hat=math.nan)
    else:
        ci = adaptive_interval(est, nuis, spec.n, c_hat, req, noise=noise)
        row.update(ok_P=1, cover_P=int(ci.covers(F_tl)), lower_P=ci.lower, upper_P=ci.upper,
                   alpha_hat=nuis.alpha_hat, beta_hat=nuis.beta_hat)
    ci_t = adaptive_interval(est, truth, spec.n, c_hat, req, noise=noise)
    row.update(cover_T=int(ci_t.covers(F_tl)), lower_T=ci_t.lower, upper_T=ci_t.upper)
    return row


def _replicate_chunk(reps, **kw) -> list[dict]:
    return [_replicate(r, **kw) for r in reps]


def run_coverage(spec: ScenarioSpec, threads: int | None = 1, keep_per_rep: bool = False) -> CoverageReport:
    """Coverage rate and average length of the practical and theoretical procedures.

    Replications run on independent substreams keyed by index, and are reduced
    in index order, so the report does not depend on ``threads``.
    """
    grid = build_grid(spec)
    anchor = locate_anchor(grid, spec.x0)
    c_hat = compute_c_hat(spec.a, spec.b, grid.K, spec.n)
    fn = partial(_replicate_chunk, spec=spec, grid=grid, anchor=anchor, c_hat=c_hat, truth=true_nuisance(spec))
    chunks = [range(s, min(s + 25, spec.reps)) for s in range(0, spec.reps, 25)]
    rows = [row for chunk in _rng.pmap(fn, chunks, threads) for row in chunk]
    rows.sort(key=lambda r: r["rep"])

    ok = [r for r in rows if r["ok_P"]]
    nan = math.nan
    cr_p = sum(r["cover_P"] for r in ok) / len(ok) if ok else nan
    al_p = math.fsum(r["upper_P"] - r["lower_P"] for r in ok) / len(ok) if ok else nan
    cr_t = sum(r["cover_T"] for r in rows) / len(rows)
    al_t = math.fsum(r["upper_T"] - r["lower_T"] for r in rows) / len(rows)
    return CoverageReport(spec, cr_p, cr_t, al_p, al_t, len(rows) - len(ok), len(ok), grid.K, c_hat,
                          rows if keep_per_rep else [])


def _oracle_chunk(reps, spec, grid, l, truth, cfg):
    out = []
    for rep in reps:
        binned = bin_observations(generate_dataset(spec, _rng.substream(spec.seed, _rng.DATA, rep), grid), grid)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            est = npmle(binned)
        if spec.gamma0 < 1 / 3:
            ci = oracle_interval_gaussian(est, l, truth.alpha_hat, spec.c0, spec.gamma0, spec.n, spec.eta)
        else:
            ci = oracle_interval_chernoff(est, l, truth.alpha_hat, truth.beta_hat, spec.n, spec.eta, cfg)
        out.append((ci.covers(float(spec.F.cdf(grid.point(l)))), ci.length))
    return out


def oracle_coverage(spec: ScenarioSpec, cfg: SamplerConfig | None = None, threads: int | None = 1) -> dict:
    """Coverage and mean length of the known-regime interval with true nuisances.

    Gaussian calibration for ``gamma0 < 1/3``, Chernoff otherwise. Uses the
    same datasets as :func:`run_coverage` for the same spec.
    """
    if spec.gamma0 == 1 / 3:
        raise ValueError("no oracle interval at gamma0 = 1/3")
    grid = build_grid(spec)
    l = locate_anchor(grid, spec.x0)[0]
    cfg = cfg or SamplerConfig(B=5000, seed=spec.seed)
    fn = partial(_oracle_chunk, spec=spec, grid=grid, l=l, truth=true_nuisance(spec), cfg=cfg)
    chunks = [range(s, min(s + 50, spec.reps)) for s in range(0, spec.reps, 50)]
    res = [r for chunk in _rng.pmap(fn, chunks, threads) for r in chunk]
    return {"CR": sum(c for c, _ in res) / len(res), "AL": math.fsum(a for _, a in res) / len(res)}


def ks_to_normal(x) -> float:
    return float(stats.kstest(np.asarray(x), "norm").statistic)


def ks_two_sample(x, y) -> float:
    return float(stats.ks_2samp(np.asarray(x), np.asarray(y)).statistic)


def ecdf_compare(alpha: float, beta: float, c_list, B: int = 5000, seed: int = 0,
                 K_a: int = 300, chernoff_cfg: SamplerConfig | None = None, threads: int | None = 1) -> list[dict]:
    """KS distances of the boundary family to its two limits, one row per ``c``.

    ``KS_to_gaussian`` compares ``sqrt(c) S_c / alpha`` with N(0, 1);
    ``KS_to_chernoff`` compares ``S_c`` with simulated ``g_{alpha,beta}(0)``.
    All ``c`` share the same normals.
    """
    if B < 1000:
        raise ValueError("B must be at least 1000")
    ccfg = chernoff_cfg or SamplerConfig(B=B, seed=seed + 1)
    chern = chernoff_draws(alpha, beta, replace(ccfg, B=B), threads)
    out = []
    for c in c_list:
        params = LimitParams(float(c), alpha, beta)
        s = boundary_draws(params, SamplerConfig(K_a=K_a, B=B, seed=seed), threads)
        out.append({
            "c": float(c),
            "KS_to_gaussian": ks_to_normal(math.sqrt(c) * s / alpha),
            "KS_to_chernoff": ks_two_sample(s, chern),
        })
    return out


def naive_ordering_rate(spec: ScenarioSpec, reps: int | None = None) -> float:
    """Share of replications whose naive bin averages are already nondecreasing."""
    reps = spec.reps if reps is None else reps
    grid = build_grid(spec)
    hits = 0
    for rep in range(reps):
        obs = generate_dataset(spec, _rng.substream(spec.seed, _rng.DATA, rep), grid)
        hits += naive_is_monotone(bin_observations(obs, grid))
    return hits / reps
