"""Acceptance criteria 1-10, one test (or small group) per criterion.

Each test appends a ``[PASS]``/``[FAIL]`` line that the terminal summary
prints under "acceptance criteria". Seeds are fixed constants chosen before
any of these checks were run.
"""
import functools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from gridcs.cli import main
from gridcs.isotonic import pava
from gridcs.limits import (
    LimitParams,
    SamplerConfig,
    chernoff_draws,
    sample_boundary_slope,
    standard_boundary_slope,
)
from gridcs.model import BinnedCounts, GridSpec, npmle, npmle_via_gcm
from gridcs.sim import (
    ScenarioSpec,
    build_grid,
    ecdf_compare,
    ks_two_sample,
    naive_ordering_rate,
    oracle_coverage,
    run_coverage,
)

from conftest import ACCEPTANCE_LINES
from oracles import isotonic_brute_force

pytestmark = pytest.mark.slow

ALPHA, BETA = math.sqrt(2) / 4, 0.25
SEED = 1
PROTOCOL = SamplerConfig(K_a=300, B=1000)
SMOKE = Path(__file__).resolve().parent.parent / "configs" / "smoke.json"


def record(number, label, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {label} -- {detail}")
    assert ok, detail


@functools.lru_cache(maxsize=None)
def coverage(gamma0, c0, n, reps):
    return run_coverage(ScenarioSpec(gamma0=gamma0, c0=c0, n=n, reps=reps, seed=SEED, sampler=PROTOCOL))


def test_criterion_1_pava_brute_force():
    rng = np.random.default_rng(101)
    start, worst = time.perf_counter(), 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        v = rng.normal(size=m)
        w = rng.uniform(0.1, 5.0, size=m)
        worst = max(worst, float(np.max(np.abs(pava(v, w) - isotonic_brute_force(v, w)))))
    elapsed = time.perf_counter() - start
    record(1, "PAVA matches exhaustive block search", worst <= 1e-12 and elapsed < 10,
           f"max gap {worst:.2e} over 1000 series, {elapsed:.1f}s")


def test_criterion_2_npmle_duality():
    rng = np.random.default_rng(102)
    start, worst = time.perf_counter(), 0.0
    for _ in range(1000):
        K = int(rng.integers(1, 51))
        N = rng.integers(1, 40, size=K)
        Z = rng.binomial(N, np.sort(rng.random(K)))
        b = BinnedCounts(GridSpec(0.0, 1.0, 1.0 / K), N, Z)
        worst = max(worst, float(np.max(np.abs(npmle(b).levels - npmle_via_gcm(b).levels))))
    elapsed = time.perf_counter() - start
    record(2, "PAVA fit equals slopes of the cumulative sum diagram", worst <= 1e-12 and elapsed < 10,
           f"max gap {worst:.2e} over 1000 datasets, {elapsed:.1f}s")


@functools.lru_cache(maxsize=None)
def limit_rows():
    return ecdf_compare(ALPHA, BETA, [1, 2, 3, 5, 10], B=5000, seed=SEED)


def test_criterion_3_gaussian_limit():
    ks = [r["KS_to_gaussian"] for r in limit_rows()]
    decreasing = all(b <= a + 0.01 for a, b in zip(ks[:-1], ks[1:]))
    record(3, "sqrt(c) S_c / alpha approaches N(0,1)", ks[-1] < 0.03 and decreasing,
           "KS at c=1,2,3,5,10: " + ", ".join(f"{k:.4f}" for k in ks))


def test_criterion_4_chernoff_limit():
    ks = limit_rows()[0]["KS_to_chernoff"]
    record(4, "S_1 is close to the Chernoff limit", ks < 0.05, f"KS = {ks:.4f}")


def test_criterion_5_brownian_scaling():
    # both sides driven by the same normals (common random numbers)
    cfg = SamplerConfig(B=5000, seed=SEED)
    direct = chernoff_draws(ALPHA, BETA, cfg)
    scaled = (ALPHA**2 * BETA) ** (1 / 3) * chernoff_draws(1.0, 1.0, cfg)
    ks = ks_two_sample(direct, scaled)
    record(5, "g_{a,b}(0) matches (a^2 b)^{1/3} g_{1,1}(0)", ks < 0.02, f"KS = {ks:.4f}")


def test_criterion_6_pathwise_scaling():
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(100):
        c, alpha, beta = rng.uniform(0.05, 10), rng.uniform(0.05, 3), rng.uniform(0.05, 3)
        z = rng.standard_normal(601)
        p = LimitParams(c, alpha, beta)
        lhs = sample_boundary_slope(p, 300, z)
        rhs = alpha / math.sqrt(c) * standard_boundary_slope(p.theta, z)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    record(6, "S_{c,a,b} = (a/sqrt c) I_0(2 b c^{3/2}/a) pathwise", worst <= 1e-12, f"max gap {worst:.2e}")


def test_criterion_7_table_row():
    r = coverage(1 / 3, 0.5, 500, 1000)
    ok = abs(r.CR_practical - 0.938) <= 0.025 and abs(r.AL_practical - 0.236) <= 0.02
    record(7, "U[0,1], (1/3, 1/2), n=500", ok,
           f"CR(P) = {r.CR_practical:.3f} (target 0.938 +/- 0.025), AL(P) = {r.AL_practical:.3f} "
           f"(target 0.236 +/- 0.02), failures {r.failures}")


@pytest.mark.parametrize("gamma0, c0, target", [(1 / 6, 1 / 6, 0.943), (2 / 3, 2.0, 0.936)])
def test_criterion_8_coverage_across_regimes(gamma0, c0, target):
    r = coverage(gamma0, c0, 500, 1000)
    record(8, f"CR(P) at (gamma, c) = ({gamma0:.3g}, {c0:.3g}), n=500", abs(r.CR_practical - target) <= 0.025,
           f"CR(P) = {r.CR_practical:.3f} (target {target} +/- 0.025), CR(T) = {r.CR_theoretical:.3f}")


def test_theoretical_coverage_gaussian_regime():
    # reference coverage with true nuisances at (1/6, 1/6): 0.953
    r = coverage(1 / 6, 1 / 6, 500, 1000)
    assert 0.93 <= r.CR_theoretical <= 0.96


@pytest.mark.parametrize("gamma0, c0", [(2 / 3, 2.0), (1 / 6, 1 / 6)])
def test_criterion_8_length_ratio(gamma0, c0):
    spec = ScenarioSpec(gamma0=gamma0, c0=c0, n=1000, reps=500, seed=SEED, sampler=PROTOCOL)
    adaptive = run_coverage(spec)
    oracle = oracle_coverage(spec, SamplerConfig(B=5000, seed=SEED))
    ratio = adaptive.AL_practical / oracle["AL"]
    kind = "Gaussian" if gamma0 < 1 / 3 else "Chernoff"
    record(8, f"adaptive / {kind} oracle length at ({gamma0:.3g}, {c0:.3g}), n=1000", 0.9 <= ratio <= 1.1,
           f"ratio {ratio:.3f} (AL(P) {adaptive.AL_practical:.3f}, oracle {oracle['AL']:.3f}, "
           f"K={adaptive.K}, c_hat={adaptive.c_hat:.3f})")


def test_criterion_9_naive_ordering():
    spec = ScenarioSpec(gamma0=1 / 3, c0=0.2 * 10000 ** (1 / 3), n=10000, reps=500, seed=SEED)
    assert build_grid(spec).K == 5
    rate = naive_ordering_rate(spec)
    record(9, "naive averages already ordered on a fixed 5-point grid", rate >= 0.99, f"rate = {rate:.3f}")


def test_criterion_10_determinism(tmp_path):
    outs = []
    for i, threads in enumerate(("1", "2", "1")):
        out = tmp_path / f"r{i}.csv"
        assert main(["coverage", str(SMOKE), "--seed", "3", "--threads", threads, "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    same = outs[0] == outs[1] == outs[2]
    record(10, "coverage CSV is byte-identical across runs and worker counts", same,
           f"{len(outs[0])} bytes, identical={same}")
