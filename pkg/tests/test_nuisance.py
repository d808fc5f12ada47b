import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcs.model import BinnedCounts, GridSpec, StepEstimate, bin_observations, locate_anchor, npmle
from gridcs.nuisance import (
    NuisanceError,
    assemble,
    estimate_F_x0,
    estimate_f_x0,
    estimate_g_x0,
    estimate_nuisance,
    find_i_star,
    find_j_star,
)
from gridcs.sim import ScenarioSpec, build_grid, generate_dataset


def step(levels, a=0.0, delta=0.1):
    levels = np.asarray(levels, float)
    return StepEstimate(GridSpec(a, a + delta * levels.size, delta), levels)


def counts(N, a=0.0, delta=0.1):
    N = np.asarray(N)
    return BinnedCounts(GridSpec(a, a + delta * N.size, delta), N, np.zeros_like(N))


def test_F_x0_combination():
    est = step([0.1, 0.4, 0.6, 0.9])
    assert estimate_F_x0(est, 2, 3, 0.0) == 0.6  # weights applied as written
    assert estimate_F_x0(est, 2, 3, 0.5) == pytest.approx(0.5)
    assert estimate_F_x0(est, 2, 3, 0.5, grid_only=True) == 0.4
    assert estimate_F_x0(est, 2, 3, 1.0) == 0.4


def test_j_star_uniform_example():
    n = round(math.exp(10))  # 1/log n = 0.1
    N = np.full(21, n // 21)
    N[:n - N.sum()] += 1
    b = BinnedCounts(GridSpec(0.0, 1.0, 1 / 21), N, np.zeros(21, int))
    assert b.n == n
    assert find_j_star(b, 11, 12) == (1, False)
    assert find_j_star(b, 11, 12, threshold_mult=2.0) == (2, False)


def test_j_star_rejects_bad_multiplier():
    b = counts([10] * 5)
    with pytest.raises(ValueError):
        find_j_star(b, 3, 4, threshold_mult=0.0)


def test_j_star_edge_cases_warn():
    b = counts([30])
    with pytest.warns(RuntimeWarning, match="whole grid"):
        j, clamped = find_j_star(b, 1, 2)
    assert clamped
    # mass concentrated far from the anchor: threshold never reached inside the window
    b = counts([0, 0, 0, 0, 0, 0, 0, 0, 0, 1000, 0])
    j, clamped = find_j_star(b, 3, 4, threshold_mult=1.0)
    assert clamped and j == 7


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=3, max_size=40), st.data())
def test_j_star_is_smallest(N, data):
    N = np.array(N)
    if N.sum() < 3:
        return
    b = counts(N)
    l = data.draw(st.integers(1, N.size))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        j, _ = find_j_star(b, l, l + 1)
    target = 1 / math.log(b.n)
    share = lambda jj: N[max(l - jj, 1) - 1 : min(l + jj, N.size)].sum() / b.n
    assert j >= 1
    if share(j) >= target:
        assert all(share(jj) < target for jj in range(1, j))



def test_g_x0_examples():
    g = GridSpec(0.0, 1.0, 1 / 21)
    N = np.full(21, 100)
    b = BinnedCounts(g, N, np.zeros(21, int))
    # window N_{l-j+1..r+j} has r - l + 2j = 5 bins over width (r - l + 2j) * delta
    assert estimate_g_x0(b, 11, 12, 2) == pytest.approx(1.0, rel=1e-12)
    b2 = BinnedCounts(g, 2 * N, np.zeros(21, int))
    assert estimate_g_x0(b2, 11, 12, 2) == estimate_g_x0(b, 11, 12, 2)


def test_g_x0_quarter_window():
    # K = 21 over [0, 1]: a window carrying a quarter of the sample over width 0.25
    g = GridSpec(0.0, 1.0, 0.05)
    N = np.zeros(20, int)
    N[8:13] = 50  # t_9 .. t_13, the bins l-j+1 .. r+j for l=10, r=11, j=2
    N[0] = 1000 - N.sum()
    b = BinnedCounts(g, N, np.zeros(20, int))
    assert estimate_g_x0(b, 10, 11, 2) == pytest.approx(1.0, rel=1e-12)


def test_g_x0_clamped_at_edges():
    b = counts([10, 10, 10])
    assert estimate_g_x0(b, 1, 2, 5) == pytest.approx(30 / (30 * 0.3))


def test_i_star_examples():
    assert find_i_star(step(np.linspace(0.1, 0.9, 11)), 6, 1) == 2
    with pytest.raises(NuisanceError, match="flat estimate"):
        find_i_star(step(np.full(11, 0.5)), 6, 1)
    levels = np.array([0.1, 0.2, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.7, 0.8])
    assert find_i_star(step(levels), 6, 1) == 4


def test_f_x0_fixture():
    g = GridSpec(0.3, 0.6, 0.1)  # t = 0.4, 0.5, 0.6
    est = StepEstimate(g, np.array([0.35, 0.5, 0.62]))
    b = BinnedCounts(g, np.array([10, 20, 10]), np.zeros(3, int))
    assert estimate_f_x0(est, b, 2, 1) == pytest.approx(1.35, rel=1e-12)


def test_f_x0_linear_and_unweighted():
    g = GridSpec(0.0, 1.0, 0.1)
    est = StepEstimate(g, 0.2 + 0.5 * g.points)
    b = BinnedCounts(g, np.arange(1, 11), np.zeros(10, int))
    assert estimate_f_x0(est, b, 5, 3) == pytest.approx(0.5, rel=1e-12)
    rng = np.random.default_rng(0)
    est = StepEstimate(g, np.sort(rng.random(10)))
    b = BinnedCounts(g, np.full(10, 7), np.zeros(10, int))
    t, F = g.points[1:8], est.levels[1:8]
    assert estimate_f_x0(est, b, 5, 3) == pytest.approx(np.polyfit(t, F, 1)[0], rel=1e-10)


def test_f_x0_singular():
    g = GridSpec(0.0, 0.5, 0.1)
    est = StepEstimate(g, np.linspace(0.1, 0.9, 5))
    with pytest.raises(NuisanceError, match="singular"):
        estimate_f_x0(est, BinnedCounts(g, np.array([0, 0, 9, 0, 0]), np.zeros(5, int)), 3, 2)


def test_assemble():
    e = assemble(0.5, 1.0, 1.0)
    assert e.alpha_hat == 0.5 and e.beta_hat == 0.5
    # F, G uniform on [0, 2] at x0 = 1: the formula gives sqrt(2)/2, not sqrt(2)/4
    e = assemble(0.5, 0.5, 0.5)
    assert e.alpha_hat == pytest.approx(math.sqrt(2) / 2) and e.beta_hat == 0.25
    assert assemble(0.5, 2.0, 0.5).alpha_hat == pytest.approx(math.sqrt(2) / 4)
    for F in (0.0, 1.0):
        with pytest.raises(NuisanceError, match="degenerate alpha"):
            assemble(F, 1.0, 1.0)


def test_full_chain_on_exact_counts():
    g = GridSpec(0.0, 1.0, 0.05)
    N = np.full(20, 100)
    Z = np.round(N * g.points).astype(int)  # exactly 5 i
    b = BinnedCounts(g, N, Z)
    est = npmle(b)
    l, r, rho = locate_anchor(g, 0.5)
    e = estimate_nuisance(est, b, l, r, rho)
    assert e.g_hat == pytest.approx(1.0)
    assert e.f_hat == pytest.approx(1.0, rel=1e-12)
    assert e.alpha_hat == pytest.approx(math.sqrt(e.F_hat * (1 - e.F_hat) / e.g_hat))
    assert e.beta_hat == e.f_hat / 2
    assert e.j_star >= 1 and e.i_star > e.j_star
    assert isinstance(e.clamped, bool)


@pytest.mark.slow
def test_consistency_at_scale():
    spec = ScenarioSpec(gamma0=1 / 3, c0=0.5, n=100_000)
    grid = build_grid(spec)
    l, r, rho = locate_anchor(grid, spec.x0)
    out = []
    for rep in range(200):
        gen = np.random.default_rng([17, rep])
        b = bin_observations(generate_dataset(spec, gen, grid), grid)
        e = estimate_nuisance(npmle(b), b, l, r, rho)
        out.append((e.F_hat, e.g_hat, e.f_hat))
    med = np.median(np.array(out), axis=0)
    np.testing.assert_allclose(med, [0.5, 1.0, 1.0], rtol=0.10)
