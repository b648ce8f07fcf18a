import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import line_oracle, oracle_posterior, twenty_points
from mixreg.cgmlr import fit_cgmlr, init_random, weighted_line
from mixreg.core import ALPHA_MAX, Dataset, FitConfig, good_point_weights


def two_lines(seed, n=120, contaminate=True):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, n)
    z = rng.integers(0, 2, n)
    y = np.where(z == 0, 1 + 2 * x, 4 - 3 * x) + rng.normal(0, 0.3, n)
    if contaminate:
        bad = rng.uniform(size=n) < 0.1
        y[bad] += rng.normal(0, 2.0, bad.sum())
    return Dataset(x, y)


def test_single_line_recovered():
    # alpha > 0.9 is a sampling statement: a Gaussian sample with positive excess
    # kurtosis has its likelihood maximum inside the contaminated family
    alphas = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x = rng.uniform(0, 1, 200)
        y = 1 + 2 * x + rng.normal(0, 0.01, 200)
        res = fit_cgmlr(Dataset(x, y), 1)
        ols = np.polyfit(x, y, 1)[::-1]
        np.testing.assert_allclose(res.params.beta[0], [1, 2], atol=0.05)
        np.testing.assert_allclose(res.params.beta[0], ols, atol=0.05)
        alphas.append(res.params.alpha[0])
    assert np.mean(np.array(alphas) > 0.9) >= 0.7


def test_exact_line_hits_variance_floor():
    x = np.linspace(0, 1, 30)
    d = Dataset(x, 2 - x)
    res = fit_cgmlr(d, 1, FitConfig(n_starts=2))
    np.testing.assert_allclose(res.params.beta[0], [2, -1], atol=1e-12)
    assert res.params.var[0] == d.var_floor(1e-10)


def test_init_random_constants():
    d = two_lines(1)
    p = init_random(d, 3, np.random.default_rng(0))
    np.testing.assert_array_equal(p.pi, np.full(3, 1 / 3))
    np.testing.assert_array_equal(p.alpha, 0.95)
    np.testing.assert_array_equal(p.eta, 10.0)


def test_init_random_single_component_is_global_ls():
    d = two_lines(2)
    p = init_random(d, 1, np.random.default_rng(0))
    np.testing.assert_allclose(p.beta[0], np.polyfit(d.x, d.y, 1)[::-1], atol=1e-10)


def test_weighted_line_matches_oracle_on_twenty_points():
    d = twenty_points()
    post = oracle_posterior(d)
    eta, var = np.array([6.0, 9.0]), 0.4
    w = good_point_weights(post, eta)
    for k in range(2):
        closed = weighted_line(d.x, d.y, w[:, k])
        brute = line_oracle(d.x, d.y, post.gamma[:, k], post.lam[:, k], eta[k], var)
        np.testing.assert_allclose(closed, brute, atol=1e-4)


def test_weighted_line_without_spread():
    b = weighted_line(np.ones(5), np.arange(5.0), np.ones(5))
    np.testing.assert_array_equal(b, [2.0, 0.0])


@pytest.mark.parametrize("seed", range(5))
def test_loglik_trace_non_decreasing(seed):
    res = fit_cgmlr(two_lines(seed), 2, FitConfig(n_starts=1, seed=seed))
    assert np.min(np.diff(res.report.loglik_trace)) >= -1e-8


def test_scalar_bounds_after_fit():
    res = fit_cgmlr(two_lines(3), 2, FitConfig(seed=3))
    assert np.all(res.params.eta >= 1)
    assert np.all((res.params.alpha >= 0.5) & (res.params.alpha <= ALPHA_MAX))


def test_gaussian_mode_pins_scalars():
    res = fit_cgmlr(two_lines(4), 2, FitConfig(seed=4), contaminated=False)
    np.testing.assert_array_equal(res.params.alpha, 1.0)
    np.testing.assert_array_equal(res.params.eta, 1.0)
    np.testing.assert_array_equal(res.posterior.lam, 1.0)
    assert res.report.model == "gmlr"


def test_deterministic_given_seed():
    d = two_lines(5)
    a = fit_cgmlr(d, 2, FitConfig(seed=11))
    b = fit_cgmlr(d, 2, FitConfig(seed=11))
    np.testing.assert_array_equal(a.params.beta, b.params.beta)
    assert a.report.loglik == b.report.loglik


def test_best_start_has_highest_loglik():
    d = two_lines(6)
    cfg = FitConfig(seed=2, n_starts=6)
    best = fit_cgmlr(d, 2, cfg).report.loglik
    singles = []
    for child in np.random.SeedSequence(2).spawn(6):
        p0 = init_random(d, 2, np.random.default_rng(child), d.var_floor(cfg.var_floor_rel))
        singles.append(fit_cgmlr(d, 2, cfg, init=p0).report.loglik)
    assert best == max(singles)


def test_too_few_points():
    with pytest.raises(ValueError):
        fit_cgmlr(Dataset(np.arange(10.0), np.arange(10.0)), 2)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_recovers_well_separated_lines(seed):
    # oracle: ordinary least squares on each true component's points
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, 200)
    z = rng.integers(0, 2, 200)
    y = np.where(z == 0, 1 + 2 * x, 4 - 3 * x) + rng.normal(0, 0.3, 200)
    beta = fit_cgmlr(Dataset(x, y), 2, FitConfig(seed=seed)).params.beta
    ols = np.array([np.polyfit(x[z == k], y[z == k], 1)[::-1] for k in (0, 1)])
    order = np.argsort(beta[:, 1])[::-1]
    np.testing.assert_allclose(beta[order], ols, atol=0.15)
