import numpy as np
import pytest

from oracles import (
    alpha_oracle,
    eta_oracle,
    local_m_oracle,
    oracle_posterior,
    scalar_pi_oracle,
    scalar_var_oracle,
    twenty_points,
)
from mixreg.cgmlr import fit_cgmlr
from mixreg.core import Dataset, FitConfig, Posterior, SpcgmrParams, cg_density, e_step
from mixreg.kernel import KernelSpec, LocalGrid, make_grid, weight_matrix
from mixreg.simbench import ScenarioSpec, generate
from mixreg.spcgmr import cm_step, fit_spcgmr, local_means, loglik_spcgmr, params_from_linear

KERN = KernelSpec("gaussian", 0.2)
U3 = LocalGrid([0.2, 0.5, 0.8])
ETA = np.array([6.0, 9.0])


@pytest.fixture(scope="module")
def step():
    d = twenty_points()
    post = oracle_posterior(d)
    start = SpcgmrParams([0.5, 0.5], [0.3, 0.5], U3, [[0.8, 0.4, 0.0], [2.6, 2.0, 1.4]],
                         [0.8, 0.7], ETA)
    W, _ = weight_matrix(KERN, d.x, U3)
    new = cm_step(d, post, start, W, FitConfig(alpha_min=0.0), 0.0)
    return d, post, W, new


def test_pi_matches_oracle(step):
    d, post, _, new = step
    assert new.pi[0] == pytest.approx(scalar_pi_oracle(post.gamma), abs=1e-4)


def test_pi_hand_arithmetic():
    n = 250
    gamma = np.zeros((n, 2))
    gamma[:100, 0] = 1
    gamma[100:, 1] = 1
    d = Dataset(np.linspace(0, 1, n), np.zeros(n))
    grid = make_grid(d, 5)
    p = SpcgmrParams([0.5, 0.5], [1, 1], grid, np.zeros((2, 5)), [0.9, 0.9], [2, 2])
    W, _ = weight_matrix(KERN, d.x, grid)
    new = cm_step(d, Posterior(gamma, np.ones((n, 2))), p, W, FitConfig(), 1e-12)
    np.testing.assert_allclose(new.pi, [0.4, 0.6], rtol=1e-14)


def test_local_m_matches_oracle(step):
    d, post, W, new = step
    for g in range(3):
        for k in range(2):
            brute = local_m_oracle(d.y, W[:, g], post.gamma[:, k], post.lam[:, k], ETA[k],
                                   new.var[k])
            assert new.m_curves[k, g] == pytest.approx(brute, abs=1e-4)


def test_var_matches_oracle(step):
    d, post, _, new = step
    m_x = new.at(d.x)[1]
    for k in range(2):
        brute = scalar_var_oracle(d.y, post.gamma[:, k], post.lam[:, k], ETA[k], m_x[:, k])
        assert new.var[k] == pytest.approx(brute, abs=1e-4)


def test_scalars_match_oracle(step):
    d, post, _, new = step
    _, m_x, var_x = new.at(d.x)
    for k in range(2):
        assert new.alpha[k] == pytest.approx(alpha_oracle(post.gamma[:, k], post.lam[:, k]),
                                             abs=1e-4)
        assert new.eta[k] == pytest.approx(
            eta_oracle(d.y, post.gamma[:, k], post.lam[:, k], m_x[:, k], var_x[:, k]), abs=1e-4)


def test_local_means_weights():
    y = np.array([1.0, 3.0])
    w = np.array([[1.0], [3.0]])
    W = np.array([[1.0, 0.5], [1.0, 0.5]])
    np.testing.assert_allclose(local_means(y, w, W), [[2.5, 2.5]])


def test_loglik_single_point():
    d = Dataset([0.3], [1.7])
    p = SpcgmrParams([1.0], [0.6], LocalGrid([0.0, 1.0]), [[1.0, 2.0]], [0.85], [7.0])
    assert loglik_spcgmr(d, p) == pytest.approx(np.log(cg_density(1.7, 1.3, 0.6, 0.85, 7.0)),
                                                abs=1e-14)


def test_loglik_additive():
    d = twenty_points()
    p = params_from_linear(fit_cgmlr(d, 2, FitConfig(n_starts=2)).params, make_grid(d, 6))
    dd = Dataset(np.concatenate([d.x, d.x]), np.concatenate([d.y, d.y]))
    assert loglik_spcgmr(dd, p) == pytest.approx(2 * loglik_spcgmr(d, p), rel=1e-14)


def test_loglik_three_point_oracle():
    grid = LocalGrid([0.0, 1.0])
    p = SpcgmrParams([0.3, 0.7], [0.5, 2.0], grid, [[0, 1], [3, 1]], [0.9, 0.6], [4.0, 25.0])
    x = np.array([0.0, 0.25, 1.0])
    y = np.array([0.2, 2.5, -1.0])
    m = np.array([[0.0, 3.0], [0.25, 2.5], [1.0, 1.0]])
    expected = sum(
        np.log(sum(p.pi[k] * cg_density(y[i], m[i, k], p.var[k], p.alpha[k], p.eta[k])
                   for k in range(2)))
        for i in range(3))
    assert loglik_spcgmr(Dataset(x, y), p) == pytest.approx(expected, abs=1e-12)


def test_iteration_invariants():
    d, _ = generate(ScenarioSpec("d", 250, 3))
    floor = d.var_floor()
    bad = []

    def cb(it, params, post):
        if abs(params.pi.sum() - 1) > 1e-10 or np.any(params.var < floor) or np.any(params.eta < 1):
            bad.append(it)
        if np.max(np.abs(post.gamma.sum(1) - 1)) > 1e-10 or np.any((post.lam < 0) | (post.lam > 1)):
            bad.append(it)
    res = fit_spcgmr(d, 2, KernelSpec("gaussian", 0.06), config=FitConfig(seed=3), callback=cb)
    assert bad == []
    assert res.report.converged


def test_outliers_detected_in_scenario_d():
    d, _ = generate(ScenarioSpec("d", 250, 0))
    res = fit_spcgmr(d, 2, KernelSpec("gaussian", 0.06), config=FitConfig(seed=0))
    injected = d.true_labels == 0
    assert np.mean(res.report.outliers[injected]) >= 0.8


def test_report_fields():
    d, _ = generate(ScenarioSpec("a", 200, 1))
    res = fit_spcgmr(d, 2, KernelSpec("gaussian", 0.1), config=FitConfig(seed=1))
    rep = res.report
    assert rep.model == "spcgmr" and rep.K == 2
    assert rep.loglik == rep.loglik_trace[-1]
    assert rep.loglik == pytest.approx(e_step(d, res.params)[1])
    assert set(np.unique(rep.labels)) <= {1, 2}
