"""Semiparametric contaminated Gaussian mixture of nonparametric regressions.

Scalar pi_k, sigma^2_k, alpha_k, eta_k and kernel-smoothed regression
curves m_k, fitted by a modified ECM algorithm.
"""
from __future__ import annotations

import numpy as np

from .cgmlr import fit_cgmlr
from .core import (
    CgmlrParams,
    Dataset,
    FitConfig,
    FitError,
    FitReport,
    FitResult,
    SpcgmrParams,
    e_step,
    good_point_weights,
    loglik,
    max_rel_change,
    update_alpha,
    update_eta,
)
from .kernel import KernelSpec, LocalGrid, default_grid_size, interpolate, make_grid, weight_matrix
from .selection import finalize_report

_EMPTY = 1e-8
_TINY = 1e-300


def loglik_spcgmr(data: Dataset, params: SpcgmrParams) -> float:
    return loglik(data, params)


def local_means(y, w, W):
    """``m_k(u) = sum_i w_ik W_h(x_i - u) y_i / sum_i w_ik W_h(x_i - u)``, shape (K, G)."""
    sw = w.T @ W
    swy = (w * y[:, None]).T @ W
    bad = sw <= _TINY
    if np.any(bad):
        glob = (w * y[:, None]).sum(axis=0) / np.maximum(w.sum(axis=0), _TINY)
        sw = np.where(bad, 1.0, sw)
        swy = np.where(bad, glob[:, None], swy)
    return swy / sw


def cm_step(data: Dataset, post, params: SpcgmrParams, W, config: FitConfig,
            var_floor: float, contaminated: bool = True, update_scalars: bool = True):
    """One pair of conditional maximisations given the E-step posterior."""
    y = data.y
    gamma = post.gamma
    nk = gamma.sum(axis=0)
    if np.any(nk < _EMPTY):
        raise FitError(f"empty component (sum of responsibilities {nk.min():.3g})")
    # CM-step 1: pi, alpha, m, sigma^2 with eta fixed
    pi = nk / data.n
    pi = pi / pi.sum()
    alpha = params.alpha
    if contaminated and update_scalars:
        alpha = update_alpha(post, config.alpha_min)
    w = good_point_weights(post, params.eta)
    m_curves = local_means(y, w, W)
    m_x = interpolate(params.grid, m_curves, data.x).T
    var = np.maximum((w * np.square(y[:, None] - m_x)).sum(axis=0) / nk, var_floor)
    # CM-step 2: eta with everything else fixed
    eta = params.eta
    if contaminated and update_scalars:
        eta = update_eta(post, y, m_x, var[None, :])
    return SpcgmrParams(pi, var, params.grid, m_curves, alpha, eta)


def _state(p: SpcgmrParams):
    return (p.pi, p.var, p.m_curves, p.alpha, p.eta)


def params_from_linear(init: CgmlrParams, grid: LocalGrid) -> SpcgmrParams:
    m = init.beta[:, [0]] + init.beta[:, [1]] * grid.points[None, :]
    pi = np.maximum(init.pi, 1e-12)
    return SpcgmrParams(pi / pi.sum(), init.var, grid, m, init.alpha, init.eta)


def run_sp_ecm(data: Dataset, params: SpcgmrParams, W, config: FitConfig, *,
               contaminated=True, update_scalars=True, callback=None):
    var_floor = data.var_floor(config.var_floor_rel)
    trace, converged, it = [], False, 0
    for it in range(1, config.max_iter + 1):
        post, ll = e_step(data, params, contaminated)
        trace.append(ll)
        if callback is not None:
            callback(it, params, post)
        new = cm_step(data, post, params, W, config, var_floor, contaminated, update_scalars)
        delta = max_rel_change(_state(params), _state(new))
        params = new
        if delta < config.tol:
            converged = True
            break
    return params, trace, it, converged


def fit_sp(data: Dataset, K: int, kern: KernelSpec, grid: LocalGrid | None, config: FitConfig,
           init: CgmlrParams | None, *, contaminated: bool, update_scalars: bool = True,
           model: str, callback=None) -> FitResult:
    if data.n <= 5 * K:
        raise ValueError(f"need n > 5K observations (n={data.n}, K={K})")
    if grid is None:
        grid = make_grid(data, default_grid_size(data.n))
    if init is None:
        init = fit_cgmlr(data, K, config, contaminated=contaminated).params
    W, widened = weight_matrix(kern, data.x, grid)
    params = params_from_linear(init, grid)
    params, trace, n_iter, converged = run_sp_ecm(
        data, params, W, config, contaminated=contaminated, update_scalars=update_scalars,
        callback=callback)
    post, ll = e_step(data, params, contaminated)
    trace.append(ll)
    report = FitReport(model=model, K=K, n_iter=n_iter, converged=converged, loglik=ll,
                       loglik_trace=trace)
    if widened:
        report.warnings.append(f"kernel widened at {widened} grid points with no local data")
    finalize_report(report, data, params, post, kern)
    return FitResult(params, post, report)


def fit_spcgmr(data: Dataset, K: int, kern: KernelSpec, grid: LocalGrid | None = None,
               config: FitConfig = FitConfig(), init: CgmlrParams | None = None,
               freeze_scalars: bool = False, callback=None) -> FitResult:
    """Modified ECM fit of the semiparametric contaminated model, started from a CGMLR fit."""
    return fit_sp(data, K, kern, grid, config, init, contaminated=True,
                  update_scalars=not freeze_scalars, model="spcgmr", callback=callback)
