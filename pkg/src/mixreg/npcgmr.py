"""Nonparametric contaminated Gaussian mixture of regressions.

Mixing proportions, regression functions and variances are smooth curves of
the covariate, estimated at the points of a ``LocalGrid`` by kernel-weighted
(local-constant) updates. The contamination scalars alpha_k and eta_k are
global. Two fitting routines are provided:

* ``fit_npcgmr_backfit``: one-step backfitting EM. Curves are fitted with
  (alpha, eta) frozen at their CGMLR starting values, then the scalars are
  refitted with the curves frozen.
* ``fit_npcgmr_ecm``: modified ECM that updates curves and alpha in one
  conditional step and eta in a second.

Both use a single global E-step per iteration so component labels cannot
switch between local points.
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
    NpcgmrParams,
    Posterior,
    e_step,
    good_point_weights,
    max_rel_change,
    update_alpha,
    update_eta,
)
from .kernel import KernelSpec, LocalGrid, default_grid_size, make_grid, weight_matrix
from .selection import finalize_report

_EMPTY = 1e-8
_TINY = 1e-300


def estep_global(data: Dataset, params, contaminated: bool = True) -> Posterior:
    """Responsibilities and good-point probabilities, independent of the local points."""
    return e_step(data, params, contaminated)[0]


def mstep_local(data: Dataset, post: Posterior, eta, grid: LocalGrid, kern: KernelSpec,
                var_floor: float = 0.0, W=None):
    """Kernel-weighted closed-form updates of the pi, m and sigma^2 curves.

    ``eta`` is held fixed. ``W`` may carry a precomputed ``(n, G)`` weight
    matrix. Where a local denominator vanishes the update at that point
    falls back to unweighted (global) sums.
    """
    x, y = data.x, data.y
    if W is None:
        W, _ = weight_matrix(kern, x, grid)
    gamma = post.gamma
    K = gamma.shape[1]
    w = good_point_weights(post, eta)

    pi = (gamma.T @ W) / W.sum(axis=0)[None, :]
    pi = np.clip(pi, 0.0, 1.0)
    pi /= pi.sum(axis=0, keepdims=True)

    sw = w.T @ W
    swy = (w * y[:, None]).T @ W
    bad = sw <= _TINY
    if np.any(bad):
        glob = (w * y[:, None]).sum(axis=0) / np.maximum(w.sum(axis=0), _TINY)
        sw = np.where(bad, 1.0, sw)
        swy = np.where(bad, glob[:, None], swy)
    m = swy / sw

    var = np.empty_like(m)
    sg = gamma.T @ W
    for k in range(K):
        r2 = np.square(y[:, None] - m[k][None, :])
        num = w[:, k] @ (W * r2)
        den = sg[k]
        lost = den <= _TINY
        if np.any(lost):
            num = np.where(lost, w[:, k] @ r2, num)
            den = np.where(lost, max(gamma[:, k].sum(), _TINY), den)
        var[k] = num / den
    var = np.maximum(var, var_floor)
    return pi, m, var


def mstep_scalars(data: Dataset, post: Posterior, m_at_x, var_at_x, alpha_min: float = 0.5):
    """Closed-form alpha_k and eta_k given curve values at the sample sites."""
    return update_alpha(post, alpha_min), update_eta(post, data.y, m_at_x, var_at_x)


def params_from_linear(init: CgmlrParams, grid: LocalGrid) -> NpcgmrParams:
    """Embed a linear fit on the grid: lines for m, constant pi and sigma^2."""
    u = grid.points
    K, G = init.K, len(grid)
    m = init.beta[:, [0]] + init.beta[:, [1]] * u[None, :]
    pi = np.repeat(init.pi[:, None], G, axis=1)
    pi /= pi.sum(axis=0, keepdims=True)
    var = np.repeat(init.var[:, None], G, axis=1)
    return NpcgmrParams(grid, pi, m, var, init.alpha, init.eta)


def _setup(data, K, kern, grid, config, init, contaminated):
    if data.n <= 5 * K:
        raise ValueError(f"need n > 5K observations (n={data.n}, K={K})")
    if grid is None:
        grid = make_grid(data, default_grid_size(data.n))
    if init is None:
        init = fit_cgmlr(data, K, config, contaminated=contaminated).params
    W, widened = weight_matrix(kern, data.x, grid)
    return grid, init, W, widened


def _check_nonempty(post):
    nk = post.gamma.sum(axis=0)
    if np.any(nk < _EMPTY):
        raise FitError(f"empty component (sum of responsibilities {nk.min():.3g})")


def _curve_state(p: NpcgmrParams):
    return (p.pi_curves, p.m_curves, p.var_curves, p.alpha, p.eta)


def run_np_ecm(data, params: NpcgmrParams, W, config: FitConfig, *, contaminated=True,
               update_scalars=True, callback=None):
    """Iterate global E-step + CM-step 1 (curves, alpha) + CM-step 2 (eta).

    With ``update_scalars=False`` alpha and eta stay at their starting values
    and the loop reduces to the curve-only EM. Returns (params, trace,
    iterations, converged).
    """
    grid = params.grid
    var_floor = data.var_floor(config.var_floor_rel)
    trace, converged, it = [], False, 0
    for it in range(1, config.max_iter + 1):
        post, ll = e_step(data, params, contaminated)
        trace.append(ll)
        if callback is not None:
            callback(it, params, post)
        _check_nonempty(post)
        pi_c, m_c, var_c = mstep_local(data, post, params.eta, grid, None, var_floor, W)
        alpha, eta = params.alpha, params.eta
        if contaminated and update_scalars:
            alpha = update_alpha(post, config.alpha_min)
            staged = NpcgmrParams(grid, pi_c, m_c, var_c, alpha, eta)
            _, m_x, var_x = staged.at(data.x)
            eta = update_eta(post, data.y, m_x, var_x)
        new = NpcgmrParams(grid, pi_c, m_c, var_c, alpha, eta)
        delta = max_rel_change(_curve_state(params), _curve_state(new))
        params = new
        if delta < config.tol:
            converged = True
            break
    return params, trace, it, converged


def _run_scalar_em(data, params: NpcgmrParams, config: FitConfig, callback=None):
    """Step 2 of the backfitting fit: EM over (alpha, eta) with curves frozen."""
    _, m_x, var_x = params.at(data.x)
    trace, converged, it = [], False, 0
    for it in range(1, config.max_iter + 1):
        post, ll = e_step(data, params)
        trace.append(ll)
        if callback is not None:
            callback(it, params, post)
        _check_nonempty(post)
        alpha, eta = mstep_scalars(data, post, m_x, var_x, config.alpha_min)
        new = NpcgmrParams(params.grid, params.pi_curves, params.m_curves, params.var_curves,
                           alpha, eta)
        delta = max_rel_change((params.alpha, params.eta), (alpha, eta))
        params = new
        if delta < config.tol:
            converged = True
            break
    return params, trace, it, converged


def _finish(data, params, kern, model, trace, n_iter, converged, widened, contaminated=True):
    post, ll = e_step(data, params, contaminated)
    trace.append(ll)
    report = FitReport(model=model, K=params.K, n_iter=n_iter, converged=converged,
                       loglik=ll, loglik_trace=trace)
    if widened:
        report.warnings.append(f"kernel widened at {widened} grid points with no local data")
    finalize_report(report, data, params, post, kern)
    return FitResult(params, post, report)


def fit_npcgmr_backfit(data: Dataset, K: int, kern: KernelSpec, grid: LocalGrid | None = None,
                       config: FitConfig = FitConfig(), init: CgmlrParams | None = None,
                       callback=None) -> FitResult:
    """One-step backfitting EM (``config.backfit_loops`` > 1 repeats the two steps)."""
    grid, init, W, widened = _setup(data, K, kern, grid, config, init, True)
    params = params_from_linear(init, grid)
    trace, n_iter, converged = [], 0, True
    for _ in range(config.backfit_loops):
        params, t1, i1, c1 = run_np_ecm(data, params, W, config, update_scalars=False,
                                        callback=callback)
        params, t2, i2, c2 = _run_scalar_em(data, params, config, callback=callback)
        trace += t1 + t2
        n_iter += i1 + i2
        converged = c1 and c2
    return _finish(data, params, kern, "npcgmr-em", trace, n_iter, converged, widened)


def fit_npcgmr_ecm(data: Dataset, K: int, kern: KernelSpec, grid: LocalGrid | None = None,
                   config: FitConfig = FitConfig(), init: CgmlrParams | None = None,
                   freeze_scalars: bool = False, callback=None) -> FitResult:
    """Modified ECM fit.

    ``freeze_scalars`` keeps alpha and eta at their starting values; started
    from alpha = eta = 1 this runs the contaminated code path in its Gaussian
    limit.
    """
    grid, init, W, widened = _setup(data, K, kern, grid, config, init, True)
    params = params_from_linear(init, grid)
    params, trace, n_iter, converged = run_np_ecm(
        data, params, W, config, update_scalars=not freeze_scalars, callback=callback)
    return _finish(data, params, kern, "npcgmr-ecm", trace, n_iter, converged, widened)
