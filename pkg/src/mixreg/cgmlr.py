"""Contaminated Gaussian mixture of linear regressions (CGMLRs).

Serves both as a standalone model and as the starting point for the
nonparametric and semiparametric fits. The ECM updates are the linear,
constant-variance specialisation of the semiparametric updates.
"""
from __future__ import annotations

import numpy as np

from .core import (
    CgmlrParams,
    Dataset,
    FitConfig,
    FitError,
    FitReport,
    FitResult,
    e_step,
    good_point_weights,
    update_alpha,
    update_eta,
)
from .selection import finalize_report

INIT_ALPHA = 0.95
INIT_ETA = 10.0
_EMPTY = 1e-8


def weighted_line(x, y, w):
    """Weighted least-squares (intercept, slope); slope 0 if x carries no spread."""
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    dx = x - xm
    sxx = (w * dx * dx).sum()
    if sxx <= 1e-12 * sw * max(1.0, xm * xm):
        return np.array([ym, 0.0])
    slope = (w * dx * (y - ym)).sum() / sxx
    return np.array([ym - slope * xm, slope])


def init_random(data: Dataset, K: int, rng=None, var_floor: float = 0.0,
                contaminated: bool = True, shuffle_frac: float | None = None) -> CgmlrParams:
    """Starting values from K contiguous y-quantile slabs.

    Each slab gets its own least-squares line. ``rng`` reassigns a fraction
    ``shuffle_frac`` of the observations to random slabs before fitting; by
    default the fraction itself is drawn from U(0, 0.5) so that repeated
    starts differ in how far they move from the plain slabs.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    x, y = data.x, data.y
    n = data.n
    order = np.argsort(y, kind="stable")
    slab = np.empty(n, dtype=int)
    slab[order] = np.minimum((np.arange(n) * K) // n, K - 1)
    if rng is not None and K > 1:
        if shuffle_frac is None:
            shuffle_frac = rng.uniform(0.0, 0.5)
        moved = rng.random(n) < shuffle_frac
        slab[moved] = rng.integers(0, K, size=int(moved.sum()))

    beta = np.zeros((K, 2))
    var = np.empty(K)
    for k in range(K):
        idx = slab == k
        if idx.sum() < 2:
            idx = np.ones(n, dtype=bool)
        w = idx.astype(float)
        beta[k] = weighted_line(x, y, w)
        resid = y[idx] - (beta[k, 0] + beta[k, 1] * x[idx])
        var[k] = max(float(np.mean(resid ** 2)), var_floor)
    alpha = np.full(K, INIT_ALPHA if contaminated else 1.0)
    eta = np.full(K, INIT_ETA if contaminated else 1.0)
    return CgmlrParams(np.full(K, 1.0 / K), beta, var, alpha, eta)


def _run(data, params, config, contaminated, var_floor):
    """One ECM run from ``params``; returns (params, loglik trace, iterations, converged)."""
    x, y = data.x, data.y
    n, K = data.n, params.K
    trace = []
    converged = False
    it = 0
    for it in range(1, config.init_max_iter + 1):
        post, ll = e_step(data, params, contaminated)
        if trace and abs(ll - trace[-1]) <= config.init_tol * abs(trace[-1]):
            trace.append(ll)
            converged = True
            break
        trace.append(ll)
        nk = post.gamma.sum(axis=0)
        if np.any(nk < _EMPTY):
            raise FitError("empty component")

        # CM-step 1: pi, alpha, beta, sigma^2 with eta held fixed
        pi = nk / n
        alpha = update_alpha(post, config.alpha_min) if contaminated else params.alpha
        w = good_point_weights(post, params.eta)
        beta = np.stack([weighted_line(x, y, w[:, k]) for k in range(K)])
        m = beta[:, 0][None, :] + np.outer(x, beta[:, 1])
        var = np.maximum((w * np.square(y[:, None] - m)).sum(axis=0) / nk, var_floor)
        # CM-step 2: eta with the rest fixed
        eta = update_eta(post, y, m, var[None, :]) if contaminated else params.eta
        params = CgmlrParams(pi / pi.sum(), beta, var, alpha, eta)
    else:
        trace.append(e_step(data, params, contaminated)[1])
    return params, trace, it, converged


def fit_cgmlr(data: Dataset, K: int, config: FitConfig = FitConfig(),
              contaminated: bool = True, init: CgmlrParams | None = None) -> FitResult:
    """Best of ``config.n_starts`` randomly initialised ECM runs.

    With ``contaminated=False`` this is the ordinary Gaussian mixture of
    linear regressions (alpha and eta pinned to 1). An explicit ``init``
    replaces the random starts by a single run.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if data.n <= 5 * K:
        raise ValueError(f"need n > 5K observations (n={data.n}, K={K})")
    var_floor = data.var_floor(config.var_floor_rel)
    if init is not None:
        starts = [init]
    else:
        seeds = np.random.SeedSequence(config.seed).spawn(config.n_starts)
        starts = [init_random(data, K, np.random.default_rng(s), var_floor, contaminated)
                  for s in seeds]

    best = None
    failures = 0
    for p0 in starts:
        try:
            run = _run(data, p0, config, contaminated, var_floor)
        except FitError:
            failures += 1
            continue
        # strict '>' keeps the lowest run index on ties
        if best is None or run[1][-1] > best[1][-1]:
            best = run
    if best is None:
        raise FitError(f"all {len(starts)} CGMLR starts failed (empty component)")

    params, trace, n_iter, converged = best
    post, ll = e_step(data, params, contaminated)
    report = FitReport(model="cgmlr" if contaminated else "gmlr", K=K, n_iter=n_iter,
                       converged=converged, loglik=ll, loglik_trace=trace)
    if failures:
        report.warnings.append(f"{failures} of {len(starts)} starts failed")
    finalize_report(report, data, params, post, kern=None)
    return FitResult(params, post, report)
