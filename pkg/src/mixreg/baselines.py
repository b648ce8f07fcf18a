"""Gaussian-error baselines (NPGMRs and SPGMRs).

These run the contaminated fitting loops with contamination switched off:
the E-step uses plain Gaussian component densities, lambda is identically
one and alpha = eta = 1 throughout. Starting values come from an ordinary
Gaussian mixture of linear regressions.
"""
from __future__ import annotations

from .cgmlr import fit_cgmlr
from .core import CgmlrParams, Dataset, FitConfig, FitResult
from .kernel import KernelSpec, LocalGrid, default_grid_size, make_grid, weight_matrix
from .npcgmr import _finish, params_from_linear, run_np_ecm
from .spcgmr import fit_sp


def fit_npgmr(data: Dataset, K: int, kern: KernelSpec, grid: LocalGrid | None = None,
              config: FitConfig = FitConfig(), init: CgmlrParams | None = None,
              callback=None) -> FitResult:
    if data.n <= 5 * K:
        raise ValueError(f"need n > 5K observations (n={data.n}, K={K})")
    if grid is None:
        grid = make_grid(data, default_grid_size(data.n))
    if init is None:
        init = fit_cgmlr(data, K, config, contaminated=False).params
    W, widened = weight_matrix(kern, data.x, grid)
    params = params_from_linear(init, grid)
    params, trace, n_iter, converged = run_np_ecm(
        data, params, W, config, contaminated=False, update_scalars=False, callback=callback)
    return _finish(data, params, kern, "npgmr", trace, n_iter, converged, widened,
                   contaminated=False)


def fit_spgmr(data: Dataset, K: int, kern: KernelSpec, grid: LocalGrid | None = None,
              config: FitConfig = FitConfig(), init: CgmlrParams | None = None,
              callback=None) -> FitResult:
    return fit_sp(data, K, kern, grid, config, init, contaminated=False, update_scalars=False,
                  model="spgmr", callback=callback)
