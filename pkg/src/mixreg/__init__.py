"""Mixtures of regressions with contaminated Gaussian errors.

Nonparametric (curves for mixing proportions, means and variances) and
semiparametric (curves for means only) variants, their Gaussian baselines,
a linear initializer, posterior-based outlier flags, information criteria
and a simulation harness.
"""
from .core import (
    CgmlrParams,
    Dataset,
    DomainError,
    FitConfig,
    FitError,
    FitResult,
    NpcgmrParams,
    SpcgmrParams,
    cg_density,
    mixture_density,
)
from .fitting import fit_model
from .kernel import KernelSpec, LocalGrid, make_grid

__all__ = [
    "CgmlrParams", "Dataset", "DomainError", "FitConfig", "FitError", "FitResult",
    "NpcgmrParams", "SpcgmrParams", "cg_density", "mixture_density", "fit_model",
    "KernelSpec", "LocalGrid", "make_grid",
]
