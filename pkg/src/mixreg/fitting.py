"""Single entry point dispatching on the model kind."""
from __future__ import annotations

from .baselines import fit_npgmr, fit_spgmr
from .cgmlr import fit_cgmlr
from .core import CgmlrParams, Dataset, FitConfig, FitResult
from .kernel import KernelSpec, default_grid_size, make_grid
from .npcgmr import fit_npcgmr_backfit, fit_npcgmr_ecm
from .spcgmr import fit_spcgmr

FITTERS = {
    "npgmr": fit_npgmr,
    "spgmr": fit_spgmr,
    "npcgmr-em": fit_npcgmr_backfit,
    "npcgmr-ecm": fit_npcgmr_ecm,
    "spcgmr": fit_spcgmr,
}
CONTAMINATED = {"cgmlr", "npcgmr-em", "npcgmr-ecm", "spcgmr"}
CLI_MODELS = ("cgmlr", "npgmr", "spgmr", "npcgmr-em", "npcgmr-ecm", "spcgmr")


def fit_model(data: Dataset, kind: str, K: int, kern: KernelSpec | None = None,
              config: FitConfig = FitConfig(), grid_size: int | None = None,
              init: CgmlrParams | None = None, callback=None) -> FitResult:
    """Fit any supported model. ``callback(it, params, post)`` is forwarded to the
    kernel-based fitters and ignored for the linear ones."""
    if kind == "cgmlr":
        return fit_cgmlr(data, K, config, contaminated=True, init=init)
    if kind == "gmlr":
        return fit_cgmlr(data, K, config, contaminated=False, init=init)
    if kind not in FITTERS:
        raise ValueError(f"unknown model kind {kind!r}")
    kern = kern or KernelSpec()
    grid = make_grid(data, grid_size or default_grid_size(data.n))
    return FITTERS[kind](data, K, kern, grid, config, init=init, callback=callback)
