"""MAP clustering and outlier flags from a fitted posterior."""
from __future__ import annotations

import numpy as np

from .core import Posterior


def map_classify(post: Posterior) -> np.ndarray:
    """1-based component labels ``argmax_k gamma_ik``; ties go to the lowest k."""
    return np.argmax(post.gamma, axis=1) + 1


def flag_outliers(post: Posterior, labels=None, threshold: float = 0.5) -> np.ndarray:
    """True where the good-point probability in the assigned component is below ``threshold``.

    The comparison is strict, so ``lam == threshold`` is not an outlier.
    """
    if labels is None:
        labels = map_classify(post)
    labels = np.asarray(labels, dtype=int)
    lam_at = post.lam[np.arange(post.n), labels - 1]
    return lam_at < threshold


def lambda_at_label(post: Posterior, labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    return post.lam[np.arange(post.n), labels - 1]


def audit(params, post: Posterior, var_floor: float, tol: float = 1e-10) -> list[str]:
    """Names of the structural invariants violated by one EM state (empty if none).

    Checks gamma row sums, lambda in [0, 1], eta >= 1, mixing weights summing
    to one (at every grid node for curve models) and variances above the floor.
    """
    bad = []
    if np.max(np.abs(post.gamma.sum(axis=1) - 1.0)) > tol:
        bad.append("gamma_rowsum")
    if np.any(post.lam < 0) or np.any(post.lam > 1):
        bad.append("lambda_range")
    if np.any(np.asarray(params.eta) < 1):
        bad.append("eta_below_one")
    pi = params.pi_curves if hasattr(params, "pi_curves") else np.asarray(params.pi)[:, None]
    if np.max(np.abs(np.sum(pi, axis=0) - 1.0)) > tol:
        bad.append("pi_sum")
    var = params.var_curves if hasattr(params, "var_curves") else params.var
    if np.any(np.asarray(var) < var_floor):
        bad.append("var_floor")
    return bad
