"""Information criteria with effective degrees of freedom and a (K, h) grid search."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    CgmlrParams,
    Dataset,
    FitConfig,
    FitError,
    NpcgmrParams,
    Posterior,
    SpcgmrParams,
    component_logdens,
)
from .kernel import KernelSpec, kernel_functionals
from .posterior import flag_outliers, map_classify

MODEL_KINDS = ("cgmlr", "gmlr", "npgmr", "spgmr", "npcgmr-em", "npcgmr-ecm", "spcgmr")
NONPARAMETRIC = ("npgmr", "spgmr", "npcgmr-em", "npcgmr-ecm", "spcgmr")


class SelectionError(RuntimeError):
    pass


def edf(kern: KernelSpec, support_length: float) -> float:
    """Effective degrees of freedom of one kernel-smoothed curve over a support of given length."""
    if support_length <= 0:
        raise ValueError("support length must be positive")
    w0, int_w2, tau = kernel_functionals(kern)
    return tau * support_length / kern.h * (w0 - 0.5 * int_w2)


def model_df(model_kind: str, K: int, edf_value: float = 0.0) -> float:
    if K < 1:
        raise ValueError("K must be >= 1")
    if model_kind in ("npcgmr-em", "npcgmr-ecm", "npcgmr"):
        return (3 * K - 1) * edf_value + 2 * K
    if model_kind == "spcgmr":
        return K * edf_value + (4 * K - 1)
    # Gaussian baselines: the contaminated counts minus the 2K scalars (alpha_k, eta_k)
    if model_kind == "npgmr":
        return (3 * K - 1) * edf_value
    if model_kind == "spgmr":
        return K * edf_value + (2 * K - 1)
    # parametric: (K - 1) weights, 2K coefficients, K variances (+ 2K contamination scalars)
    if model_kind == "cgmlr":
        return 6 * K - 1
    if model_kind == "gmlr":
        return 4 * K - 1
    raise ValueError(f"unknown model kind {model_kind!r}")


def criteria(loglik: float, complete_loglik: float, df: float, n: int):
    """(AIC, BIC, ICL)."""
    if n < 1 or df <= 0:
        raise ValueError("need n >= 1 and df > 0")
    logn = math.log(n)
    return -2.0 * loglik + 2.0 * df, -2.0 * loglik + df * logn, -2.0 * complete_loglik + df * logn


def complete_loglik(data: Dataset, params, post: Posterior) -> float:
    """Classification log-likelihood with z and v hardened by MAP (v = 1 iff lam >= 0.5)."""
    log_pi, log_good, log_bad = component_logdens(params, data.x, data.y)
    rows = np.arange(data.n)
    k = map_classify(post) - 1
    good = post.lam[rows, k] >= 0.5
    term = np.where(good, log_good[rows, k], log_bad[rows, k])
    return float(np.sum(log_pi[rows, k] + term))


def finalize_report(report, data: Dataset, params, post: Posterior, kern: KernelSpec | None):
    """Fill labels, outlier flags, df and criteria of a fit report in place."""
    report.labels = map_classify(post)
    report.outliers = flag_outliers(post, report.labels)
    report.kernel = kern
    if kern is None:
        e = 0.0
    else:
        e = edf(kern, float(np.ptp(data.x)))
    report.df = model_df(report.model, report.K, e)
    report.complete_loglik = complete_loglik(data, params, post)
    report.aic, report.bic, report.icl = criteria(report.loglik, report.complete_loglik,
                                                  report.df, data.n)
    return report


@dataclass
class SelectionRow:
    K: int
    h: float
    loglik: float = float("nan")
    complete_loglik: float = float("nan")
    df: float = float("nan")
    aic: float = float("nan")
    bic: float = float("nan")
    icl: float = float("nan")
    failed: bool = False
    message: str = ""


@dataclass
class SelectionResult:
    model: str
    rows: list
    chosen: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["model", "K", "h", "loglik", "df", "aic", "bic", "icl",
                     "chosen_aic", "chosen_bic", "chosen_icl"])
        for r in self.rows:
            flags = [int(self.chosen.get(c) == (r.K, r.h)) for c in ("aic", "bic", "icl")]
            vals = [r.loglik, r.df, r.aic, r.bic, r.icl]
            wr.writerow([self.model, r.K, repr(float(r.h))]
                        + ["" if r.failed else repr(float(v)) for v in vals] + flags)
        return buf.getvalue()


def choose(rows, criterion: str):
    """Argmin of ``criterion`` over non-failed rows; ties to smaller K, then smaller h."""
    ok = [r for r in rows if not r.failed and np.isfinite(getattr(r, criterion))]
    if not ok:
        return None
    best = min(ok, key=lambda r: (getattr(r, criterion), r.K, r.h))
    return best.K, best.h


def search_kh(data: Dataset, model_kind: str, K_set, h_set, config: FitConfig = FitConfig(),
              kernel: str = "gaussian", grid_size: int | None = None) -> SelectionResult:
    """Fit every (K, h) pair and pick the minimiser of each criterion."""
    from .fitting import fit_model

    K_set, h_set = sorted(set(int(k) for k in K_set)), sorted(set(float(h) for h in h_set))
    if not K_set or not h_set:
        raise ValueError("K_set and h_set must be non-empty")
    if model_kind in ("cgmlr", "gmlr"):
        h_set = h_set[:1]  # bandwidth plays no role
    rows = []
    for K in K_set:
        for h in h_set:
            row = SelectionRow(K, h)
            try:
                res = fit_model(data, model_kind, K, KernelSpec(kernel, h), config,
                                grid_size=grid_size)
            except (FitError, ValueError) as exc:
                row.failed, row.message = True, str(exc)
            else:
                rep = res.report
                row.loglik, row.complete_loglik, row.df = rep.loglik, rep.complete_loglik, rep.df
                row.aic, row.bic, row.icl = rep.aic, rep.bic, rep.icl
            rows.append(row)
    result = SelectionResult(model_kind, rows)
    for c in ("aic", "bic", "icl"):
        result.chosen[c] = choose(rows, c)
    if all(v is None for v in result.chosen.values()):
        raise SelectionError("every candidate fit failed")
    return result
