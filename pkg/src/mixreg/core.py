"""Shared domain types and contaminated-Gaussian density primitives.

Densities are evaluated in log space; responsibilities go through
log-sum-exp so that residuals under an inflated variance never underflow.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import logsumexp

from .kernel import KernelSpec, LocalGrid, interpolate

LOG_2PI = float(np.log(2.0 * np.pi))
ALPHA_MAX = 1.0 - 1e-6


class DomainError(ValueError):
    """Invalid argument for a density or parameter object."""


class FitError(RuntimeError):
    """A fit could not be completed (all starts failed, empty component, ...)."""


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    true_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        x, y = _frozen(self.x), _frozen(self.y)
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size or x.size < 1:
            raise DomainError("x and y must be 1-d vectors of equal, non-zero length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("x and y must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.true_labels is not None:
            lab = _frozen(self.true_labels, dtype=int)
            if lab.shape != x.shape:
                raise DomainError("true_labels must have one entry per observation")
            # 0 marks injected noise points in the benchmark generators
            if np.any(lab < 0):
                raise DomainError("true_labels must be component indices >= 1 (0 = noise)")
            object.__setattr__(self, "true_labels", lab)

    @property
    def n(self) -> int:
        return self.x.size

    def var_floor(self, rel: float = 1e-10) -> float:
        v = float(np.var(self.y))
        return rel * v if v > 0 else rel


@dataclass(frozen=True)
class ComponentScalars:
    alpha: float
    eta: float


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by every fitting routine."""

    tol: float = 1e-6
    max_iter: int = 300
    alpha_min: float = 0.5
    var_floor_rel: float = 1e-10
    n_starts: int = 10
    init_tol: float = 1e-8
    init_max_iter: int = 500
    seed: int = 0
    # Algorithm 1 only: number of passes over (curves, scalars); capped at 5
    backfit_loops: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha_min < ALPHA_MAX:
            raise ValueError("alpha_min must lie in [0, 1)")
        if self.tol <= 0 or self.max_iter < 1 or self.n_starts < 1:
            raise ValueError("tol > 0, max_iter >= 1 and n_starts >= 1 required")
        if not 1 <= self.backfit_loops <= 5:
            raise ValueError("backfit_loops must be between 1 and 5")


class _ScalarsMixin:
    @property
    def K(self) -> int:
        return len(self.alpha)

    @property
    def scalars(self):
        return tuple(ComponentScalars(float(a), float(e)) for a, e in zip(self.alpha, self.eta))


def _check_scalars(alpha, eta, K):
    if alpha.shape != (K,) or eta.shape != (K,):
        raise DomainError("alpha and eta need one entry per component")
    if np.any(alpha <= 0) or np.any(alpha > 1) or np.any(eta < 1):
        raise DomainError("require 0 < alpha <= 1 and eta >= 1")


@dataclass(frozen=True, eq=False)
class NpcgmrParams(_ScalarsMixin):
    """Curves pi_k(u), m_k(u), sigma^2_k(u) on a grid plus scalar alpha_k, eta_k."""

    grid: LocalGrid
    pi_curves: np.ndarray
    m_curves: np.ndarray
    var_curves: np.ndarray
    alpha: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("pi_curves", "m_curves", "var_curves", "alpha", "eta"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        K, G = self.m_curves.shape[0], len(self.grid)
        for c in (self.pi_curves, self.m_curves, self.var_curves):
            if c.shape != (K, G):
                raise DomainError(f"curves must have shape ({K}, {G})")
        if np.any(self.pi_curves < 0) or np.any(self.pi_curves > 1):
            raise DomainError("pi curves must lie in [0, 1]")
        if np.max(np.abs(self.pi_curves.sum(axis=0) - 1.0)) > 1e-10:
            raise DomainError("pi curves must sum to 1 at every grid point")
        if np.any(self.var_curves <= 0):
            raise DomainError("variance curves must be positive")
        _check_scalars(self.alpha, self.eta, K)

    def at(self, x):
        """(pi, m, var) evaluated at ``x``, each of shape (n, K)."""
        pi = interpolate(self.grid, self.pi_curves, x).T
        pi = pi / pi.sum(axis=1, keepdims=True)
        m = interpolate(self.grid, self.m_curves, x).T
        var = interpolate(self.grid, self.var_curves, x).T
        return pi, m, var


@dataclass(frozen=True, eq=False)
class SpcgmrParams(_ScalarsMixin):
    pi: np.ndarray
    var: np.ndarray
    grid: LocalGrid
    m_curves: np.ndarray
    alpha: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("pi", "var", "m_curves", "alpha", "eta"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        K = self.pi.size
        if self.m_curves.shape != (K, len(self.grid)) or self.var.shape != (K,):
            raise DomainError("shape mismatch between pi, var and m curves")
        if abs(self.pi.sum() - 1.0) > 1e-10 or np.any(self.pi <= 0):
            raise DomainError("pi must be positive and sum to 1")
        if np.any(self.var <= 0):
            raise DomainError("variances must be positive")
        _check_scalars(self.alpha, self.eta, K)

    def at(self, x):
        n = np.size(x)
        m = interpolate(self.grid, self.m_curves, x).T
        return np.broadcast_to(self.pi, (n, self.K)), m, np.broadcast_to(self.var, (n, self.K))


@dataclass(frozen=True, eq=False)
class CgmlrParams(_ScalarsMixin):
    pi: np.ndarray
    beta: np.ndarray  # (K, 2): intercept, slope
    var: np.ndarray
    alpha: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("pi", "beta", "var", "alpha", "eta"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        K = self.pi.size
        if self.beta.shape != (K, 2) or self.var.shape != (K,):
            raise DomainError("beta must be (K, 2) and var (K,)")
        if abs(self.pi.sum() - 1.0) > 1e-10 or np.any(self.pi < 0):
            raise DomainError("pi must be non-negative and sum to 1")
        if np.any(self.var <= 0):
            raise DomainError("variances must be positive")
        _check_scalars(self.alpha, self.eta, K)

    def at(self, x):
        x = np.asarray(x, dtype=float)
        n = x.size
        m = self.beta[:, 0][None, :] + np.outer(x, self.beta[:, 1])
        return np.broadcast_to(self.pi, (n, self.K)), m, np.broadcast_to(self.var, (n, self.K))


@dataclass(frozen=True, eq=False)
class Posterior:
    """Responsibilities ``gamma`` and good-point probabilities ``lam``, both (n, K).

    The arrays are indexed by observation and component only; the same
    posterior is shared by every local point.
    """

    gamma: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        g, l = _frozen(self.gamma), _frozen(self.lam)
        if g.ndim != 2 or g.shape != l.shape:
            raise DomainError("gamma and lambda must be matching (n, K) arrays")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "lam", l)

    @property
    def n(self):
        return self.gamma.shape[0]

    @property
    def K(self):
        return self.gamma.shape[1]


@dataclass
class FitReport:
    model: str
    K: int
    n_iter: int
    converged: bool
    loglik: float
    loglik_trace: list = field(default_factory=list)
    labels: Optional[np.ndarray] = None
    outliers: Optional[np.ndarray] = None
    complete_loglik: float = float("nan")
    df: float = float("nan")
    aic: float = float("nan")
    bic: float = float("nan")
    icl: float = float("nan")
    kernel: Optional[KernelSpec] = None
    warnings: list = field(default_factory=list)
    # filled by the benchmark harness: (iteration, invariant name) pairs
    violations: list = field(default_factory=list)


class FitResult(NamedTuple):
    params: object
    posterior: Posterior
    report: FitReport


# --------------------------------------------------------------------------
# densities


def log_normal(y, m, var):
    return -0.5 * (LOG_2PI + np.log(var) + np.square(y - m) / var)


def log_cg_parts(y, m, var, alpha, eta):
    """log of the good-point and bad-point terms of the contaminated density."""
    with np.errstate(divide="ignore"):
        log_good = np.log(alpha) + log_normal(y, m, var)
        log_bad = np.log1p(-alpha) + log_normal(y, m, eta * var)
    return log_good, log_bad


def log_cg_density(y, m, var, alpha, eta):
    return np.logaddexp(*log_cg_parts(y, m, var, alpha, eta))


def cg_density(y, m, var, alpha, eta):
    """``alpha N(y | m, var) + (1 - alpha) N(y | m, eta var)``."""
    vals = np.array([y, m, var, alpha, eta], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("non-finite argument")
    if var <= 0:
        raise DomainError("var must be positive")
    if eta < 1:
        raise DomainError("eta must be >= 1")
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    return float(np.exp(log_cg_density(y, m, var, alpha, eta)))


def component_logdens(params, x, y):
    """log pi_k(x_i) + log f_CG(y_i | x_i) and the good/bad split, all (n, K)."""
    pi, m, var = params.at(x)
    y = np.asarray(y, dtype=float)[:, None]
    log_good, log_bad = log_cg_parts(y, m, var, params.alpha[None, :], params.eta[None, :])
    with np.errstate(divide="ignore"):
        log_pi = np.log(pi)
    return log_pi, log_good, log_bad


def mixture_density(y, x, params, model_kind: Optional[str] = None):
    """Conditional mixture density ``p(y | x)`` for any of the parameter families.

    ``model_kind`` is accepted for symmetry with the fitting API; the family is
    read off the parameter object.
    """
    if not isinstance(params, (NpcgmrParams, SpcgmrParams, CgmlrParams)):
        raise DomainError(f"unsupported parameter object {type(params).__name__}")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    x_arr = np.broadcast_to(np.atleast_1d(np.asarray(x, dtype=float)), y_arr.shape)
    log_pi, log_good, log_bad = component_logdens(params, x_arr, y_arr)
    out = np.exp(logsumexp(log_pi + np.logaddexp(log_good, log_bad), axis=1))
    return float(out[0]) if np.ndim(y) == 0 else out


def e_step(data: Dataset, params, contaminated: bool = True):
    """Global E-step for any parameter family.

    Returns the posterior and the observed-data log-likelihood at ``params``.
    With ``contaminated=False`` the components are plain Gaussians and
    ``lam`` is identically one.
    """
    x, y = data.x, data.y
    with np.errstate(over="ignore", invalid="ignore"):
        return _e_step(x, y, params, contaminated)


def _e_step(x, y, params, contaminated):
    if contaminated:
        log_pi, log_good, log_bad = component_logdens(params, x, y)
        log_f = np.logaddexp(log_good, log_bad)
        lam = np.exp(log_good - log_f)
    else:
        pi, m, var = params.at(x)
        with np.errstate(divide="ignore"):
            log_pi = np.log(pi)
        log_f = log_normal(y[:, None], m, var)
        lam = np.ones_like(log_f)
    log_joint = log_pi + log_f
    log_p = logsumexp(log_joint, axis=1)
    if not np.all(np.isfinite(log_p)):
        raise FitError("mixture density vanished at some observation")
    gamma = np.exp(log_joint - log_p[:, None])
    gamma /= gamma.sum(axis=1, keepdims=True)
    np.clip(lam, 0.0, 1.0, out=lam)
    return Posterior(gamma, lam), float(np.sum(log_p))


def loglik(data: Dataset, params) -> float:
    """Observed-data log-likelihood ``sum_i log sum_k pi_k f_CG(y_i | x_i)``."""
    log_pi, log_good, log_bad = component_logdens(params, data.x, data.y)
    val = float(np.sum(logsumexp(log_pi + np.logaddexp(log_good, log_bad), axis=1)))
    if not np.isfinite(val):
        raise DomainError("log-likelihood is not finite")
    return val


def update_alpha(post: Posterior, alpha_min: float):
    """Proportion of good points, clamped to ``[alpha_min, 1 - 1e-6]``."""
    nk = post.gamma.sum(axis=0)
    alpha = (post.gamma * post.lam).sum(axis=0) / nk
    return np.clip(alpha, alpha_min, ALPHA_MAX)


def update_eta(post: Posterior, y, m_at_x, var_at_x):
    """Degree of contamination ``max(1, b_k / a_k)``; 1 when ``a_k`` vanishes."""
    bad = post.gamma * (1.0 - post.lam)
    a = bad.sum(axis=0)
    b = (bad * np.square(np.asarray(y)[:, None] - m_at_x) / var_at_x).sum(axis=0)
    eta = np.ones_like(a)
    ok = a >= 1e-10
    eta[ok] = np.maximum(1.0, b[ok] / a[ok])
    return eta


def good_point_weights(post: Posterior, eta):
    """``w_ik = gamma_ik (lam_ik + (1 - lam_ik) / eta_k)``."""
    return post.gamma * (post.lam + (1.0 - post.lam) / np.asarray(eta)[None, :])


def max_rel_change(old, new) -> float:
    """Largest ``|new - old| / (1 + |old|)`` over paired arrays."""
    out = 0.0
    for a, b in zip(old, new):
        a, b = np.asarray(a), np.asarray(b)
        out = max(out, float(np.max(np.abs(b - a) / (1.0 + np.abs(a)))))
    return out
