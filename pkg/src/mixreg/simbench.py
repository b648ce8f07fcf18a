"""Simulation scenarios, RASE metrics, label alignment and the replication harness."""
from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .cgmlr import fit_cgmlr
from .core import Dataset, FitConfig, FitError
from .fitting import CONTAMINATED, fit_model
from .kernel import KernelSpec
from .posterior import audit

SCENARIOS = ("exp1", "a", "b", "c", "d", "e")
METRICS = ("m", "pi", "var")
NOISE = 0  # true label of injected points in scenarios (d) and (e)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.kind!r}; expected one of {SCENARIOS}")
        if self.n < 10:
            raise ValueError("n must be >= 10")


def _exp1_pi(x):
    p1 = 0.1 + 0.8 * np.sin(np.pi * x)
    return np.column_stack([p1, 1.0 - p1])


def _m(x):
    return np.column_stack([np.cos(3 * np.pi * x), 3.0 - np.sin(2 * np.pi * x)])


def _exp1_var(x):
    return np.column_stack([(0.6 * np.exp(0.5 * x)) ** 2, (0.5 * np.exp(-0.2 * x)) ** 2])


def _half(x):
    return np.full((np.size(x), 2), 0.5)


def _unit(x):
    return np.ones((np.size(x), 2))


@dataclass(frozen=True)
class TruthParams:
    """Data-generating curves; each callable maps x to an (n, K) array."""

    kind: str
    pi: Callable
    m: Callable
    var: Callable
    alpha: tuple
    eta: tuple
    scalar_pi: bool
    scalar_var: bool

    K = 2

    def at(self, x):
        return self.pi(x), self.m(x), self.var(x)


def truth_for(kind: str) -> TruthParams:
    if kind == "exp1":
        return TruthParams(kind, _exp1_pi, _m, _exp1_var, (0.9, 0.9), (20.0, 40.0), False, False)
    alpha, eta = ((0.9, 0.9), (20.0, 20.0)) if kind == "b" else ((1.0, 1.0), (1.0, 1.0))
    return TruthParams(kind, _half, _m, _unit, alpha, eta, True, True)


def n_replaced(n: int) -> int:
    return int(math.floor(0.05 * n + 0.5))


def generate(spec: ScenarioSpec):
    """Draw one dataset; returns ``(Dataset, TruthParams)``. Deterministic in ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    truth = truth_for(spec.kind)
    x = rng.uniform(0.0, 1.0, n)
    pi, m, var = truth.at(x)
    z = (rng.uniform(size=n) >= pi[:, 0]).astype(int)  # 0 -> component 1
    rows = np.arange(n)
    mean, sd = m[rows, z], np.sqrt(var[rows, z])
    kind = spec.kind
    if kind == "exp1":
        alpha, eta = np.array(truth.alpha)[z], np.array(truth.eta)[z]
        good = rng.uniform(size=n) < alpha
        eps = sd * np.where(good, 1.0, np.sqrt(eta)) * rng.standard_normal(n)
    elif kind == "b":
        good = rng.uniform(size=n) < 0.9
        eps = sd * np.where(good, 1.0, np.sqrt(20.0)) * rng.standard_normal(n)
    elif kind == "c":
        nu = 4.0
        eps = rng.standard_normal(n) / np.sqrt(rng.chisquare(nu, n) / nu)
    else:
        eps = sd * rng.standard_normal(n)
    y = mean + eps
    labels = z + 1
    if kind in ("d", "e"):
        idx = rng.choice(n, size=n_replaced(n), replace=False)
        if kind == "d":
            x[idx] = 0.5
            y[idx] = rng.uniform(10.0, 15.0, idx.size)
        else:
            x[idx] = rng.uniform(0.0, 1.0, idx.size)
            y[idx] = rng.uniform(-10.0, 10.0, idx.size)
        labels[idx] = NOISE
    return Dataset(x, y, labels), truth


# --------------------------------------------------------------------------
# metrics


def _values(c, x):
    return np.asarray(c(x) if callable(c) else c, dtype=float)


def rase_curves(true_curves, est_curves, eval_x=None) -> float:
    """``sqrt((1/n) sum_i sum_k (f_hat_k(x_i) - f_k(x_i))^2)``.

    Curves are (n, K) arrays or callables evaluated at ``eval_x``.
    """
    t = _values(true_curves, eval_x)
    e = _values(est_curves, eval_x)
    if t.shape != e.shape:
        raise ValueError(f"shape mismatch {t.shape} vs {e.shape}")
    if t.ndim == 1:
        t, e = t[:, None], e[:, None]
    return float(np.sqrt(np.sum(np.square(e - t)) / t.shape[0]))


def rase_params(true_vals, est_vals) -> float:
    """``sqrt((1/K) sum_k (theta_hat_k - theta_k)^2)``."""
    t, e = np.asarray(true_vals, dtype=float), np.asarray(est_vals, dtype=float)
    if t.shape != e.shape:
        raise ValueError("parameter vectors must have equal length")
    return float(np.sqrt(np.mean(np.square(e - t))))


def align_labels(truth, fit, x):
    """Permutation (1-based) of fitted labels that best matches the true regression curves.

    Entry ``k`` is the fitted component assigned to true component ``k + 1``.
    The cost is the summed mean squared distance between curves at ``x``.
    """
    m_true = truth.m(x) if hasattr(truth, "m") and callable(truth.m) else truth.at(x)[1]
    m_est = fit.at(x)[1]
    K = m_true.shape[1]
    if m_est.shape[1] != K:
        raise ValueError("truth and fit have different numbers of components")
    if K > 8:
        raise ValueError("refusing exhaustive alignment for K > 8")
    best, best_cost = None, np.inf
    for perm in itertools.permutations(range(K)):
        cost = float(np.mean(np.square(m_est[:, list(perm)] - m_true), axis=0).sum())
        if cost < best_cost:
            best, best_cost = perm, cost
    return tuple(p + 1 for p in best)


def evaluate_fit(truth: TruthParams, params, x):
    """RASE of m, pi and sigma^2 after label alignment."""
    perm = [p - 1 for p in align_labels(truth, params, x)]
    pi_t, m_t, var_t = truth.at(x)
    pi_e, m_e, var_e = (np.asarray(a)[:, perm] for a in params.at(x))
    out = {"m": rase_curves(m_t, m_e)}
    scalar_pi = truth.scalar_pi and hasattr(params, "pi")
    scalar_var = truth.scalar_var and hasattr(params, "var") and np.ndim(params.var) == 1
    out["pi"] = rase_params(pi_t[0], pi_e[0]) if scalar_pi else rase_curves(pi_t, pi_e)
    out["var"] = rase_params(var_t[0], var_e[0]) if scalar_var else rase_curves(var_t, var_e)
    return out


# --------------------------------------------------------------------------
# harness


def _bandwidth(h, n):
    if isinstance(h, dict):
        return float(h[n])
    return float(h)


def _replicate(task):
    scenario, n, models, seed, h, kernel, config = task
    data, truth = generate(ScenarioSpec(scenario, n, seed))
    kern = KernelSpec(kernel, _bandwidth(h, n))
    cfg = replace(config, seed=seed)
    inits = {}
    out = {}
    for model in models:
        contaminated = model in CONTAMINATED
        try:
            if contaminated not in inits:
                inits[contaminated] = fit_cgmlr(data, 2, cfg, contaminated=contaminated).params
            seen = []
            floor = data.var_floor(cfg.var_floor_rel)

            def check(it, params, post, seen=seen, floor=floor):
                seen.extend((it, name) for name in audit(params, post, floor))
            res = fit_model(data, model, 2, kern, cfg, init=inits[contaminated], callback=check)
            check(-1, res.params, res.posterior)
            res.report.violations.extend(seen)
            out[model] = (evaluate_fit(truth, res.params, data.x), res)
        except FitError as exc:
            out[model] = (None, str(exc))
    return out


def _mean_sd(vals):
    vals = np.asarray(vals, dtype=float)
    mean = float(np.sum(vals) / vals.size)
    if vals.size < 2:
        return mean, float("nan")
    sd = float(np.sqrt(np.sum(np.square(vals - mean)) / (vals.size - 1)))
    return mean, sd


def default_workers() -> int:
    env = os.environ.get("MIXREG_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class ExperimentRow:
    model: str
    n: int
    metric: str
    avg: float
    sd: float
    failures: int
    unreliable: bool


def run_experiment(scenario: str, n_set, models, R: int = 50, base_seed: int = 0,
                   h=0.1, kernel: str = "gaussian", config: FitConfig = FitConfig(),
                   on_fit: Optional[Callable] = None, workers: Optional[int] = None,
                   seeds=None):
    """Monte-Carlo replication; returns a list of ``ExperimentRow``.

    Replicate ``r`` uses seed ``base_seed + r`` (or ``seeds[r]`` if given) for
    both the data and the starting values. ``h`` is a bandwidth or a dict
    keyed by sample size. ``on_fit(model, n, r, data_seed, fit_result)`` is
    called for each successful fit, in replicate order.
    """
    if R < 2:
        raise ValueError("R must be >= 2")
    models = list(models)
    seeds = list(seeds) if seeds is not None else [base_seed + r for r in range(R)]
    if len(seeds) != R:
        raise ValueError("need one seed per replicate")
    workers = workers or default_workers()
    rows = []
    for n in n_set:
        tasks = [(scenario, n, models, s, h, kernel, config) for s in seeds]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(_replicate, tasks))
        else:
            results = [_replicate(t) for t in tasks]
        collected = {m: {k: [] for k in METRICS} for m in models}
        fails = {m: 0 for m in models}
        for r, res in enumerate(results):
            for model in models:
                metrics, fit = res[model]
                if metrics is None:
                    fails[model] += 1
                    continue
                for k in METRICS:
                    collected[model][k].append(metrics[k])
                if on_fit is not None:
                    on_fit(model, n, r, seeds[r], fit)
        for model in models:
            for k in METRICS:
                vals = collected[model][k]
                avg, sd = _mean_sd(vals) if vals else (float("nan"), float("nan"))
                rows.append(ExperimentRow(model, n, k, avg, sd, fails[model],
                                          fails[model] > 0.2 * R))
    return rows


def table(rows, model: str, n: int, metric: str) -> ExperimentRow:
    for r in rows:
        if (r.model, r.n, r.metric) == (model, n, metric):
            return r
    raise KeyError((model, n, metric))


def rows_to_csv(rows) -> str:
    """Paper-style layout: one line per (n, metric, statistic), one column per model."""
    models = list(dict.fromkeys(r.model for r in rows))
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["n", "metric", "stat"] + models)
    ns = list(dict.fromkeys(r.n for r in rows))
    for n in ns:
        for metric in METRICS:
            cells = {r.model: r for r in rows if r.n == n and r.metric == metric}
            wr.writerow([n, f"RASE({metric})", "AVG"] + [repr(cells[m].avg) for m in models])
            wr.writerow([n, f"RASE({metric})", "SD"] + [repr(cells[m].sd) for m in models])
        cells = {r.model: r for r in rows if r.n == n}
        wr.writerow([n, "failures", "count"] + [cells[m].failures for m in models])
        wr.writerow([n, "unreliable", "flag"] + [int(cells[m].unreliable) for m in models])
    return buf.getvalue()
