"""Kernel weights, the local evaluation grid and kernel functionals."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

KERNELS = ("gaussian", "epanechnikov")

_SQRT_2PI = np.sqrt(2.0 * np.pi)


class DegenerateCovariateError(ValueError):
    pass


def _w_gaussian(s):
    return np.exp(-0.5 * np.square(s)) / _SQRT_2PI


def _w_epanechnikov(s):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) <= 1.0, 0.75 * (1.0 - np.square(s)), 0.0)


_BASE = {"gaussian": _w_gaussian, "epanechnikov": _w_epanechnikov}


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "gaussian"
    h: float = 0.1

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; expected one of {KERNELS}")
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"bandwidth must be positive, got {self.h}")

    def base(self, s):
        """Unscaled kernel W(s)."""
        return _BASE[self.kind](s)

    def __call__(self, t):
        return kernel_weight(self, t)


def kernel_weight(spec: KernelSpec, t):
    """Rescaled kernel ``W(t / h) / h``; works elementwise on arrays."""
    return spec.base(np.asarray(t, dtype=float) / spec.h) / spec.h


@dataclass(frozen=True, eq=False)
class LocalGrid:
    """Strictly increasing set of local points at which curves are estimated."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a grid needs at least two points")
        if not np.all(np.isfinite(pts)) or np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be finite and strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        return isinstance(other, LocalGrid) and np.array_equal(self.points, other.points)

    @property
    def span(self):
        return float(self.points[0]), float(self.points[-1])


def make_grid(data, G: int) -> LocalGrid:
    """``G`` equispaced points from ``min(x)`` to ``max(x)`` inclusive."""
    if G < 2:
        raise ValueError("grid size must be at least 2")
    x = np.asarray(data.x if hasattr(data, "x") else data, dtype=float)
    lo, hi = float(np.min(x)), float(np.max(x))
    if not hi > lo:
        raise DegenerateCovariateError("all covariate values are equal; cannot build a grid")
    return LocalGrid(np.linspace(lo, hi, G))


def default_grid_size(n: int) -> int:
    return int(max(2, min(n, 100)))


def interpolate(grid: LocalGrid, values, x_query):
    """Piecewise-linear interpolation of node ``values``; clamped outside the span.

    ``values`` may be 1-d (one curve) or 2-d with curves along the first axis.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != len(grid):
        raise ValueError(f"expected {len(grid)} node values, got {values.shape[-1]}")
    if values.ndim == 1:
        return np.interp(x_query, grid.points, values)
    return np.stack([np.interp(x_query, grid.points, v) for v in values])


def weight_matrix(kern: KernelSpec, x, grid: LocalGrid):
    """``W_h(x_i - u_g)`` as an (n, G) array.

    With a compact-support kernel a grid point may see no data; the bandwidth
    is doubled at that point until it does. Returns the matrix and the number
    of widened columns.
    """
    x = np.asarray(x, dtype=float)
    W = kernel_weight(kern, x[:, None] - grid.points[None, :])
    widened = 0
    empty = np.flatnonzero(W.sum(axis=0) <= 0.0)
    for g in empty:
        h = kern.h
        col = W[:, g]
        while col.sum() <= 0.0:
            h *= 2.0
            col = kernel_weight(KernelSpec(kern.kind, h), x - grid.points[g])
        W[:, g] = col
        widened += 1
    return W, widened


@lru_cache(maxsize=None)
def _functionals(kind: str):
    W = _BASE[kind]
    lim = 1.0 if kind == "epanechnikov" else np.inf
    opts = dict(epsabs=1e-12, epsrel=1e-12, limit=200)
    w0 = float(W(0.0))
    int_w2, _ = integrate.quad(lambda t: W(t) ** 2, -lim, lim, **opts)

    if kind == "gaussian":
        # W*W is the N(0, 2) density
        def conv(t):
            return np.exp(-0.25 * t * t) / np.sqrt(4.0 * np.pi)
        clim = np.inf
    else:
        def conv(t):
            a, b = max(-1.0, t - 1.0), min(1.0, t + 1.0)
            if b <= a:
                return 0.0
            val, _ = integrate.quad(lambda s: W(s) * W(t - s), a, b, **opts)
            return val
        clim = 2.0

    denom, _ = integrate.quad(lambda t: (W(t) - 0.5 * conv(t)) ** 2, -clim, clim, **opts)
    num = w0 - 0.5 * int_w2
    return w0, int_w2, num / denom


def kernel_functionals(spec: KernelSpec):
    """Return ``(W(0), int W^2, tau_W)`` for the unscaled kernel of ``spec``."""
    return _functionals(spec.kind)
