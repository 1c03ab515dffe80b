"""Radial Gauss-Legendre quadrature, angular averages and a Monte Carlo cross-check."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, IntegrationError
from .special_functions import sphere_area


@dataclass(frozen=True)
class RadialGrid:
    r: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def uniform(self) -> bool:
        d = np.diff(self.nodes)
        return bool(self.nodes[0] == 0.0 and np.allclose(d, d[0], rtol=1e-6, atol=0))

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])


@dataclass(frozen=True)
class RadialField:
    grid: RadialGrid
    values: np.ndarray
    derivative: np.ndarray
    laplacian: np.ndarray | None = None

    def scaled(self, c: float) -> "RadialField":
        lap = None if self.laplacian is None else c * self.laplacian
        return RadialField(self.grid, c * self.values, c * self.derivative, lap)


def gauss_radial_grid(r: float, order: int = 16, panels: int = 64, scale: float | None = None,
                      breakpoints=(), inner_ratio: float = 1e-6) -> RadialGrid:
    """Composite Gauss-Legendre grid on [0, r] with log-spaced panels toward 0.

    ``scale`` (e.g. sqrt(eps)) pulls the innermost panel edge below the
    concentration scale and is added as a breakpoint, as are ``breakpoints``.
    """
    if r <= 0:
        raise DomainError("grid radius must be positive")
    inner = r * inner_ratio
    if scale is not None:
        inner = min(inner, 1e-3 * scale)
    edges = np.concatenate([[0.0], np.geomspace(inner, r, panels)])
    extra = [b for b in ([scale] if scale else []) + list(breakpoints) if 0 < b < r]
    edges = np.unique(np.concatenate([edges, extra]))
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return RadialGrid(float(r), nodes, weights)


def uniform_grid(r: float, intervals: int) -> RadialGrid:
    """Uniform nodes 0, h, ..., r with trapezoid weights (for finite differences)."""
    if r <= 0 or intervals < 2:
        raise DomainError("need r > 0 and at least two intervals")
    nodes = np.linspace(0.0, r, intervals + 1)
    h = r / intervals
    w = np.full(intervals + 1, h)
    w[0] = w[-1] = h / 2
    return RadialGrid(float(r), nodes, w)


def radial_integrate(f, grid: RadialGrid, n: int) -> float:
    """omega_n * sum_k w_k s_k^{n-1} f(s_k)."""
    vals = f(grid.nodes) if callable(f) else np.asarray(f, dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = grid.nodes[~np.isfinite(vals)][0]
        raise IntegrationError(f"non-finite integrand at s = {bad}")
    return float(sphere_area(n) * np.sum(grid.weights * grid.nodes ** (n - 1) * vals))


def angular_average_quadratic(A) -> float:
    """Average of y^T A y over the unit sphere, tr(A)/n."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("A must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise DomainError("A must be symmetric")
    return float(np.trace(A) / A.shape[0])


def ball_volume(n: int, r: float) -> float:
    return sphere_area(n) * r**n / n


def mc_ball_integrate(f: Callable[[np.ndarray], np.ndarray], n: int, r: float, N: int,
                      seed: int, chunk: int = 200_000) -> tuple[float, float]:
    """Uniform Monte Carlo over the ball of radius r; returns (estimate, stderr)."""
    if N < 1000:
        raise DomainError("mc_ball_integrate needs N >= 1000")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < N:
        m = min(chunk, N - done)
        d = rng.standard_normal((m, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        pts = d * (r * rng.random(m) ** (1.0 / n))[:, None]
        vals = np.asarray(f(pts), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise IntegrationError(f"non-finite sample at {pts[~np.isfinite(vals)][0]}")
        total += vals.sum()
        total_sq += (vals * vals).sum()
        done += m
    vol = ball_volume(n, r)
    mean = total / N
    var = max(total_sq / N - mean * mean, 0.0)
    return vol * mean, vol * np.sqrt(var / N)
