"""Radial Dirichlet/Neumann solvers on balls and a spectral mean-zero solver on flat tori.

The radial operator -a(v'' + (n-1)v'/s) + q v is discretised in flux form on
a uniform grid: cell i is [s_i - h/2, s_i + h/2] intersected with [0, r] and

    (L v)_i = -a / V_i * (f_{i+1/2} (v_{i+1} - v_i) - f_{i-1/2} (v_i - v_{i-1})) / h + q_i v_i

with f = s^{n-1} at cell faces and V_i = int_cell s^{n-1} ds. At s = 0 this is
the ghost-node stencil 2n(v_1 - v_0)/h^2; the off-diagonals are non-positive,
so for q >= 0 the matrix is a diagonally dominant M-matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve

from .curvature import CurvatureJet, scalar_average
from .errors import CompatibilityError, DomainError, NumericalError
from .quadrature import RadialField, RadialGrid, uniform_grid
from .special_functions import conformal_a

RESIDUAL_TOL = 1e-10


def _fv_geometry(grid: RadialGrid, n: int):
    if not grid.uniform:
        raise DomainError("finite-difference operators need a uniform grid with a node at 0")
    s = grid.nodes
    h = grid.h
    lo = np.maximum(s - h / 2, 0.0)
    hi = np.minimum(s + h / 2, grid.r)
    vol = (hi**n - lo**n) / n
    face = (s[:-1] + h / 2) ** (n - 1)  # face between node i and i+1
    return h, vol, face


def _laplacian_bands(grid: RadialGrid, n: int):
    """Bands of the discrete radial Laplacian on all nodes (zero-flux outer face)."""
    h, vol, face = _fv_geometry(grid, n)
    N = len(grid.nodes)
    up = np.zeros(N)
    lo = np.zeros(N)
    up[:-1] = face / (h * vol[:-1])
    lo[1:] = face / (h * vol[1:])
    diag = -(up + lo)
    return lo, diag, up


def radial_laplacian(values, grid: RadialGrid, n: int) -> np.ndarray:
    """Discrete v'' + (n-1)v'/s at nodes 0..N-1 (the outer node is a boundary node)."""
    v = np.asarray(values, dtype=float)
    lo, diag, up = _laplacian_bands(grid, n)
    out = diag * v
    out[1:] += lo[1:] * v[:-1]
    out[:-1] += up[:-1] * v[1:]
    return out[:-1]


@dataclass(frozen=True)
class RadialOperator:
    """-a (v'' + (n-1) v'/s) + potential * v with v(r) = 0 and v'(0) = 0."""

    grid: RadialGrid
    n: int
    a_coeff: float
    potential: np.ndarray = field(repr=False)
    bc: str = "dirichlet_outer"

    def bands(self):
        """(lower, diag, upper) for the unknowns v_0..v_{N-1}."""
        lo, diag, up = _laplacian_bands(self.grid, self.n)
        a = self.a_coeff
        q = np.asarray(self.potential, dtype=float)
        return -a * lo[:-1], -a * diag[:-1] + q[:-1], -a * up[:-1]

    def apply(self, v) -> np.ndarray:
        """Operator applied at interior nodes; v includes the boundary node."""
        v = np.asarray(v, dtype=float)
        lo, diag, up = self.bands()
        out = diag * v[:-1]
        out[1:] += lo[1:] * v[:-2]
        out += up * v[1:]
        return out

    def matrix(self) -> sparse.csr_matrix:
        lo, diag, up = self.bands()
        return sparse.diags([lo[1:], diag, up[:-1]], [-1, 0, 1], format="csr")


def radial_operator(jet: CurvatureJet | None, grid: RadialGrid, n: int | None = None,
                    shift: float = 0.0) -> RadialOperator:
    """-a Delta - (Rbar + shift) with Rbar the angular-averaged scalar model of jet."""
    n = jet.n if n is None else n
    R = np.zeros_like(grid.nodes) if jet is None else scalar_average(jet, grid.nodes)
    return RadialOperator(grid, n, conformal_a(n), -(R + shift))


def solve_radial_dirichlet(op: RadialOperator, rhs) -> RadialField:
    b = rhs.values if isinstance(rhs, RadialField) else np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(b)):
        raise DomainError("rhs must be finite")
    lo, diag, up = op.bands()
    ab = np.zeros((3, len(diag)))
    ab[0, 1:] = up[:-1]
    ab[1] = diag
    ab[2, :-1] = lo[1:]
    try:
        sol = solve_banded((1, 1), ab, b[:-1])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular radial discretisation: {exc}") from exc
    v = np.append(sol, 0.0)
    # normwise backward error ||Av - b|| / (||A|| ||v|| + ||b||)
    norm_A = np.max(np.abs(lo) + np.abs(diag) + np.abs(up))
    scale = norm_A * np.max(np.abs(v)) + np.max(np.abs(b[:-1]))
    res = np.max(np.abs(op.apply(v) - b[:-1])) / scale if scale > 0 else 0.0
    if not res <= RESIDUAL_TOL:
        raise NumericalError(f"radial solve residual {res:.3e} above {RESIDUAL_TOL}")
    return RadialField(op.grid, v, np.gradient(v, op.grid.h, edge_order=2))


def correction_rhs(u: RadialField, op: RadialOperator, gamma: float,
                   laplacian: str = "analytic") -> RadialField:
    """a Delta u + R u - R u^{1-gamma} with R = -potential.

    laplacian="discrete" uses the operator's own stencil for Delta u, so that
    u + v solves (-a Delta_h - R) w = -R u^{1-gamma} exactly. With the analytic
    Laplacian the O((h/l)^2) truncation of Delta u near the concentration
    scale l enters v directly and can swamp u + v, which is far smaller than u.
    """
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if laplacian == "analytic":
        if u.laplacian is None:
            raise DomainError("correction_rhs needs the analytic Laplacian of u")
        lap = u.laplacian
    elif laplacian == "discrete":
        lap = np.append(radial_laplacian(u.values, u.grid, op.n), 0.0)
    else:
        raise DomainError(f"unknown laplacian mode {laplacian!r}")
    R = -np.asarray(op.potential, dtype=float)
    uu = np.maximum(u.values, 0.0)
    vals = op.a_coeff * lap + R * uu - R * uu ** (1 - gamma)
    return RadialField(u.grid, vals, np.gradient(vals, u.grid.h, edge_order=2))


@dataclass(frozen=True)
class PositivityResult:
    positive: bool
    min_value: float
    min_location: float

    def __bool__(self) -> bool:
        return self.positive


def positivity_check(field: RadialField) -> PositivityResult:
    """Strict positivity at every node except the outer boundary node."""
    vals = field.values[:-1]
    k = int(np.argmin(vals))
    return PositivityResult(bool(vals[k] > 0), float(vals[k]), float(field.grid.nodes[k]))


def solve_ball_neumann(F, grid: RadialGrid, n: int, compat_tol: float = 1e-3) -> RadialField:
    """-a Delta u = F on the ball with u'(r) = 0 and volume-weighted mean zero."""
    F = np.asarray(F, dtype=float)
    a = conformal_a(n)
    _, vol, _ = _fv_geometry(grid, n)
    total = float(vol @ F)
    scale = float(vol @ np.abs(F))
    if scale == 0.0:
        return RadialField(grid, np.zeros_like(F), np.zeros_like(F))
    if abs(total) > compat_tol * scale:
        raise CompatibilityError(f"int F = {total:.3e} violates the Neumann compatibility condition")
    Fp = F - total / vol.sum()
    lo, diag, up = _laplacian_bands(grid, n)
    N = len(F)
    # Rows scaled by cell volumes give a symmetric matrix; border with the mean constraint.
    S = sparse.diags([-a * (vol * lo)[1:], -a * vol * diag, -a * (vol * up)[:-1]], [-1, 0, 1])
    col = sparse.csr_matrix(vol.reshape(-1, 1))
    K = sparse.bmat([[S, col], [col.T, None]], format="csc")
    sol = spsolve(K, np.append(vol * Fp, 0.0))
    u = sol[:N]
    Lu = -a * (diag * u)
    Lu[1:] += -a * lo[1:] * u[:-1]
    Lu[:-1] += -a * up[:-1] * u[1:]
    norm_A = a * np.max(np.abs(lo) + np.abs(diag) + np.abs(up))
    res = np.max(np.abs(Lu - Fp)) / (norm_A * np.max(np.abs(u)) + np.max(np.abs(Fp)))
    if not res <= RESIDUAL_TOL:
        raise NumericalError(f"Neumann solve residual {res:.3e}")
    return RadialField(grid, u, np.gradient(u, grid.h, edge_order=2))


@dataclass
class TorusProblem:
    n: int
    side: float
    grid_shape: int
    source: np.ndarray | None = None
    solution: np.ndarray | None = None

    @property
    def h(self) -> float:
        return self.side / self.grid_shape

    def coordinates(self, axis: int) -> np.ndarray:
        shape = [1] * self.n
        shape[axis] = self.grid_shape
        return (np.arange(self.grid_shape) * self.h).reshape(shape)


def _torus_symbol(n: int, side: float, m: int) -> list[np.ndarray]:
    k = 2 * np.pi * np.fft.fftfreq(m, d=side / m)
    kr = 2 * np.pi * np.fft.rfftfreq(m, d=side / m)
    out = []
    for ax in range(n):
        kk = kr if ax == n - 1 else k
        shape = [1] * n
        shape[ax] = len(kk)
        out.append((kk**2).reshape(shape))
    return out


def torus_laplacian(u: np.ndarray, side: float) -> np.ndarray:
    """Spectral Laplacian of a periodic field sampled on an m^n lattice."""
    n, m = u.ndim, u.shape[0]
    k2 = sum(_torus_symbol(n, side, m))
    axes = tuple(range(n))
    return np.fft.irfftn(-k2 * np.fft.rfftn(u, axes=axes), s=u.shape, axes=axes)


def solve_torus_mean_zero(problem: TorusProblem, tol: float = 1e-12) -> np.ndarray:
    """Mean-zero periodic solution of -a Delta u = F by spectral inversion."""
    F = np.asarray(problem.source, dtype=float)
    n, m = problem.n, problem.grid_shape
    if F.shape != (m,) * n:
        raise DomainError(f"source shape {F.shape} != {(m,) * n}")
    mean = float(F.mean())
    if abs(mean) > tol * max(1.0, float(np.abs(F).max())):
        raise CompatibilityError(f"source mean {mean:.3e} is not zero")
    a = conformal_a(n)
    k2 = sum(_torus_symbol(n, problem.side, m))
    axes = tuple(range(n))
    Fh = np.fft.rfftn(F, axes=axes)
    k2 = np.broadcast_to(k2, Fh.shape).copy()
    k2.flat[0] = 1.0
    Uh = Fh / (a * k2)
    Uh.flat[0] = 0.0
    u = np.fft.irfftn(Uh, s=F.shape, axes=axes)
    res = np.max(np.abs(-a * torus_laplacian(u, problem.side) - (F - mean)))
    scale = max(float(np.abs(F).max()), 1e-300)
    if res > RESIDUAL_TOL * scale and res > 1e-14:
        raise NumericalError(f"torus solve residual {res / scale:.3e}")
    problem.solution = u
    return u


@dataclass(frozen=True)
class LaplacianIdentityCheck:
    n: int
    h: float
    max_rel_error: float
    origin_value: float
    origin_exact: float
    observed_order: float


def _bubble_sq(n, s):
    return (1 + s * s) ** (-(n - 2.0))


def _bubble_sq_laplacian(n, s):
    return 2 * (n - 2.0) ** 2 * (s * s - n / (n - 2.0)) / (1 + s * s) ** n


def _identity_error(n, h, r):
    grid = uniform_grid(r, int(round(r / h)))
    s = grid.nodes
    disc = radial_laplacian(_bubble_sq(n, s), grid, n)
    exact = _bubble_sq_laplacian(n, s[:-1])
    return float(np.max(np.abs(disc - exact)) / np.max(np.abs(exact))), float(disc[0])


def laplacian_identity_check(n: int, h: float = 1e-3, r: float = 2.0) -> LaplacianIdentityCheck:
    """Discrete radial Laplacian of (1+s^2)^{-(n-2)} against its closed form.

    Error is max-norm over the nodes s < r, relative to max |exact| (the exact
    Laplacian changes sign at s^2 = n/(n-2)). The order comes from h and h/2.
    """
    if n < 3:
        raise DomainError("need n >= 3")
    e1, origin = _identity_error(n, h, r)
    e2, _ = _identity_error(n, h / 2, r)
    return LaplacianIdentityCheck(n, h, e1, origin, -2.0 * n * (n - 2), float(np.log2(e1 / e2)))
