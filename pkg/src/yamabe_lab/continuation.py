"""Damped Newton continuation in the exponent q for the radial Dirichlet problem

    -a (u'' + (n-1) u'/s) + (Rbar - beta) u = lam u^{q-1},   u(r) = 0,

on a uniform grid, q ascending toward the critical exponent p.

The grid is refined (doubling the interval count) whenever the half-maximum
radius of the current solution spans fewer than max(min_core_cells, core_factor / sqrt(p - q)) cells: the
O((h/l)^2) discretisation error must stay well below the distance p - q to
the critical exponent, otherwise the discrete branch folds early. At q = p a
solve counts as converged only if doubling the grid changes sup u by less
than ``grid_tol``, so a spike collapsing onto the grid scale is reported as a
failure rather than a solution.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .curvature import CurvatureJet, scalar_average
from .elliptic import RadialOperator, _fv_geometry
from .errors import DomainError
from .quadrature import uniform_grid
from .special_functions import conformal_a, critical_p, sphere_area

CONVERGED = "converged_at_p"
BLOW_UP = "blow_up_detected"
STALLED = "stalled"


@dataclass
class ContinuationTrace:
    exponents: list[float]
    sup_values: list[float]
    lp_norms: list[float]
    converged_flags: list[bool]
    terminal_status: str
    residuals: list[float] = field(default_factory=list)
    min_values: list[float] = field(default_factory=list)
    intervals: list[int] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ContinuationTrace":
        return cls(**d)


def default_q_schedule(n: int, head=(0.5, 1e-2, 20), tail=(1e-2, 1e-5, 10)) -> list[float]:
    """q = p - (p-2) f, f geometric over ``head`` then ``tail`` (first tail point dropped),
    then q = p. The tail is the final third and covers three decades of p - q."""
    p = critical_p(n)
    f = np.concatenate([np.geomspace(*head), np.geomspace(tail[0], tail[1], tail[2] + 1)[1:]])
    return [float(q) for q in p - (p - 2) * f] + [p]


class _Problem:
    """Discrete operator and nonlinearity on one uniform grid (unknowns exclude s = r)."""

    def __init__(self, n, r, intervals, Rfun, shift, lam):
        self.grid = uniform_grid(r, intervals)
        s = self.grid.nodes
        op = RadialOperator(self.grid, n, conformal_a(n), Rfun(s) - shift)
        self.lo, self.diag, self.up = op.bands()
        self.lam = lam
        self.N = len(self.diag)
        _, vol, _ = _fv_geometry(self.grid, n)
        self.vol = vol[:-1]

    def apply(self, v):
        out = self.diag * v
        out[1:] += self.lo[1:] * v[:-1]
        out[:-1] += self.up[:-1] * v[1:]
        return out

    def residual(self, u, q) -> float:
        rhs = self.lam * np.maximum(u, 0.0) ** (q - 1)
        scale = float(rhs.max())
        if scale <= 0:
            return np.inf
        return float(np.max(np.abs(self.apply(u) - rhs))) / scale

    def core_cells(self, u) -> int:
        """Number of cells inside the half-maximum radius of u."""
        below = np.nonzero(u < 0.5 * u.max())[0]
        return int(below[0]) if len(below) else self.N

    def jacobian_bands(self, u, q):
        up = np.maximum(u, 0.0)
        ab = np.zeros((3, self.N))
        ab[0, 1:] = self.up[:-1]
        ab[1] = self.diag - self.lam * (q - 1) * up ** (q - 2)
        ab[2, :-1] = self.lo[1:]
        return ab

    def tangent(self, u, q):
        """du/dq along the solution branch: J du/dq = lam u^{q-1} log u."""
        up = np.maximum(u, 1e-300)
        try:
            return solve_banded((1, 1), self.jacobian_bands(u, q), self.lam * up ** (q - 1) * np.log(up))
        except (np.linalg.LinAlgError, ValueError):
            return np.zeros_like(u)

    def newton(self, u, q, tol, max_iter=40):
        best, since_best = np.inf, 0
        for _ in range(max_iter):
            res = self.residual(u, q)
            if res <= tol and u.max() > 0:
                return u, True
            if res < 0.9 * best:
                best, since_best = res, 0
            else:
                since_best += 1
                if since_best >= 6:
                    break
            F = self.apply(u) - self.lam * np.maximum(u, 0.0) ** (q - 1)
            try:
                du = solve_banded((1, 1), self.jacobian_bands(u, q), -F)
            except (np.linalg.LinAlgError, ValueError):
                break
            f0 = np.linalg.norm(F)
            t = 1.0
            while t > 1e-3:
                trial = u + t * du
                ft = np.linalg.norm(self.apply(trial) - self.lam * np.maximum(trial, 0.0) ** (q - 1))
                if ft < (1 - 1e-4 * t) * f0:
                    break
                t /= 2
            else:
                break
            u = trial
        return u, bool(self.residual(u, q) <= tol and u.max() > 0)


class _Continuation:
    def __init__(self, n, r, Rfun, shift, lam, intervals, max_intervals, tol, halvings,
                 min_core_cells, core_factor, grid_tol):
        self.args = (n, r, Rfun, shift, lam)
        self.p = critical_p(n)
        self.core_factor = core_factor
        self.grid_tol = grid_tol
        self.max_intervals = max_intervals
        self.tol = tol
        self.halvings = halvings
        self.min_core = min_core_cells
        self.prob = _Problem(n, r, intervals, Rfun, shift, lam)

    def regrid(self, u, intervals):
        old = self.prob
        self.prob = _Problem(*self.args[:2], intervals, *self.args[2:])
        return np.interp(self.prob.grid.nodes[:-1], old.grid.nodes, np.append(u, 0.0))

    def required_cells(self, q) -> float:
        gap = self.p - q
        if gap <= 1e-12 * self.p:
            return self.min_core
        return max(self.min_core, self.core_factor / np.sqrt(gap))

    def solve(self, u, q, guess=None):
        """Newton at q from guess (default u), refining the grid until the solution
        core is resolved. On failure the grid and iterate are restored."""
        saved, u0 = self.prob, u
        u = u if guess is None else guess
        need = self.required_cells(q)
        while True:
            trial, ok = self.prob.newton(u, q, self.tol)
            if ok and self.prob.core_cells(trial) >= need:
                break
            if not ok or 2 * self.prob.N > self.max_intervals:
                self.prob = saved
                return u0, False
            u = self.regrid(trial, 2 * self.prob.N)
        if q < self.p * (1 - 1e-12):
            return trial, True
        # At q = p accept only a solution that survives a grid doubling.
        if 2 * self.prob.N <= self.max_intervals:
            start = self.regrid(trial, 2 * self.prob.N)
            fine, ok = self.prob.newton(start, q, self.tol)
            if ok and abs(fine.max() - trial.max()) <= self.grid_tol * trial.max():
                return fine, True
        self.prob = saved
        return u0, False

    def advance(self, u, q_from, q_to):
        """Steps from q_from to q_to, halving the step on failure."""
        if q_to <= q_from:
            return self.solve(u, q_to)
        saved, u0 = self.prob, u
        qc, step = q_from, q_to - q_from
        min_step = step / 2**self.halvings
        while qc < q_to:
            step = min(step, q_to - qc)
            tangent = self.prob.tangent(u, qc)
            trial, good = self.solve(u, qc + step, u + step * tangent)
            if good:
                u, qc = trial, qc + step
                step *= 2
            elif step / 2 >= min_step:
                step /= 2
            else:
                self.prob = saved
                return u0, False
        return u, True


def subcritical_continuation(jet: CurvatureJet | None, r: float, lam: float, beta: float,
                             q_schedule=None, n: int | None = None, intervals: int = 2000,
                             max_intervals: int = 2**21, newton_tol: float = 5e-9,
                             max_halvings: int = 6, min_core_cells: int = 64,
                             core_factor: float = 4.0, grid_tol: float = 1e-3) -> ContinuationTrace:
    if jet is None and n is None:
        raise DomainError("need a jet or a dimension")
    n = jet.n if n is None else n
    if n < 3:
        raise DomainError("need n >= 3")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    p = critical_p(n)
    qs = default_q_schedule(n) if q_schedule is None else [float(q) for q in q_schedule]
    if any(not 2 < q <= p * (1 + 1e-15) for q in qs) or np.any(np.diff(qs) <= 0):
        raise DomainError("q_schedule must ascend strictly inside (2, p]")
    if jet is not None and r > jet.validity_radius:
        raise DomainError(f"r = {r} exceeds validity radius {jet.validity_radius:.6g}")

    def Rfun(s):
        return np.zeros_like(s) if jet is None else scalar_average(jet, s)

    cont = _Continuation(n, r, Rfun, beta, lam, intervals, max_intervals, newton_tol,
                         max_halvings, min_core_cells, core_factor, grid_tol)
    prob = cont.prob
    s = prob.grid.nodes
    # Seed: first Dirichlet mode scaled onto the Nehari manifold at a moderate exponent.
    q0 = min(qs[0], 0.5 * (2 + p))
    bump = np.cos(0.5 * np.pi * s / r)[:-1]
    energy = float(prob.vol @ (bump * prob.apply(bump)))
    if energy <= 0:
        raise DomainError("linear part is not coercive: beta is above the first Dirichlet eigenvalue")
    amp = (energy / (lam * float(prob.vol @ bump**q0))) ** (1.0 / (q0 - 2))
    u, ok = cont.solve(amp * bump, q0)
    q_cur = q0 if ok else None

    trace = ContinuationTrace([], [], [], [], STALLED)
    for q in qs:
        success = False
        if q_cur is not None:
            cand, success = cont.advance(u, q_cur, q)
            if success:
                u, q_cur = cand, q
        pr = cont.prob
        positive = bool(u.min() > 0)
        nan = float("nan")
        trace.exponents.append(q)
        trace.converged_flags.append(bool(success and positive))
        trace.sup_values.append(float(u.max()) if success else nan)
        trace.lp_norms.append((sphere_area(n) * float(pr.vol @ np.abs(u) ** p)) ** (1.0 / p) if success else nan)
        trace.residuals.append(pr.residual(u, q) if success else nan)
        trace.min_values.append(float(u.min()) if success else nan)
        trace.intervals.append(pr.N if success else 0)
    trace.terminal_status = classify_trace(trace, p)
    trace.diagnostics = {"n": n, "r": r, "lam": lam, "beta": beta, "seed_converged": ok,
                         "final_intervals": cont.prob.N}
    return trace


def classify_trace(trace: ContinuationTrace, p: float, growth: float = 10.0) -> str:
    """converged_at_p; blow_up_detected when sup u rises monotonically by >= growth
    over the last third of the schedule and the solve at q = p fails; else stalled."""
    flags = trace.converged_flags
    if not flags:
        return STALLED
    at_p = abs(trace.exponents[-1] - p) <= 1e-12 * p
    if flags[-1] and at_p:
        return CONVERGED
    k = len(flags)
    start = k - (k + 2) // 3
    tail = [v for v, f in zip(trace.sup_values[start:], flags[start:]) if f]
    if at_p and len(tail) >= 2 and np.all(np.diff(tail) > 0) and tail[-1] >= growth * tail[0]:
        return BLOW_UP
    return STALLED
