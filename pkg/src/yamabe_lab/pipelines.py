"""End-to-end constructions: epsilon and d sweeps, the corrected test function,
conformal negativity on a flat torus. Continuation lives in ``continuation``."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .curvature import CurvatureJet, volume_weight
from .elliptic import (PositivityResult, TorusProblem, correction_rhs, positivity_check,
                       radial_operator, solve_radial_dirichlet, solve_torus_mean_zero,
                       torus_laplacian)
from .errors import ConstructionError, DomainError, OutOfValidityError, PipelineError, PreconditionError
from .functionals import GEOMETRIC, QuotientReport, perturbed_quotient, yamabe_quotient
from .quadrature import RadialField, gauss_radial_grid, radial_integrate, uniform_grid
from .special_functions import conformal_a, critical_p, k_moments
from .test_functions import AubinProfile, aubin_field, normalized_profile

LINEAR_IN_EPS = "linear_in_eps"
EPS_LOG_EPS = "eps_log_eps"
POWER_LAW_IN_D = "power_law_in_d"


@dataclass
class SweepResult:
    parameter_name: str
    parameters: list[float]
    values: list[float]
    fit_model: str
    fitted_coefficient: float
    fitted_exponent: float | None
    residual_rms: float
    predicted_coefficient: float | None
    bound_exponent: float | None = None
    bound_constant: float | None = None
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.parameters) != len(self.values) or len(self.values) < 4:
            raise DomainError("a sweep needs at least four aligned points")

    @property
    def signal_rms(self) -> float:
        return float(np.sqrt(np.mean(np.square(self.values))))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        return cls(**d)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def predicted_eps_coefficient(n: int, beta: float) -> float:
    """Leading coefficient of T - Q: (n-2) beta K3 / (4(n-1) K2) for n >= 5,
    and of the eps|log eps| term, beta omega_4 / (2 a K2), for n = 4."""
    m = k_moments(n)
    if n == 4:
        return beta * m.omega_n / (2 * conformal_a(n) * m.K2)
    return (n - 2) * beta * m.K3 / (4 * (n - 1) * m.K2)


def perturbed_quotient_at(jet: CurvatureJet, r: float, beta: float, eps: float) -> QuotientReport:
    grid = gauss_radial_grid(r, scale=math.sqrt(eps), breakpoints=(r / 2,))
    field_ = aubin_field(AubinProfile(jet.n, eps, r), grid)
    return perturbed_quotient(field_, jet, beta)


def epsilon_sweep(jet: CurvatureJet, r: float, beta: float, eps_list, workers: int = 1) -> SweepResult:
    """T - Q_eps for the perturbed quotient, fitted against eps (n >= 5, with an
    eps^{3/2} remainder column) or eps|log eps| (n = 4, with an eps column and
    the two largest eps excluded)."""
    n = jet.n
    if n < 4:
        raise PreconditionError("the local construction needs n >= 4")
    eps = np.sort(np.asarray(eps_list, dtype=float))
    if eps.min() <= 0 or np.log10(eps.max() / eps.min()) < 1.0:
        raise DomainError("eps_list must be positive and span at least one decade")
    if r > jet.validity_radius:
        raise OutOfValidityError(f"r = {r} exceeds validity radius {jet.validity_radius:.6g}")
    reports = _map(lambda e: perturbed_quotient_at(jet, r, beta, e), list(eps), workers)
    deficit = np.array([rep.threshold - rep.value for rep in reports])
    flags = []
    if np.any(np.diff(deficit) <= 0):
        flags.append("non_monotone_deficit")
    if n >= 5:
        model = LINEAR_IN_EPS
        X = np.column_stack([eps, eps**1.5])
        mask = np.ones_like(eps, dtype=bool)
    else:
        model = EPS_LOG_EPS
        X = np.column_stack([eps * np.abs(np.log(eps)), eps])
        mask = np.ones_like(eps, dtype=bool)
        mask[-2:] = False
    coef, *_ = np.linalg.lstsq(X[mask], deficit[mask], rcond=None)
    resid = deficit[mask] - X[mask] @ coef
    return SweepResult(
        parameter_name="eps",
        parameters=[float(e) for e in eps],
        values=[float(v) for v in deficit],
        fit_model=model,
        fitted_coefficient=float(coef[0]),
        fitted_exponent=None,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        predicted_coefficient=predicted_eps_coefficient(n, beta),
        flags=flags,
    )


def default_gamma(n: int) -> float:
    return 0.1 / (n - 2)


@dataclass
class CorrectionState:
    """Aubin field u on a uniform grid over the ball of radius d/2 and its correction v."""

    d: float
    eps: float
    gamma: float
    u: RadialField
    v: RadialField

    @property
    def w(self) -> RadialField:
        return RadialField(self.u.grid, self.u.values + self.v.values,
                           self.u.derivative + self.v.derivative)


def _check_local_hypotheses(jet: CurvatureJet, d: float, gamma: float) -> None:
    n = jet.n
    if n < 4:
        raise PreconditionError(f"the local method needs n >= 4, got n = {n}")
    if not jet.has_weyl:
        raise PreconditionError("Weyl tensor vanishes at the centre; the local method does not apply")
    if jet.scalar0 + np.linalg.norm(jet.scalar_grad) * d / 2 >= 0:
        raise PreconditionError("scalar curvature model is not negative on the ball")
    if d / 2 > jet.validity_radius:
        raise OutOfValidityError(f"d/2 = {d / 2} exceeds validity radius {jet.validity_radius:.6g}")
    if not 0 < gamma < 1 or (n - 2) * gamma > 0.5:
        raise PreconditionError(f"gamma = {gamma} violates 0 < gamma and (n-2) gamma << 1")


def correction_state(jet: CurvatureJet, d: float, eps: float, gamma: float,
                     intervals: int = 4000) -> CorrectionState:
    """Normalized Aubin u with eps -> eps d^2 on the ball of radius d/2, and v solving
    -a Delta v - R v = a Delta u + R u - R u^{1-gamma}, v = 0 on the boundary."""
    r = d / 2
    grid = uniform_grid(r, intervals)
    prof = normalized_profile(AubinProfile(jet.n, eps * d * d, r), grid, jet)
    u = aubin_field(prof, grid)
    op = radial_operator(jet, grid)
    v = solve_radial_dirichlet(op, correction_rhs(u, op, gamma, laplacian="discrete"))
    return CorrectionState(d, eps, gamma, u, v)


def _norms(values, grid, jet):
    w = volume_weight(jet, grid.nodes)
    p = critical_p(jet.n)
    a = np.abs(values)
    return (radial_integrate(a**p * w, grid, jet.n) ** (1 / p),
            radial_integrate(a * a * w, grid, jet.n) ** 0.5)


def d_sweep(jet: CurvatureJet, gamma: float | None, d_list, eps: float = 1e-4,
            intervals: int = 4000, workers: int = 1) -> tuple[SweepResult, SweepResult]:
    """||u+v|| / ||u||^{1-gamma} against d in the Lp and L2 norms, with log-log slopes."""
    n = jet.n
    gamma = default_gamma(n) if gamma is None else gamma
    ds = np.sort(np.asarray(d_list, dtype=float))
    if np.log10(ds.max() / ds.min()) < 1.0 - 1e-12:
        raise DomainError("d_list must span at least one decade")
    _check_local_hypotheses(jet, ds.max(), gamma)

    def one(d):
        st = correction_state(jet, d, eps, gamma, intervals)
        wp, w2 = _norms(st.w.values, st.u.grid, jet)
        up, u2 = _norms(st.u.values, st.u.grid, jet)
        return wp / up ** (1 - gamma), w2 / u2 ** (1 - gamma)

    ratios = np.array(_map(one, list(ds), workers))
    out = []
    for col, bound in ((0, 2 + (n - 2) * gamma / 2), (1, 2 + n * gamma / 2)):
        y = ratios[:, col]
        slope, icpt = np.polyfit(np.log(ds), np.log(y), 1)
        resid = np.log(y) - (slope * np.log(ds) + icpt)
        out.append(SweepResult(
            parameter_name="d",
            parameters=[float(x) for x in ds],
            values=[float(x) for x in y],
            fit_model=POWER_LAW_IN_D,
            fitted_coefficient=float(np.exp(icpt)),
            fitted_exponent=float(slope),
            residual_rms=float(np.sqrt(np.mean(resid**2))),
            predicted_coefficient=None,
            bound_exponent=float(bound),
            bound_constant=float(np.max(y / ds**bound)),
            flags=["lp"] if col == 0 else ["l2"],
        ))
    return out[0], out[1]


@dataclass
class CorrectionResult:
    phi: RadialField
    report: QuotientReport
    branch: str
    u: RadialField
    v: RadialField
    report_u_plus_v: QuotientReport
    report_abs_v: QuotientReport
    baseline: QuotientReport
    positivity: PositivityResult
    eps: float
    beta0: float
    gamma: float
    d: float

    def summary(self) -> dict:
        return {
            "branch": self.branch, "eps": self.eps, "beta0": self.beta0, "gamma": self.gamma,
            "d": self.d, "report": self.report.to_dict(),
            "report_u_plus_v": self.report_u_plus_v.to_dict(),
            "report_abs_v": self.report_abs_v.to_dict(),
            "baseline_perturbed_u": self.baseline.to_dict(),
            "positivity": {"positive": self.positivity.positive,
                           "min_value": self.positivity.min_value,
                           "min_location": self.positivity.min_location},
        }


def corrected_test_function(jet: CurvatureJet, d: float, beta0: float | None = None,
                            eps: float | None = None, gamma: float | None = None,
                            alpha: float = 2.0, intervals: int = 4000) -> CorrectionResult:
    """phi = u + v (or |v| when that alone beats the threshold) and its Yamabe quotient."""
    n = jet.n
    gamma = default_gamma(n) if gamma is None else gamma
    _check_local_hypotheses(jet, d, gamma)
    if eps is None and beta0 is None:
        raise DomainError("give eps or beta0")
    if eps is None:
        eps = (beta0 / alpha) ** 2
    if beta0 is None:
        beta0 = alpha * math.sqrt(eps)
    if not math.isclose(beta0, alpha * math.sqrt(eps), rel_tol=1e-9):
        raise PreconditionError("beta0 must equal alpha * sqrt(eps)")
    st = correction_state(jet, d, eps, gamma, intervals)
    pos = positivity_check(st.w)
    if not pos:
        raise PipelineError(f"u + v is not positive: min {pos.min_value:.3e} at s = {pos.min_location:.3e}")
    w = st.w
    sgn = np.sign(st.v.values)
    abs_v = RadialField(st.u.grid, np.abs(st.v.values), sgn * st.v.derivative)
    rep_w = yamabe_quotient(w, jet, GEOMETRIC)
    rep_v = yamabe_quotient(abs_v, jet, GEOMETRIC)
    baseline = perturbed_quotient(st.u, jet, beta0)
    if rep_v.passed and not rep_w.passed:
        phi, rep, branch = abs_v, rep_v, "abs_v"
    else:
        phi, rep, branch = w, rep_w, "u_plus_v"
    return CorrectionResult(phi, rep, branch, st.u, st.v, rep_w, rep_v, baseline, pos,
                            eps, beta0, gamma, d)


@dataclass
class ConformalCertificate:
    mean_F: float
    eps: float
    eps_bound: float
    sup_u_prime: float
    u_min: float
    u_max: float
    H_at_P: float
    bump_radius: float
    C: float

    @property
    def checks(self) -> dict:
        C = self.C
        return {
            "mean_zero": abs(self.mean_F) <= 1e-12,
            "eps_scaling": self.eps <= self.eps_bound,
            "sup_u_prime": self.sup_u_prime <= C / 8,
            "u_bounds": C / 8 <= self.u_min and self.u_max <= 3 * C / 8,
            "H_negative_at_P": self.H_at_P < 0,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checks"] = self.checks
        d["passed"] = self.passed
        return d


@dataclass
class ConformalResult:
    u: np.ndarray
    H: np.ndarray
    certificate: ConformalCertificate
    problem: TorusProblem


def _bump(problem: TorusProblem, P, C: float, r: float) -> np.ndarray:
    """f = -C (1 - S(|x - P| / r)) with S the quintic smoothstep, periodic distance."""
    n, L = problem.n, problem.side
    dist2 = np.zeros((problem.grid_shape,) * n)
    for ax in range(n):
        dx = problem.coordinates(ax) - P[ax]
        dx = dx - L * np.round(dx / L)
        dist2 = dist2 + dx * dx
    if r <= 0:
        return np.zeros_like(dist2)
    t = np.clip(np.sqrt(dist2) / r, 0.0, 1.0)
    return -C * (1.0 - t**3 * (10 - 15 * t + 6 * t * t))


def _conformal_once(n, side, m, P, C, r):
    prob = TorusProblem(n, side, m)
    f = _bump(prob, P, C, r)
    eps = -float(f.mean())
    F = f + eps
    prob.source = F
    u_prime = solve_torus_mean_zero(prob)
    return prob, f, eps, F, u_prime


def conformal_negativity(n: int = 4, side: float = 1.0, grid_shape: int = 32, C: float = 2.0,
                         bump_radius: float = 0.05, P=None, min_radius: float | None = None) -> ConformalResult:
    """Flat torus: u = u' + C/4 with -a Delta u' = f + eps, and H = u^{1-p}(-a Delta u)."""
    if not C > 1:
        raise PreconditionError("C must exceed 1")
    if n < 3:
        raise PreconditionError("need n >= 3")
    h = side / grid_shape
    P = np.zeros(n) if P is None else np.asarray(P, dtype=float)
    min_radius = h if min_radius is None else min_radius
    r = bump_radius
    prob, f, eps, F, up = _conformal_once(n, side, grid_shape, P, C, r)
    if r > 0 and np.abs(up).max() > C / 8:
        lo, hi = min_radius, r
        prob, f, eps, F, up = _conformal_once(n, side, grid_shape, P, C, lo)
        if np.abs(up).max() > C / 8:
            raise ConstructionError(
                f"sup|u'| = {np.abs(up).max():.3e} > C/8 even at the minimum radius {lo:.3e}")
        best = (prob, f, eps, F, up, lo)
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            cand = _conformal_once(n, side, grid_shape, P, C, mid)
            if np.abs(cand[4]).max() <= C / 8:
                lo, best = mid, (*cand, mid)
            else:
                hi = mid
        prob, f, eps, F, up, r = best
    u = up + C / 4
    lap = torus_laplacian(u, side)
    a = conformal_a(n)
    H = u ** (1 - critical_p(n)) * (-a * lap)
    idx = tuple(int(round(c / h)) % grid_shape for c in P)
    support = float(np.count_nonzero(f)) * h**n
    cert = ConformalCertificate(
        mean_F=float(F.mean()), eps=eps, eps_bound=C * support / side**n,
        sup_u_prime=float(np.abs(up).max()), u_min=float(u.min()), u_max=float(u.max()),
        H_at_P=float(H[idx]), bump_radius=float(r), C=float(C))
    prob.solution = up
    return ConformalResult(u, H, cert, prob)
