"""Yamabe quotient, perturbed quotient and the mountain-pass reduction."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .curvature import CurvatureJet, scalar_average, volume_weight
from .errors import DomainError, OutOfValidityError
from .quadrature import RadialField, radial_integrate
from .special_functions import best_sobolev_T, conformal_a, critical_p

GEOMETRIC = "geometric"
NORMALIZED = "normalized"


@dataclass(frozen=True)
class QuotientReport:
    grad_term: float
    curvature_term: float
    perturbation_term: float
    lp_norm_sq: float
    value: float
    threshold: float
    convention: str
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "QuotientReport":
        return cls(**d)


@dataclass(frozen=True)
class QuotientTerms:
    """Metric-weighted integrals of a radial field (geometric scaling)."""

    grad: float  # a * int |u'|^2
    curvature: float  # int R u^2
    mass: float  # int u^2
    lp_norm_sq: float  # (int |u|^p)^{2/p}


def quotient_terms(field: RadialField, jet: CurvatureJet) -> QuotientTerms:
    n = jet.n
    grid = field.grid
    if grid.r > jet.validity_radius * (1 + 1e-12):
        raise OutOfValidityError(
            f"support radius {grid.r} exceeds validity radius {jet.validity_radius:.6g}"
        )
    u = field.values
    if not np.any(u != 0):
        raise DomainError("quotient of the zero field is undefined")
    s = grid.nodes
    w = volume_weight(jet, s)
    a = conformal_a(n)
    p = critical_p(n)
    grad = a * radial_integrate(field.derivative**2 * w, grid, n)
    curv = radial_integrate(scalar_average(jet, s) * u * u * w, grid, n)
    mass = radial_integrate(u * u * w, grid, n)
    lp = radial_integrate(np.abs(u) ** p * w, grid, n) ** (2.0 / p)
    return QuotientTerms(grad, curv, mass, lp)


def yamabe_quotient(field: RadialField, jet: CurvatureJet, convention: str = GEOMETRIC) -> QuotientReport:
    """(a int|grad u|^2 + int R u^2) / ||u||_p^2, or that divided by a when normalized."""
    t = quotient_terms(field, jet)
    return _report(t.grad, t.curvature, 0.0, t.lp_norm_sq, jet.n, convention)


def perturbed_quotient(field: RadialField, jet: CurvatureJet, beta: float) -> QuotientReport:
    """(||grad u||^2 + (1/a) int (R - beta) u^2) / ||u||_p^2, compared against T."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    t = quotient_terms(field, jet)
    return _report(t.grad, t.curvature, -beta * t.mass, t.lp_norm_sq, jet.n, NORMALIZED)


def _report(grad, curv, pert, lp, n, convention) -> QuotientReport:
    a = conformal_a(n)
    T = best_sobolev_T(n)
    if convention == GEOMETRIC:
        threshold = a * T
    elif convention == NORMALIZED:
        grad, curv, pert = grad / a, curv / a, pert / a
        threshold = T
    else:
        raise DomainError(f"unknown convention {convention!r}")
    value = (grad + curv + pert) / lp
    return QuotientReport(grad, curv, pert, lp, value, threshold, convention, bool(value < threshold))


def variational_terms(field: RadialField, jet: CurvatureJet, beta: float = 0.0,
                      lam: float = 1.0) -> tuple[float, float, float]:
    """V1 = a int|grad u|^2, V2 = int (-R + beta) u^2, W = (int lam |u|^p)^{1/p}."""
    t = quotient_terms(field, jet)
    p = critical_p(jet.n)
    V1 = t.grad
    V2 = -t.curvature + beta * t.mass
    W = lam ** (1.0 / p) * t.lp_norm_sq**0.5
    return V1, V2, W


def j_star(t: float, V1: float, V2: float, W: float, n: int) -> float:
    """J*(t u) = t^2 (V1 - V2) / 2 - t^p W^p / p."""
    p = critical_p(n)
    return 0.5 * t * t * (V1 - V2) - t**p * W**p / p


def critical_t0(V1: float, V2: float, W: float, n: int) -> float:
    """Maximiser of t -> J*(t u); 0.0 when V1 <= V2 (no positive critical point)."""
    if not W > 0:
        raise DomainError("W must be positive")
    if V1 <= V2:
        return 0.0
    p = critical_p(n)
    return (V1 - V2) ** (1.0 / (p - 2)) / W ** (p / (p - 2))


def mountain_pass_level(V1: float, V2: float, W: float, n: int) -> float:
    if not W > 0:
        raise DomainError("W must be positive")
    if V1 <= V2:
        return 0.0
    return (V1 - V2) ** (n / 2) / W**n / n


def kappa0(n: int, lam: float, T: float | None = None) -> float:
    if not lam > 0:
        raise DomainError("lambda must be positive")
    T = best_sobolev_T(n) if T is None else T
    a = conformal_a(n)
    return lam ** ((2 - n) / 2) * a ** (n / 2) * T ** (n / 2) / n


def j0_value(V1: float, V2: float, W: float, n: int, lam: float = 1.0) -> float:
    """(V1 - V2) / ||u||_p^2 with the unweighted Lp norm (W carries lam^{1/p})."""
    p = critical_p(n)
    return (V1 - V2) * lam ** (2.0 / p) / W**2


def threshold_check(V1: float, V2: float, W: float, n: int, lam: float = 1.0) -> bool:
    return j0_value(V1, V2, W, n, lam) < conformal_a(n) * best_sobolev_T(n)


def conformal_scalar_curvature(u, lap_u, R, n: int):
    """R_hat = u^{1-p} (-a Delta u + R u) for g_hat = u^{p-2} g."""
    u = np.asarray(u, dtype=float)
    return u ** (1 - critical_p(n)) * (-conformal_a(n) * np.asarray(lap_u) + R * u)
