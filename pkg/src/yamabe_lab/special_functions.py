"""Gamma/Beta constants, best Sobolev constant and the bubble moments.

All moments reduce to

    I(n, k, m) = int_{R^n} |y|^{2k} (1 + |y|^2)^{-m} dy = (omega_n / 2) B(n/2 + k, m - n/2 - k)

after s = tan(theta), using int_0^{pi/2} sin^{2a-1} cos^{2b-1} = B(a, b) / 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def beta_fn(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_fn requires a, b > 0, got {a}, {b}")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def conformal_a(n: int) -> float:
    """a = 4(n-1)/(n-2), the coefficient of the conformal Laplacian."""
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    return 4.0 * (n - 1) / (n - 2)


def critical_p(n: int) -> float:
    """p = 2n/(n-2), the critical Sobolev exponent."""
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    return 2.0 * n / (n - 2)


def sphere_area(n: int) -> float:
    """Area of the unit (n-1)-sphere in R^n."""
    if n < 2:
        raise DomainError(f"sphere_area requires n >= 2, got {n}")
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def best_sobolev_T(n: int) -> float:
    """Best constant T in ||u||_p^2 T <= ||grad u||_2^2 on R^n."""
    if n < 3:
        raise DomainError(f"best_sobolev_T requires n >= 3, got {n}")
    return math.pi * n * (n - 2) * (math.gamma(n / 2) / math.gamma(n)) ** (2.0 / n)


def bubble_integral(n: int, k: float, m: float) -> float:
    """int_{R^n} |y|^{2k} / (1+|y|^2)^m dy, math.inf when it diverges at infinity."""
    a = n / 2 + k
    b = m - n / 2 - k
    if a <= 0:
        raise DomainError("integrand not integrable at the origin")
    if b <= 0:
        return math.inf
    return 0.5 * sphere_area(n) * beta_fn(a, b)


@dataclass(frozen=True)
class MomentSet:
    n: int
    K1: float
    K2: float
    K3: float
    T: float
    omega_n: float

    @property
    def k3_infinite(self) -> bool:
        return math.isinf(self.K3)


def k_moments(n: int) -> MomentSet:
    if n < 4:
        raise DomainError(f"k_moments requires n >= 4, got {n}")
    p = critical_p(n)
    K1 = (n - 2) ** 2 * bubble_integral(n, 1, n)
    K2 = bubble_integral(n, 0, n) ** (2.0 / p)
    K3 = bubble_integral(n, 0, n - 2)
    return MomentSet(n=n, K1=K1, K2=K2, K3=K3, T=best_sobolev_T(n), omega_n=sphere_area(n))


def moment_ratio(n: int) -> float:
    """int |y|^2/(1+|y|^2)^n  divided by  int 1/(1+|y|^2)^(n-2)."""
    if n <= 4:
        raise DomainError(f"moment_ratio requires n >= 5, got {n}")
    return n * (n - 4) / (4.0 * (n - 1) * (n - 2))


def duplication_residual(n: int) -> float:
    """(n-2) - T K2^{-2/(n-2)} / n, which vanishes identically."""
    if n < 4:
        raise DomainError(f"duplication_residual requires n >= 4, got {n}")
    m = k_moments(n)
    return (n - 2) - m.T * m.K2 ** (-2.0 / (n - 2)) / n


def legendre_duplication_residual(z: float) -> float:
    """Relative residual of Gamma(z)Gamma(z+1/2) = 2^{1-2z} sqrt(pi) Gamma(2z)."""
    lhs = math.gamma(z) * math.gamma(z + 0.5)
    rhs = 2.0 ** (1 - 2 * z) * math.sqrt(math.pi) * math.gamma(2 * z)
    return abs(lhs - rhs) / abs(rhs)
