"""Curvature jets at a point and the second-order normal-coordinate metric model."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, OutOfValidityError

MAX_RADIUS = 1.0e3
_TOL = 1e-12


def symmetrize_riemann(raw: np.ndarray) -> np.ndarray:
    """Project a rank-4 array onto algebraic curvature tensors.

    The entries R_{ijkl} with i<j, k<l and (i,j) <= (k,l) are taken as the
    independent components and copied to their orbit under the pair
    symmetries; the totally antisymmetric part is then removed so the first
    Bianchi identity holds. The map is linear and idempotent.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 4 or len(set(raw.shape)) != 1:
        raise DomainError(f"expected an n^4 array, got shape {raw.shape}")
    n = raw.shape[0]
    R = np.zeros_like(raw)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for (i, j), (k, l) in itertools.combinations_with_replacement(pairs, 2):
        v = raw[i, j, k, l]
        for (a, b), (c, d) in (((i, j), (k, l)), ((k, l), (i, j))):
            R[a, b, c, d] = v
            R[b, a, c, d] = -v
            R[a, b, d, c] = -v
            R[b, a, d, c] = v
    cyc = (R + np.einsum("iklj->ijkl", R) + np.einsum("iljk->ijkl", R)) / 3.0
    return R - cyc


def ricci_of(riemann: np.ndarray) -> np.ndarray:
    return np.einsum("ijil->jl", riemann)


def kulkarni_nomizu(h: np.ndarray, k: np.ndarray) -> np.ndarray:
    return (
        np.einsum("ik,jl->ijkl", h, k)
        + np.einsum("jl,ik->ijkl", h, k)
        - np.einsum("il,jk->ijkl", h, k)
        - np.einsum("jk,il->ijkl", h, k)
    )


def decompose_curvature(riemann: np.ndarray, n: int | None = None):
    """Return (ricci, scalar0, weyl) for a valid curvature tensor at a point with flat metric."""
    riemann = np.asarray(riemann, dtype=float)
    n = riemann.shape[0] if n is None else n
    if riemann.shape != (n,) * 4:
        raise DomainError(f"riemann shape {riemann.shape} does not match n={n}")
    if n <= 3:
        raise DomainError("Weyl tensor vanishes identically for n <= 3")
    ric = ricci_of(riemann)
    scal = float(np.trace(ric))
    g = np.eye(n)
    schouten = (ric - scal / (2.0 * (n - 1)) * g) / (n - 2)
    weyl = riemann - kulkarni_nomizu(schouten, g)
    return ric, scal, weyl


def constant_curvature_tensor(n: int, kappa: float) -> np.ndarray:
    g = np.eye(n)
    return kappa * (np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g))


@dataclass(frozen=True)
class MetricSample:
    inverse_metric: np.ndarray
    sqrt_det: float
    point: np.ndarray


@dataclass(frozen=True)
class CurvatureJet:
    n: int
    riemann: np.ndarray = field(repr=False)
    ricci: np.ndarray = field(repr=False)
    scalar0: float
    scalar_grad: np.ndarray
    weyl: np.ndarray = field(repr=False)
    validity_radius: float

    @property
    def weyl_norm(self) -> float:
        return float(np.max(np.abs(self.weyl)))

    @property
    def has_weyl(self) -> bool:
        return self.weyl_norm > 1e-10

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "riemann": [float(x) for x in self.riemann.ravel()],
            "scalar_grad": [float(x) for x in self.scalar_grad],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def scaled(self, c: float) -> "CurvatureJet":
        return make_jet(c * self.riemann, c * self.scalar_grad)


def make_jet(riemann, scalar_grad=None, max_radius: float = MAX_RADIUS) -> CurvatureJet:
    """Build a jet; Ricci, scalar and Weyl parts are always recomputed."""
    riemann = np.asarray(riemann, dtype=float)
    n = riemann.shape[0]
    if riemann.shape != (n,) * 4:
        raise DomainError(f"riemann must be n^4, got {riemann.shape}")
    grad = np.zeros(n) if scalar_grad is None else np.asarray(scalar_grad, dtype=float)
    if grad.shape != (n,):
        raise DomainError(f"scalar_grad must have length {n}")
    ric, scal, weyl = decompose_curvature(riemann, n)
    radius = _validity_radius(riemann, ric, max_radius)
    return CurvatureJet(n, riemann, ric, scal, grad, weyl, radius)


def jet_from_dict(d: dict) -> CurvatureJet:
    n = int(d["n"])
    R = np.asarray(d["riemann"], dtype=float).reshape((n,) * 4)
    return make_jet(R, d.get("scalar_grad"))


def jet_from_json(text: str) -> CurvatureJet:
    return jet_from_dict(json.loads(text))


def flat_jet(n: int) -> CurvatureJet:
    return make_jet(np.zeros((n,) * 4))


def synthetic_jet(n: int, seed: int, target_scalar0: float | None = None,
                  weyl_scale: float = 0.1, grad_scale: float = 0.0) -> CurvatureJet:
    """Seeded random curvature tensor, shifted by a constant-curvature term to hit target_scalar0."""
    rng = np.random.default_rng(seed)
    R = weyl_scale * symmetrize_riemann(rng.standard_normal((n,) * 4))
    if target_scalar0 is not None:
        scal = float(np.trace(ricci_of(R)))
        R = R + constant_curvature_tensor(n, (target_scalar0 - scal) / (n * (n - 1)))
    grad = grad_scale * rng.standard_normal(n)
    return make_jet(R, grad)


def _check_radius(jet: CurvatureJet, x: np.ndarray) -> None:
    if np.linalg.norm(x) > jet.validity_radius * (1 + _TOL):
        raise OutOfValidityError(
            f"|x| = {np.linalg.norm(x):.6g} exceeds validity radius {jet.validity_radius:.6g}"
        )


def metric_expansion(jet: CurvatureJet, x) -> MetricSample:
    """g^{ij} = delta_ij - R_{irjs} x^r x^s / 3 and sqrt det g = 1 - Ric(x, x) / 6."""
    x = np.asarray(x, dtype=float)
    _check_radius(jet, x)
    ginv = np.eye(jet.n) - np.einsum("irjs,r,s->ij", jet.riemann, x, x) / 3.0
    sqrt_det = 1.0 - float(x @ jet.ricci @ x) / 6.0
    return MetricSample(ginv, sqrt_det, x)


def scalar_model(jet: CurvatureJet, x) -> float:
    x = np.asarray(x, dtype=float)
    _check_radius(jet, x)
    return jet.scalar0 + float(jet.scalar_grad @ x)


def _probe_directions(n: int) -> np.ndarray:
    rng = np.random.default_rng(12345)
    dirs = [np.eye(n)]
    diag = []
    for i, j in itertools.combinations(range(n), 2):
        for sgn in (1.0, -1.0):
            v = np.zeros(n)
            v[i], v[j] = 1.0, sgn
            diag.append(v / np.sqrt(2))
    if diag:
        dirs.append(np.array(diag))
    r = rng.standard_normal((4000, n))
    dirs.append(r / np.linalg.norm(r, axis=1, keepdims=True))
    return np.vstack(dirs)


def _validity_radius(riemann, ricci, max_radius: float = MAX_RADIUS) -> float:
    n = riemann.shape[0]
    dirs = _probe_directions(n)
    M = np.einsum("irjs,kr,ks->kij", riemann, dirs, dirs) / 3.0
    eig = np.linalg.eigvalsh(M)
    ric = np.einsum("ki,ij,kj->k", dirs, ricci, dirs) / 6.0

    def ok(r: float) -> bool:
        r2 = r * r
        ev = 1.0 - r2 * eig
        sd = 1.0 - r2 * ric
        return bool(ev.min() >= 0.5 and ev.max() <= 1.5 and sd.min() >= 0.5 and sd.max() <= 1.5)

    if ok(max_radius):
        return max_radius
    lo, hi = 0.0, max_radius
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return lo


def validity_radius_for(jet: CurvatureJet, max_radius: float = MAX_RADIUS) -> float:
    return _validity_radius(jet.riemann, jet.ricci, max_radius)


def volume_weight(jet: CurvatureJet, s):
    """Angular average of sqrt det g on the sphere of radius s: 1 - scalar0 s^2 / (6n)."""
    s = np.asarray(s, dtype=float)
    return 1.0 - jet.scalar0 * s * s / (6.0 * jet.n)


def scalar_average(jet: CurvatureJet, s):
    """Angular average of the scalar model; the gradient term is odd and averages to zero."""
    return np.full_like(np.asarray(s, dtype=float), jet.scalar0)
