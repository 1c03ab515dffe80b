import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import iv

from yamabe_lab.curvature import synthetic_jet
from yamabe_lab.elliptic import (RadialOperator, TorusProblem, correction_rhs,
                                 laplacian_identity_check, positivity_check, radial_laplacian,
                                 radial_operator, solve_ball_neumann, solve_radial_dirichlet,
                                 solve_torus_mean_zero, torus_laplacian)
from yamabe_lab.errors import CompatibilityError, DomainError
from yamabe_lab.quadrature import RadialField, uniform_grid
from yamabe_lab.special_functions import conformal_a
from yamabe_lab.test_functions import AubinProfile, aubin_field


def const_op(grid, n, q):
    return RadialOperator(grid, n, conformal_a(n), np.full(len(grid.nodes), float(q)))


def test_zero_rhs_gives_zero():
    grid = uniform_grid(1.0, 200)
    v = solve_radial_dirichlet(const_op(grid, 5, 1.0), np.zeros(201))
    assert np.all(v.values == 0)


def manufactured_error(n, N, r=1.0, q=1.0):
    grid = uniform_grid(r, N)
    s = grid.nodes
    v = r * r - s * s
    a = conformal_a(n)
    rhs = -a * (-2.0 * n) + q * v  # Delta (r^2 - s^2) = -2n
    sol = solve_radial_dirichlet(const_op(grid, n, q), rhs)
    return np.max(np.abs(sol.values - v))


def manufactured_error_smooth(n, N, r=1.0, q=2.0):
    grid = uniform_grid(r, N)
    s = grid.nodes
    k = np.pi / (2 * r)
    v = np.cos(k * s)
    # Delta cos(ks) = -k^2 cos - (n-1) k sin(ks) / s
    with np.errstate(invalid="ignore", divide="ignore"):
        lap = -k * k * v - (n - 1) * k * np.where(s > 0, np.sin(k * s) / np.where(s > 0, s, 1), k)
    rhs = -conformal_a(n) * lap + q * v
    sol = solve_radial_dirichlet(const_op(grid, n, q), rhs)
    return np.max(np.abs(sol.values - v))


def test_manufactured_quadratic_recovered():
    # the flux-form stencil is exact on s^2 except in the first cell
    assert manufactured_error(5, 100) <= 1e-3


@pytest.mark.parametrize("n", [4, 5, 6])
def test_manufactured_second_order(n):
    e = [manufactured_error_smooth(n, N) for N in (50, 100, 200, 400)]
    orders = np.log2(np.array(e[:-1]) / np.array(e[1:]))
    assert np.all(orders >= 1.9)
    assert e[1] / e[2] == pytest.approx(4.0, rel=0.1)


def test_bessel_oracle_n5():
    n, r, q, N = 5, 1.0, 3.0, 4000
    a = conformal_a(n)
    k = np.sqrt(q / a)
    nu = (n - 2) / 2
    s = uniform_grid(r, N).nodes
    shape = lambda x: np.where(x > 0, iv(nu, k * x) / np.where(x > 0, (k * x) ** nu, 1), 1 / (2**nu * np.exp(np.log(np.pi) * 0) * __import__("math").gamma(nu + 1)))
    exact = 1 / q * (1 - shape(s) / shape(np.array(r)))
    sol = solve_radial_dirichlet(const_op(uniform_grid(r, N), n, q), np.ones(N + 1))
    assert np.max(np.abs(sol.values - exact)) <= 1e-6


def test_rhs_must_be_finite():
    grid = uniform_grid(1.0, 10)
    b = np.ones(11)
    b[3] = np.nan
    with pytest.raises(DomainError):
        solve_radial_dirichlet(const_op(grid, 4, 1.0), b)


def test_maximum_principle_negative_scalar():
    jet = synthetic_jet(5, 0, -1.0, 0.02)
    grid = uniform_grid(1.0, 500)
    op = radial_operator(jet, grid)
    rng = np.random.default_rng(0)
    for _ in range(10):
        rhs = np.abs(rng.standard_normal(501))
        rhs[rng.integers(0, 500, 100)] = 0.0
        v = solve_radial_dirichlet(op, rhs)
        assert np.all(v.values[:-1] > 0)


def test_correction_rhs_examples():
    grid = uniform_grid(0.5, 400)
    s = grid.nodes
    n = 5
    jet = synthetic_jet(n, 0, -1.0, 0.02)
    op = radial_operator(jet, grid)
    one = RadialField(grid, np.ones_like(s), np.zeros_like(s), np.zeros_like(s))
    assert np.allclose(correction_rhs(one, op, 0.3).values, 0.0, atol=1e-15)
    u = aubin_field(AubinProfile(n, 1e-3, 0.5), grid)
    small = correction_rhs(u, op, 1e-9).values
    assert np.allclose(small, conformal_a(n) * u.laplacian, rtol=1e-6)
    rhs = correction_rhs(u, op, 0.02)
    assert np.all(np.isfinite(rhs.values)) and np.isfinite(rhs.values[0])
    with pytest.raises(DomainError):
        correction_rhs(u, op, 1.0)
    with pytest.raises(DomainError):
        correction_rhs(RadialField(grid, u.values, u.derivative), op, 0.1)


def test_discrete_correction_makes_sum_solve_discrete_problem():
    n = 5
    jet = synthetic_jet(n, 0, -1.0, 0.02)
    grid = uniform_grid(1.0, 2000)
    u = aubin_field(AubinProfile(n, 1e-2, 1.0), grid)
    op = radial_operator(jet, grid)
    v = solve_radial_dirichlet(op, correction_rhs(u, op, 0.03, laplacian="discrete"))
    w = u.values + v.values
    R = -op.potential
    target = -R[:-1] * u.values[:-1] ** 0.97
    assert np.allclose(op.apply(w), target, rtol=1e-8, atol=1e-8 * np.abs(target).max())


def test_positivity_examples():
    grid = uniform_grid(1.0, 10)
    s = grid.nodes
    good = RadialField(grid, 1 - s * s + 1e-3, -2 * s)
    assert positivity_check(good).positive
    vals = 1 - s * s
    vals[4] = 0.0
    res = positivity_check(RadialField(grid, vals, -2 * s))
    assert not res and res.min_location == pytest.approx(0.4) and res.min_value == 0.0


def test_torus_single_mode():
    prob = TorusProblem(4, 2.0, 16)
    x = prob.coordinates(0)
    F = np.broadcast_to(np.cos(2 * np.pi * x / 2.0), (16,) * 4).copy()
    prob.source = F
    u = solve_torus_mean_zero(prob)
    want = (2.0 / (2 * np.pi)) ** 2 * F / conformal_a(4)
    assert np.max(np.abs(u - want)) <= 1e-12


def test_torus_zero_and_random():
    prob = TorusProblem(3, 1.0, 12)
    prob.source = np.zeros((12,) * 3)
    assert np.all(solve_torus_mean_zero(prob) == 0)
    F = np.random.default_rng(1).standard_normal((12,) * 3)
    F -= F.mean()
    prob.source = F
    u = solve_torus_mean_zero(prob)
    assert abs(u.mean()) <= 1e-14
    res = -conformal_a(3) * torus_laplacian(u, 1.0) - F
    assert np.max(np.abs(res)) <= 1e-10 * np.max(np.abs(F))


def test_torus_compatibility():
    prob = TorusProblem(3, 1.0, 8)
    prob.source = np.ones((8,) * 3)
    with pytest.raises(CompatibilityError):
        solve_torus_mean_zero(prob)


def test_ball_neumann_examples():
    grid = uniform_grid(1.0, 200)
    assert np.all(solve_ball_neumann(np.zeros(201), grid, 4).values == 0)
    with pytest.raises(CompatibilityError):
        solve_ball_neumann(np.full(201, 0.1), grid, 4)


@pytest.mark.parametrize("n", [4, 5])
def test_ball_neumann_manufactured(n):
    errs = []
    for N in (100, 200, 400):
        grid = uniform_grid(1.0, N)
        s = grid.nodes
        k = np.pi
        ustar = np.cos(k * s)
        with np.errstate(invalid="ignore", divide="ignore"):
            lap = -k * k * ustar - (n - 1) * k * np.where(s > 0, np.sin(k * s) / np.where(s > 0, s, 1), k)
        F = -conformal_a(n) * lap
        sol = solve_ball_neumann(F, grid, n)
        # remove the mean of ustar with the same discrete volume weights
        diff = sol.values - ustar
        errs.append(np.max(np.abs(diff - np.median(diff))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_laplacian_identity_origin_and_order():
    chk = laplacian_identity_check(4, 1e-3)
    assert chk.origin_exact == -16.0
    assert chk.origin_value == pytest.approx(-16.0, rel=1e-5)
    assert chk.observed_order >= 1.9


@given(st.integers(4, 8), st.sampled_from([0.5, 1.0, 2.0]))
def test_radial_laplacian_second_order(n, r):
    errs = []
    for N in (200, 400):
        grid = uniform_grid(r, N)
        s = grid.nodes
        v = np.exp(-s * s)
        exact = (4 * s * s - 2 * n) * v
        errs.append(np.max(np.abs(radial_laplacian(v, grid, n) - exact[:-1])))
    assert errs[0] / errs[1] >= 2**1.9
