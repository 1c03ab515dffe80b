import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from yamabe_lab.curvature import (MAX_RADIUS, constant_curvature_tensor, decompose_curvature,
                                  flat_jet, jet_from_json, make_jet, metric_expansion,
                                  ricci_of, scalar_average, scalar_model, symmetrize_riemann,
                                  synthetic_jet, validity_radius_for, volume_weight)
from yamabe_lab.errors import DomainError, OutOfValidityError


def sectional(n, entries):
    """Curvature tensor with R_{ijij} = k for each (i, j, k) in entries."""
    raw = np.zeros((n,) * 4)
    for i, j, k in entries:
        raw[i, j, i, j] = k
    return symmetrize_riemann(raw)


def assert_algebraic(R, tol=1e-12):
    assert np.allclose(R, -R.transpose(1, 0, 2, 3), atol=tol)
    assert np.allclose(R, -R.transpose(0, 1, 3, 2), atol=tol)
    assert np.allclose(R, R.transpose(2, 3, 0, 1), atol=tol)
    bianchi = R + np.einsum("iklj->ijkl", R) + np.einsum("iljk->ijkl", R)
    assert np.max(np.abs(bianchi)) <= tol


def test_single_sectional_entry_closure():
    k = 0.7
    R = sectional(4, [(0, 1, k)])
    assert R[0, 1, 0, 1] == pytest.approx(k) and R[1, 0, 1, 0] == pytest.approx(k)
    assert R[1, 0, 0, 1] == pytest.approx(-k) and R[0, 1, 1, 0] == pytest.approx(-k)
    mask = np.ones_like(R, dtype=bool)
    for idx in [(0, 1, 0, 1), (1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0)]:
        mask[idx] = False
    assert np.all(R[mask] == 0)


@given(st.integers(0, 10_000), st.integers(4, 7))
def test_symmetrize_is_projection(seed, n):
    raw = np.random.default_rng(seed).standard_normal((n,) * 4)
    R = symmetrize_riemann(raw)
    assert_algebraic(R)
    assert np.max(np.abs(symmetrize_riemann(R) - R)) <= 1e-14


def test_symmetrize_shape_error():
    with pytest.raises(DomainError):
        symmetrize_riemann(np.zeros((3, 3, 3)))


def test_flat_decomposition():
    ric, scal, weyl = decompose_curvature(np.zeros((4,) * 4))
    assert np.all(ric == 0) and scal == 0 and np.all(weyl == 0)


@pytest.mark.parametrize("n", range(4, 9))
@pytest.mark.parametrize("kappa", [-2.0, -0.3, 0.5, 3.0])
def test_constant_curvature_weyl_free(n, kappa):
    ric, scal, weyl = decompose_curvature(constant_curvature_tensor(n, kappa))
    assert scal == pytest.approx(n * (n - 1) * kappa, rel=1e-14)
    assert np.max(np.abs(weyl)) <= 1e-12


def test_constant_curvature_n4_scalar():
    _, scal, _ = decompose_curvature(constant_curvature_tensor(4, 0.25))
    assert scal == pytest.approx(3.0)


def test_single_sectional_is_not_conformally_flat():
    _, _, weyl = decompose_curvature(sectional(4, [(0, 1, 1.0)]))
    assert np.max(np.abs(weyl)) > 0.1


def test_decompose_rejects_low_dimension():
    with pytest.raises(DomainError):
        decompose_curvature(np.zeros((3,) * 4))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_weyl_trace_free_random(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(100):
        R = symmetrize_riemann(rng.standard_normal((n,) * 4))
        ric, scal, weyl = decompose_curvature(R)
        assert np.allclose(ric, ricci_of(R)) and scal == pytest.approx(np.trace(ric), abs=1e-12)
        for a, b in itertools.combinations(range(4), 2):
            assert np.max(np.abs(np.trace(weyl, axis1=a, axis2=b))) <= 1e-10


def test_metric_expansion_flat_and_origin():
    jet = flat_jet(4)
    s = metric_expansion(jet, [0.3, -0.2, 0.1, 0.5])
    assert np.array_equal(s.inverse_metric, np.eye(4)) and s.sqrt_det == 1.0
    j = synthetic_jet(5, 2, -1.0, 0.1)
    s0 = metric_expansion(j, np.zeros(5))
    assert np.array_equal(s0.inverse_metric, np.eye(5)) and s0.sqrt_det == 1.0


def test_metric_expansion_sectional():
    k, t = 0.4, 0.5
    jet = make_jet(sectional(4, [(0, 1, k)]))
    s = metric_expansion(jet, [0, t, 0, 0])
    assert s.inverse_metric[0, 0] == pytest.approx(1 - k * t * t / 3, abs=1e-15)
    assert s.sqrt_det == pytest.approx(1 - k * t * t / 6, abs=1e-15)


def test_metric_expansion_diagonal_ricci():
    # sectional curvatures k_ij give Ric_jj = sum_i k_ij
    ks = [(0, 1, 0.3), (0, 2, -0.2), (1, 3, 0.5), (2, 3, 0.1)]
    jet = make_jet(sectional(4, ks))
    lam = np.diag(jet.ricci)
    assert np.allclose(jet.ricci, np.diag(lam), atol=1e-15)
    t = 0.7
    s = metric_expansion(jet, [t, 0, 0, 0])
    assert s.sqrt_det == pytest.approx(1 - lam[0] * t * t / 6, abs=1e-15)


def test_metric_sample_invariants_inside_validity():
    jet = synthetic_jet(5, 4, -1.0, 0.1)
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = rng.standard_normal(5)
        x *= jet.validity_radius * rng.random() / np.linalg.norm(x)
        s = metric_expansion(jet, x)
        ev = np.linalg.eigvalsh(s.inverse_metric)
        assert np.allclose(s.inverse_metric, s.inverse_metric.T)
        assert ev.min() >= 0.5 - 1e-9 and ev.max() <= 1.5 + 1e-9 and s.sqrt_det > 0


def test_out_of_validity():
    jet = synthetic_jet(4, 1, -1.0, 0.1)
    x = np.zeros(4)
    x[0] = 1.01 * jet.validity_radius
    with pytest.raises(OutOfValidityError):
        metric_expansion(jet, x)
    with pytest.raises(OutOfValidityError):
        scalar_model(jet, x)


def test_scalar_model_examples():
    assert scalar_model(flat_jet(4), [0.1, 0.2, 0.3, 0.4]) == 0.0
    base = constant_curvature_tensor(4, -2.0 / 12)
    jet = make_jet(base)
    assert jet.scalar0 == pytest.approx(-2.0)
    assert scalar_model(jet, [0.3, 0, 0.1, 0]) == pytest.approx(-2.0)
    jet = make_jet(base, [1.0, 0, 0, 0])
    assert scalar_model(jet, [0.1, 0, 0, 0]) == pytest.approx(-1.9)


def test_validity_radius_examples():
    assert flat_jet(4).validity_radius == MAX_RADIUS
    jet = make_jet(sectional(4, [(0, 1, 1.0)]))
    assert np.max(np.abs(jet.riemann)) == pytest.approx(1.0)
    assert 0 < jet.validity_radius < 10
    assert validity_radius_for(jet) == pytest.approx(jet.validity_radius)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_validity_radius_scaling(seed):
    jet = synthetic_jet(5, seed, -1.0, 0.1)
    assert jet.scaled(4.0).validity_radius == pytest.approx(jet.validity_radius / 2, rel=0.1)


def test_jet_json_round_trip():
    jet = synthetic_jet(5, 9, -1.0, 0.1, grad_scale=0.2)
    back = jet_from_json(jet.to_json())
    assert np.array_equal(back.riemann, jet.riemann)
    assert np.array_equal(back.scalar_grad, jet.scalar_grad)
    assert back.scalar0 == jet.scalar0 and back.validity_radius == jet.validity_radius


def test_synthetic_jet_targets_scalar():
    for n in (4, 5, 6):
        jet = synthetic_jet(n, 0, -1.0, 0.05)
        assert jet.scalar0 == pytest.approx(-1.0, abs=1e-12) and jet.has_weyl
        assert_algebraic(jet.riemann)


def test_angular_averages():
    jet = synthetic_jet(5, 0, -1.0, 0.05, grad_scale=0.3)
    s = np.linspace(0, 1, 5)
    assert np.allclose(volume_weight(jet, s), 1 + s * s / 30)
    assert np.all(scalar_average(jet, s) == jet.scalar0)
    # Monte Carlo sphere average of sqrt det at radius 1 against 1 - scalar0 / (6n)
    rng = np.random.default_rng(5)
    d = rng.standard_normal((200_000, 5))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    vals = 1 - np.einsum("ki,ij,kj->k", d, jet.ricci, d) / 6
    assert abs(vals.mean() - volume_weight(jet, 1.0)) <= 4 * vals.std() / np.sqrt(len(vals))
