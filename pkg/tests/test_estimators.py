import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlcm.errors import SingularClassMatrix
from wlcm.estimators import estimate_k, rmk, sck, spectral_norm, theta_from_svd
from wlcm.generators import fixed_instance, replicate_streams, sample_classes, sample_item_params, simulate
from wlcm.harness.scenarios import sim8_truth
from wlcm.metrics import evaluate, hamming_error, relative_theta_errors
from wlcm.model import ClassAssignment, DistributionSpec, population_matrix, profile_means
from wlcm.spectral import kmeans


def _planted(seed, N=300, K=3, kind="bernoulli", rho=0.9, J=None):
    spec = DistributionSpec.of(kind)
    return simulate(N, K, spec, rho, J, streams=replicate_streams(seed, 0))


@pytest.mark.parametrize("method", [sck, rmk])
@pytest.mark.parametrize("kind, rho", [("bernoulli", 0.9), ("poisson", 3.0), ("normal", 1.0), ("signed", 1.0)])
def test_ideal_recovery_on_population_matrix(method, kind, rho):
    inst = _planted(1, N=120, kind=kind, rho=rho)
    est = method(inst.r0, 3, rng=0)
    mv = evaluate(inst.z, inst.params.theta, est.z_hat, est.theta_hat)
    assert mv.hamming_error == 0 and mv.clustering_error == 0
    assert mv.rel_l2 <= 1e-10


def test_sck_theta_formula_equals_row_means_of_low_rank_fit():
    inst = _planted(2, N=200)
    est = sck(inst.r, 3, rng=0)
    r_hat = est.svd.reconstruct()
    np.testing.assert_allclose(est.theta_hat, profile_means(r_hat, est.z_hat), rtol=1e-10, atol=1e-12)
    # and the normal equations form V S U' Z (Z'Z)^{-1}
    Z = est.z_hat.z
    direct = r_hat.T @ Z @ np.linalg.inv(Z.T @ Z)
    np.testing.assert_allclose(est.theta_hat, direct, rtol=1e-10, atol=1e-12)


def test_rmk_theta_is_class_means():
    inst = _planted(3, N=150)
    est = rmk(inst.r, 3, rng=0)
    for k in range(3):
        np.testing.assert_allclose(est.theta_hat[:, k], inst.r.values[est.z_hat.labels == k].mean(axis=0))


def test_sck_deterministic():
    inst = _planted(4)
    a, b = sck(inst.r, 3, rng=5), sck(inst.r, 3, rng=5)
    np.testing.assert_array_equal(a.z_hat.labels, b.z_hat.labels)
    np.testing.assert_array_equal(a.theta_hat, b.theta_hat)
    assert a.method == "SCK" and a.elapsed > 0


def test_sck_low_error_at_moderate_signal():
    inst = _planted(5, N=600, rho=0.9)
    est = sck(inst.r, 3, rng=0)
    assert hamming_error(inst.z, est.z_hat) < 0.05


def test_rotation_invariance_of_partition(rng):
    """Clustering depends on the row geometry of U, not on its orientation."""
    inst = _planted(6, N=200, kind="poisson", rho=4.0)
    est = sck(inst.r, 3, rng=0)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    km = kmeans(est.svd.u @ Q, 3, rng=0)
    assert hamming_error(est.z_hat, ClassAssignment(km.labels, 3)) == 0


def test_sign_flip_of_singular_vectors_leaves_theta():
    inst = _planted(7, N=150)
    est = sck(inst.r, 3, rng=0)
    svd = est.svd
    flipped = type(svd)(svd.u * [-1, 1, -1], svd.sigma, svd.v * [-1, 1, -1])
    np.testing.assert_allclose(theta_from_svd(flipped, est.z_hat), est.theta_hat, rtol=1e-12, atol=1e-14)


def test_sck_scale_equivariance():
    # scaling R scales the item matrix and keeps the partition
    inst = _planted(8, kind="normal", rho=2.0)
    a = sck(inst.r.values, 3, rng=0)
    b = sck(inst.r.values * 10.0, 3, rng=0)
    np.testing.assert_array_equal(a.z_hat.labels, b.z_hat.labels)
    np.testing.assert_allclose(b.theta_hat, 10.0 * a.theta_hat, rtol=1e-9)


def test_empty_estimated_class_rejected():
    svd = sck(_planted(9).r, 3, rng=0).svd
    z = ClassAssignment.__new__(ClassAssignment)
    object.__setattr__(z, "labels", np.zeros(300, dtype=np.int64))
    object.__setattr__(z, "K", 3)
    with pytest.raises(SingularClassMatrix):
        theta_from_svd(svd, z)


def test_sim8_recovery():
    z, theta = sim8_truth()
    inst = fixed_instance(z, theta, DistributionSpec("normal", sigma2=1.0), 0)
    est = sck(inst.r, 2, rng=0)
    assert hamming_error(z, est.z_hat) == 0
    assert relative_theta_errors(theta, est.theta_hat)[1] < 0.02


def test_spectral_norm():
    assert spectral_norm(np.zeros((3, 3))) == 0.0
    assert spectral_norm(np.diag([1.0, -4.0, 2.0])) == pytest.approx(4.0)


def test_estimate_k_population_matrix():
    inst = _planted(10, N=300, rho=0.9)
    sel = estimate_k(inst.r0, 6, rng=0)
    assert sel.k_hat == 3
    assert sel.scores[2] <= 1e-9 * sel.scores[0]
    assert len(sel.estimates) == 6


def test_estimate_k_deterministic_and_bounds():
    inst = _planted(11, N=200)
    a = estimate_k(inst.r, 4, rng=3)
    b = estimate_k(inst.r, 4, rng=3)
    np.testing.assert_array_equal(a.scores, b.scores)
    with pytest.raises(ValueError):
        estimate_k(inst.r, 0)
    with pytest.raises(ValueError):
        estimate_k(inst.r, 41)


def test_estimate_k_tie_prefers_smaller_k():
    # a single repeated row: every k fits exactly
    r = np.tile([1.0, 2.0, 3.0], (6, 1))
    r[0, 0] += 1e-13
    sel = estimate_k(r, 3, rng=0)
    assert sel.k_hat == 1


@settings(max_examples=15)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_exact_recovery_any_planted_structure(K, seed):
    rng = np.random.default_rng(seed)
    z = sample_classes(10 * K, K, rng)
    params = sample_item_params(DistributionSpec.of("poisson"), 5 * K, K, 3.0, rng)
    r0 = population_matrix(z, params)
    est = sck(r0, K, rng=seed, n_init=3)
    assert hamming_error(z, est.z_hat) == 0
    np.testing.assert_allclose(
        relative_theta_errors(params.theta, est.theta_hat), (0.0, 0.0), atol=1e-9
    )
