import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wlcm.errors import DomainViolation, RankDeficient, RetriesExhausted, RhoOutOfRange
from wlcm.generators import (
    SimulationDesign,
    check_full_rank,
    default_items,
    fixed_instance,
    replicate_streams,
    sample_classes,
    sample_item_params,
    sample_responses,
    simulate,
)
from wlcm.harness.scenarios import sim8_truth
from wlcm.model import DistributionSpec, population_matrix
from wlcm.spectral import top_k_svd

MOMENT_CASES = [
    ("bernoulli", {}, 0.3),
    ("binomial", {"m": 5}, 2.0),
    ("poisson", {}, 3.5),
    ("normal", {"sigma2": 2.0}, -0.7),
    ("exponential", {}, 1.7),
    ("uniform", {}, 0.9),
    ("signed", {}, -0.4),
]


@pytest.mark.parametrize("kind, params, mean", MOMENT_CASES)
def test_first_two_moments(kind, params, mean):
    spec = DistributionSpec(kind, **params)
    r0 = np.full((400, 500), mean)
    r = sample_responses(r0, spec, np.random.default_rng(7)).values
    n = r.size
    var = float(spec.variance(mean))
    assert abs(r.mean() - mean) <= 5 * np.sqrt(var / n)
    assert r.var() == pytest.approx(var, rel=0.03)


@pytest.mark.parametrize("kind, params, mean", MOMENT_CASES)
def test_support(kind, params, mean):
    spec = DistributionSpec(kind, **params)
    r = sample_responses(np.full((50, 40), mean), spec, np.random.default_rng(1)).values
    if kind == "bernoulli":
        assert set(np.unique(r)) <= {0.0, 1.0}
    elif kind == "binomial":
        assert set(np.unique(r)) <= set(map(float, range(6)))
    elif kind == "poisson":
        assert np.all(r >= 0) and np.all(r == np.round(r))
    elif kind == "exponential":
        assert np.all(r > 0)
    elif kind == "uniform":
        assert np.all((r > 0) & (r < 2 * mean))
    elif kind == "signed":
        assert set(np.unique(r)) <= {-1.0, 1.0}


def test_binomial_is_sum_of_bernoulli_draws():
    spec = DistributionSpec("binomial", m=3)
    r0 = np.full((4, 5), 1.5)
    got = sample_responses(r0, spec, np.random.default_rng(9)).values
    rng = np.random.default_rng(9)
    want = sum((rng.random(r0.shape) < 0.5).astype(float) for _ in range(3))
    np.testing.assert_array_equal(got, want)


def test_mean_matrix_entrywise(rng):
    # heterogeneous R0: column means track the population means
    theta = np.array([[0.1, 0.9], [0.5, 0.2], [0.8, 0.6]])
    z = sample_classes(20_000, 2, rng)
    r0 = population_matrix(z, theta).values
    r = sample_responses(r0, DistributionSpec.of("bernoulli"), rng).values
    for k in range(2):
        rows = z.labels == k
        np.testing.assert_allclose(r[rows].mean(axis=0), theta[:, k], atol=0.02)


@pytest.mark.parametrize(
    "kind, bad",
    [("bernoulli", 1.2), ("poisson", -0.5), ("exponential", 0.0), ("uniform", -1.0), ("signed", 1.5)],
)
def test_domain_violation_reports_location(kind, bad):
    r0 = np.full((3, 4), 0.5)
    r0[2, 1] = bad
    with pytest.raises(DomainViolation) as info:
        sample_responses(r0, DistributionSpec.of(kind), 0)
    assert (info.value.i, info.value.j) == (2, 1)


def test_sample_classes_nonempty(rng):
    for N, K in [(3, 3), (10, 4), (1000, 3)]:
        z = sample_classes(N, K, rng)
        assert z.sizes.min() >= 1 and z.N == N


def test_sample_classes_retries_exhausted():
    # N = K = 12: a draw covers every class with probability 12!/12^12
    with pytest.raises(RetriesExhausted):
        sample_classes(12, 12, 0)


def test_sample_classes_rejects_small_n():
    with pytest.raises(ValueError):
        sample_classes(2, 3, 0)


@pytest.mark.parametrize("kind", ["bernoulli", "poisson", "normal", "signed", "uniform"])
def test_item_params_scaling(kind, rng):
    spec = DistributionSpec.of(kind)
    p = sample_item_params(spec, 40, 3, 0.8, rng)
    assert p.rho == 0.8
    assert np.max(np.abs(p.b)) == 1.0
    np.testing.assert_allclose(p.theta, 0.8 * p.b, rtol=1e-15)
    if kind in ("normal", "signed"):
        assert p.b.min() < 0
    else:
        assert p.b.min() >= 0


def test_item_params_rho_checked():
    with pytest.raises(RhoOutOfRange):
        sample_item_params(DistributionSpec.of("bernoulli"), 10, 2, 1.5, 0)


def test_full_rank_check():
    check_full_rank(np.eye(3))
    with pytest.raises(RankDeficient):
        check_full_rank(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(RankDeficient):
        check_full_rank(np.ones((1, 2)))


def test_default_items():
    assert default_items(500) == 100
    assert default_items(504) == 100
    assert default_items(4) == 0


def test_design_validation():
    spec = DistributionSpec.of("poisson")
    assert SimulationDesign(300, 3, spec, 1.0).J == 60
    with pytest.raises(ValueError):
        SimulationDesign(10, 3, spec, 1.0)  # J = 2 < K


def test_simulate_deterministic():
    spec = DistributionSpec.of("poisson")
    a = simulate(200, 3, spec, 2.0, streams=replicate_streams(5, 3))
    b = simulate(200, 3, spec, 2.0, streams=replicate_streams(5, 3))
    np.testing.assert_array_equal(a.r.values, b.r.values)
    np.testing.assert_array_equal(a.z.labels, b.z.labels)
    c = simulate(200, 3, spec, 2.0, streams=replicate_streams(5, 4))
    assert not np.array_equal(a.r.values, c.r.values)


def test_streams_are_independent():
    s1, s2 = replicate_streams(0, 0), replicate_streams(0, 0)
    s1["responses"].random(1000)
    assert s1["classes"].integers(1 << 30) == s2["classes"].integers(1 << 30)


def test_common_random_numbers_across_rho():
    spec = DistributionSpec.of("poisson")
    a = simulate(150, 3, spec, 1.0, streams=replicate_streams(0, 2))
    b = simulate(150, 3, spec, 5.0, streams=replicate_streams(0, 2))
    np.testing.assert_array_equal(a.z.labels, b.z.labels)
    np.testing.assert_array_equal(a.params.b, b.params.b)


def test_simulate_with_design():
    d = SimulationDesign(100, 2, DistributionSpec.of("bernoulli"), 0.5)
    inst = simulate(d, streams=replicate_streams(0, 0))
    assert inst.r.values.shape == (100, 20)
    np.testing.assert_array_equal(inst.r0.values, population_matrix(inst.z, inst.params).values)


def test_fixed_instance_sim8():
    z, theta = sim8_truth()
    inst = fixed_instance(z, theta, DistributionSpec("normal", sigma2=1.0), 0)
    assert inst.params.rho == 100.0
    assert inst.r.values.shape == (16, 10)
    assert np.abs(inst.r.values - inst.r0.values).max() < 6


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_identifiability(K, seed):
    """Rows of the population matrix agree exactly when the classes agree."""
    rng = np.random.default_rng(seed)
    z = sample_classes(4 * K, K, rng)
    params = sample_item_params(DistributionSpec.of("poisson"), 3 * K, K, 2.0, rng)
    r0 = population_matrix(z, params).values
    same_row = (r0[:, None, :] == r0[None, :, :]).all(axis=2)
    same_class = z.labels[:, None] == z.labels[None, :]
    np.testing.assert_array_equal(same_row, same_class)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_population_factorization(K, seed):
    """R0 = U Sigma V' with U = Z X: equal classes give equal rows of U and distinct classes distinct rows."""
    rng = np.random.default_rng(seed)
    z = sample_classes(6 * K, K, rng)
    params = sample_item_params(DistributionSpec.of("bernoulli"), 4 * K, K, 0.9, rng)
    r0 = population_matrix(z, params).values
    u = top_k_svd(r0, K).u
    first = np.array([np.flatnonzero(z.labels == k)[0] for k in range(K)])
    X = u[first]
    np.testing.assert_allclose(u, X[z.labels], atol=1e-9)
    # distinct classes sit at distance sqrt(1/n_k + 1/n_l)
    sizes = z.sizes
    for k in range(K):
        for l in range(k + 1, K):
            d = np.linalg.norm(X[k] - X[l])
            assert d == pytest.approx(np.sqrt(1 / sizes[k] + 1 / sizes[l]), rel=1e-8)
