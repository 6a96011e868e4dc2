import math

import numpy as np
import pytest

from lsvgd.targets import GaussianMixture, bimodal_target, ring_mixture, standard_normal

from conftest import central_difference, random_gmm, rel_err

# direct summation of 0.5 N(0 | [-1,0], 0.5 I) + 0.5 N(0 | [1,0], I) with math.exp
DEFAULT_TARGET_LOGP_AT_ORIGIN = -2.2366474775516476


def test_standard_normal_log_density():
    assert standard_normal(2).log_density([0.0, 0.0]) == pytest.approx(-math.log(2 * math.pi), rel=1e-14)


def test_default_target_at_origin():
    assert bimodal_target().log_density([0.0, 0.0]) == pytest.approx(DEFAULT_TARGET_LOGP_AT_ORIGIN, rel=1e-13)


def test_symmetric_midpoint():
    t = GaussianMixture([0.5, 0.5], [[-1.0, 2.0], [1.0, 2.0]], [0.7, 0.7])
    x = np.array([0.0, 5.0])
    terms = [0.5 * np.exp(-np.sum((x - m) ** 2) / 1.4) / (2 * np.pi * 0.7) for m in t.means]
    assert terms[0] == pytest.approx(terms[1], rel=1e-15)
    assert t.log_density(x) == pytest.approx(np.log(sum(terms)), rel=1e-13)
    assert t.score(x)[0] == pytest.approx(0.0, abs=1e-15)


def test_single_component_score_and_hessian(rng):
    t = GaussianMixture([1.0], [[0.3, -0.2]], [0.5])
    for _ in range(10):
        x = rng.normal(size=2) * 3
        np.testing.assert_allclose(t.score(x), (t.means[0] - x) / 0.5, rtol=1e-14)
        np.testing.assert_array_equal(t.gmm_hessian_approx(x), -2.0 * np.eye(2))
        np.testing.assert_allclose(t.log_density_hessian(x), -2.0 * np.eye(2), atol=1e-14)


def test_score_matches_finite_differences(rng):
    for _ in range(100):
        t = random_gmm(rng, dim=int(rng.integers(1, 4)))
        x = rng.normal(0, 1.5, size=t.dim)
        fd = central_difference(t.log_density, x, h=1e-5)
        assert rel_err(t.score(x), fd, eps=1e-3) < 1e-6


def test_batch_matches_pointwise(rng):
    t = random_gmm(rng, k=3)
    xs = rng.normal(size=(7, 2))
    np.testing.assert_allclose(t.log_density(xs), [t.log_density(x) for x in xs], rtol=1e-14)
    np.testing.assert_allclose(t.score(xs), [t.score(x) for x in xs], rtol=1e-14)


def test_exact_hessian_matches_score_differences(rng):
    for _ in range(20):
        t = random_gmm(rng)
        x = rng.normal(size=2)
        fd = np.stack([central_difference(lambda v: t.score(v)[d], x, h=1e-5) for d in range(2)])
        assert rel_err(t.log_density_hessian(x), fd, eps=1e-3) < 1e-5


def test_hard_assignment_hessian():
    t = bimodal_target()
    np.testing.assert_array_equal(t.gmm_hessian_approx(t.means[1]), -np.eye(2) / 1.0)
    np.testing.assert_array_equal(t.gmm_hessian_approx(t.means[0]), -np.eye(2) / 0.5)
    far = np.array([40.0, 0.0])
    k = int(np.argmax(t.responsibilities(far)))
    np.testing.assert_array_equal(t.gmm_hessian_approx(far), -np.eye(2) / t.variances[k])


def test_assignment_tie_breaks_low():
    t = GaussianMixture([0.5, 0.5], [[-1.0, 0.0], [1.0, 0.0]], [1.0, 1.0])
    assert t.assign(np.array([0.0, 0.0])) == 0


def test_log_density_is_finite_far_away():
    t = bimodal_target()
    assert np.isfinite(t.log_density([1e3, -1e3]))
    assert np.all(np.isfinite(t.score([[1e3, -1e3], [0, 1e4]])))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        bimodal_target().log_density([0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        bimodal_target().score([1.0])


@pytest.mark.parametrize(
    "weights, means, variances",
    [([0.5, 0.6], [[0, 0], [1, 1]], [1, 1]), ([1.0], [[0, 0]], [0.0]), ([0.5, 0.5], [[0, 0]], [1, 1])],
)
def test_invalid_mixture(weights, means, variances):
    with pytest.raises(ValueError):
        GaussianMixture(weights, means, variances)


def test_sampling():
    t = standard_normal(2)
    x = t.sample(100_000, np.random.default_rng(0))
    assert np.all(np.abs(x.mean(axis=0)) < 0.02)
    a = bimodal_target().sample(50, np.random.default_rng(7))
    b = bimodal_target().sample(50, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)
    one = GaussianMixture([1.0, 0.0], [[-5.0, 0.0], [5.0, 0.0]], [0.01, 0.01])
    _, labels = one.sample_with_labels(500, np.random.default_rng(1))
    assert np.all(labels == 0)


def test_ring_layout():
    ring = ring_mixture()
    np.testing.assert_allclose(np.linalg.norm(ring.means, axis=1), 2.0)
    assert ring.n_components == 8 and np.all(ring.variances == 0.01)
