import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsvgd.diagnostics import (
    KlEstimatorConfig,
    grid_kde,
    grid_kl,
    kl_particles_vs_target,
    mode_coverage,
    particle_variance,
    report,
)
from lsvgd.targets import GaussianMixture, bimodal_target, ring_mixture, standard_normal


def brute_kl(particles, target, cfg):
    """Cell-by-cell evaluation with scalar math, for a coarse grid."""
    (x0, x1), (y0, y1) = cfg.grid_bounds
    r = cfg.grid_resolution
    dx, dy = (x1 - x0) / r, (y1 - y0) / r
    h = cfg.kde_bandwidth
    q, p = [], []
    for a in range(r):
        for b in range(r):
            gx, gy = x0 + (a + 0.5) * dx, y0 + (b + 0.5) * dy
            q.append(
                sum(math.exp(-((gx - u) ** 2 + (gy - v) ** 2) / (2 * h * h)) for u, v in particles)
                / (2 * math.pi * h * h * len(particles))
            )
            p.append(math.exp(float(target.log_density(np.array([gx, gy])))))
    qs, ps = sum(q) * dx * dy, sum(p) * dx * dy
    total = 0.0
    for qi, pi in zip(q, p):
        qi, pi = qi / qs, pi / ps
        total += qi * (math.log(max(qi, cfg.density_floor)) - math.log(max(pi, cfg.density_floor))) * dx * dy
    return max(total, 0.0)


def test_kl_matches_brute_force(rng):
    cfg = KlEstimatorConfig(grid_bounds=((-3, 3), (-2, 2.5)), grid_resolution=20, kde_bandwidth=0.4)
    x = rng.uniform(-1.5, 1.5, size=(15, 2))
    t = bimodal_target()
    assert kl_particles_vs_target(x, t, cfg) == pytest.approx(brute_kl(x, t, cfg), rel=1e-9)


def test_self_consistency_default_config():
    t = bimodal_target()
    x = t.sample(10_000, np.random.default_rng(0))
    x = x[np.all(np.abs(x) < 4, axis=1)]
    assert kl_particles_vs_target(x, t) < 0.05


def test_degenerate_mass_is_far():
    assert kl_particles_vs_target(np.full((50, 2), [3.5, 3.5]), bimodal_target()) > 1.0


def test_identical_densities_give_zero(rng):
    q = rng.uniform(size=(30, 30))
    assert grid_kl(q, q.copy(), 0.01) == 0.0


def test_grid_kde_integrates_to_one():
    axes = [np.linspace(-6, 6, 241)] * 2
    mass = grid_kde(axes, np.array([[0.3, -0.2], [1.0, 0.5]]), 0.3).sum() * 0.05**2
    assert mass == pytest.approx(1.0, abs=1e-9)


def test_out_of_bounds_particle_is_named():
    x = np.zeros((5, 2))
    x[3] = [9.0, 0.0]
    with pytest.raises(ValueError, match="particle 3"):
        kl_particles_vs_target(x, bimodal_target())
    with pytest.raises(ValueError):
        kl_particles_vs_target(np.zeros((4, 3)), standard_normal(3))


def test_config_validation():
    with pytest.raises(ValueError):
        KlEstimatorConfig(grid_resolution=8)
    with pytest.raises(ValueError):
        KlEstimatorConfig(density_floor=0.0)


def test_variance_examples():
    assert particle_variance([[0.0, 0.0], [2.0, 0.0]]) == 2.0
    assert particle_variance(np.ones((6, 2))) == 0.0
    big = np.random.default_rng(3).standard_normal((100_000, 2))
    assert abs(particle_variance(big) - 2.0) < 0.05
    with pytest.raises(ValueError):
        particle_variance(np.zeros((1, 2)))


def test_coverage_examples():
    ring = ring_mixture()
    covered, fractions = mode_coverage(np.repeat(ring.means, 5, axis=0), ring)
    assert covered == 8
    np.testing.assert_allclose(fractions, 1 / 8)
    covered, _ = mode_coverage(ring.sample(8000, np.random.default_rng(1)), ring, 3.0, 0.01)
    assert covered == 8
    covered, fractions = mode_coverage(np.zeros((100, 2)), ring)
    assert covered == 0 and np.all(fractions == 0)
    with pytest.raises(ValueError):
        mode_coverage(np.zeros((3, 2)), ring, 3.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.001, 0.5), st.floats(0.001, 0.5))
def test_coverage_monotone_in_threshold(seed, a, b):
    ring = ring_mixture()
    x = np.random.default_rng(seed).normal(scale=2.0, size=(300, 2))
    lo, hi = sorted((a, b))
    assert mode_coverage(x, ring, 3.0, hi)[0] <= mode_coverage(x, ring, 3.0, lo)[0]


def test_report_fields(rng):
    t = bimodal_target()
    x = rng.normal(size=(40, 2))
    r = report(x, t, KlEstimatorConfig(), (3.0, 0.01))
    assert r.kl_estimate >= 0 and r.total_variance == particle_variance(x)
    assert r.mode_coverage[0] == 2
    assert report(x).kl_estimate is None
