"""Particle diagnostics: grid KL against a known density, spread, mode coverage."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from lsvgd.kernels import as_particles
from lsvgd.targets import GaussianMixture


@dataclass(frozen=True)
class KlEstimatorConfig:
    """Regular-grid KDE estimator of KL(q_hat || p) for 2-D particles.

    ``kde_bandwidth`` is the standard deviation of the isotropic Gaussian
    smoothing kernel.
    """

    grid_bounds: Tuple[Tuple[float, float], ...] = ((-4.0, 4.0), (-4.0, 4.0))
    grid_resolution: int = 200
    kde_bandwidth: float = 0.1
    density_floor: float = 1e-12

    def __post_init__(self):
        if self.grid_resolution < 16:
            raise ValueError("grid_resolution must be >= 16")
        if not self.density_floor > 0 or not self.kde_bandwidth > 0:
            raise ValueError("density_floor and kde_bandwidth must be positive")
        for lo, hi in self.grid_bounds:
            if not hi > lo:
                raise ValueError(f"empty grid interval ({lo}, {hi})")


@dataclass
class DiagnosticsReport:
    kl_estimate: Optional[float]
    total_variance: float
    mode_coverage: Optional[Tuple[int, np.ndarray]] = None


def _grid_axes(cfg: KlEstimatorConfig):
    axes = []
    for lo, hi in cfg.grid_bounds:
        step = (hi - lo) / cfg.grid_resolution
        axes.append(lo + step * (np.arange(cfg.grid_resolution) + 0.5))
    cell_area = float(np.prod([(hi - lo) / cfg.grid_resolution for lo, hi in cfg.grid_bounds]))
    return axes, cell_area


def grid_kde(axes, particles, bandwidth):
    """Gaussian KDE on the tensor grid spanned by ``axes`` (2-D, separable)."""
    gx, gy = axes
    fx = np.exp(-0.5 * ((gx[:, None] - particles[None, :, 0]) / bandwidth) ** 2)
    fy = np.exp(-0.5 * ((gy[:, None] - particles[None, :, 1]) / bandwidth) ** 2)
    return (fx @ fy.T) / (2.0 * np.pi * bandwidth**2 * len(particles))


def grid_kl(q, p, cell_area, floor=1e-12) -> float:
    """sum q log(max(q, floor) / max(p, floor)) dA after renormalizing both over the grid."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    q = q / (q.sum() * cell_area)
    p = p / (p.sum() * cell_area)
    kl = np.sum(q * (np.log(np.maximum(q, floor)) - np.log(np.maximum(p, floor)))) * cell_area
    return max(float(kl), 0.0)


class GridKl:
    """KL(q_hat || p) estimator with the target density cached on the grid."""

    def __init__(self, target, cfg: KlEstimatorConfig = KlEstimatorConfig()):
        if len(cfg.grid_bounds) != 2 or target.dim != 2:
            raise ValueError("the grid KL estimator is defined for 2-D particles only")
        self.cfg = cfg
        self.axes, self.cell_area = _grid_axes(cfg)
        mesh = np.meshgrid(*self.axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        self.p = np.exp(target.log_density(pts)).reshape(mesh[0].shape)
        self.lo = np.array([b[0] for b in cfg.grid_bounds])
        self.hi = np.array([b[1] for b in cfg.grid_bounds])

    def __call__(self, particles) -> float:
        x = as_particles(particles)
        if x.shape[1] != 2:
            raise ValueError("the grid KL estimator is defined for 2-D particles only")
        outside = np.any((x < self.lo) | (x > self.hi), axis=1)
        if outside.any():
            i = int(np.flatnonzero(outside)[0])
            raise ValueError(f"particle {i} at {x[i].tolist()} lies outside the grid bounds")
        q = grid_kde(self.axes, x, self.cfg.kde_bandwidth)
        return grid_kl(q, self.p, self.cell_area, self.cfg.density_floor)


def kl_particles_vs_target(particles, target, cfg: KlEstimatorConfig = KlEstimatorConfig()) -> float:
    x = as_particles(particles)
    if x.shape[1] != 2:
        raise ValueError("the grid KL estimator is defined for 2-D particles only")
    return GridKl(target, cfg)(x)


def particle_variance(particles) -> float:
    """Trace of the unbiased sample covariance."""
    x = as_particles(particles)
    if x.shape[0] < 2:
        raise ValueError("particle_variance needs at least 2 particles")
    return float(np.sum(np.var(x, axis=0, ddof=1)))


def mode_coverage(samples, target: GaussianMixture, radius_multiplier: float = 3.0, min_fraction: float = 0.01):
    """Count the modes holding at least ``min_fraction`` of the samples.

    A sample belongs to mode k if it lies within ``radius_multiplier * sigma_k``
    of ``mu_k``. Returns ``(covered, fractions)``.
    """
    if not 0 < min_fraction < 1:
        raise ValueError("min_fraction must lie in (0, 1)")
    x = as_particles(samples)
    dist = np.linalg.norm(x[:, None, :] - target.means[None], axis=-1)
    near = dist <= radius_multiplier * np.sqrt(target.variances)[None]
    fractions = near.mean(axis=0)
    return int(np.count_nonzero(fractions >= min_fraction)), fractions


def report(particles, target=None, kl_cfg: Optional[KlEstimatorConfig] = None, modes: Optional[Sequence] = None):
    """Bundle KL (if a KL config is given), variance and optional coverage."""
    kl = kl_particles_vs_target(particles, target, kl_cfg) if kl_cfg is not None else None
    cov = mode_coverage(particles, target, *modes) if modes is not None else None
    return DiagnosticsReport(kl, particle_variance(particles), cov)
