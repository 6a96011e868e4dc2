"""Gaussian kernel k(x, y) = exp(-||x - y||^2 / gamma) and its batched forms."""

from dataclasses import dataclass

import numpy as np

DEFAULT_TRUNCATION = 1e-3


@dataclass(frozen=True)
class KernelConfig:
    """Bandwidth and truncation threshold.

    Kernel values at or below ``truncation_threshold`` are outside the active
    neighborhood of a particle. The threshold acts on kernel *values*; no
    radius is ever materialized.
    """

    gamma: float = 0.01
    truncation_threshold: float = DEFAULT_TRUNCATION

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0 <= self.truncation_threshold < 1:
            raise ValueError(
                f"truncation_threshold must lie in [0, 1), got {self.truncation_threshold}"
            )


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray
    active_mask: np.ndarray


def _pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def kernel(x, y, cfg: KernelConfig) -> float:
    x, y = _pair(x, y)
    return float(np.exp(-np.sum((x - y) ** 2) / cfg.gamma))


def kernel_grad_wrt_first(x, y, cfg: KernelConfig) -> np.ndarray:
    """Gradient of k(x, y) with respect to x: -(2/gamma) (x - y) k(x, y)."""
    x, y = _pair(x, y)
    diff = x - y
    return -(2.0 / cfg.gamma) * diff * np.exp(-np.sum(diff**2) / cfg.gamma)


def as_particles(particles) -> np.ndarray:
    """Validate and return an (n, D) float array."""
    x = np.asarray(particles, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"particles must have shape (n>=1, D>=1), got {x.shape}")
    return x


def coordinate_sq_diffs(x: np.ndarray):
    """Per-coordinate ``(x_i - x_j)^2`` matrices, one ``(n, n)`` array per dimension."""
    return [(x[:, d, None] - x[None, :, d]) ** 2 for d in range(x.shape[1])]


def squared_distances(x: np.ndarray, sq_diffs=None) -> np.ndarray:
    parts = coordinate_sq_diffs(x) if sq_diffs is None else sq_diffs
    return sum(parts[1:], parts[0].copy())


def kernel_matrix(particles, cfg: KernelConfig, sq_diffs=None) -> KernelMatrix:
    x = as_particles(particles)
    values = np.exp(-squared_distances(x, sq_diffs) / cfg.gamma)
    return KernelMatrix(values=values, active_mask=values > cfg.truncation_threshold)
