"""Standard SVGD: closed-form RKHS steepest direction and the transport step."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from lsvgd.errors import NumericalFailure
from lsvgd.kernels import KernelConfig, as_particles, kernel_matrix

Hook = Callable[[int, np.ndarray], None]


@dataclass(frozen=True)
class SamplerConfig:
    step_size: float = 1e-2
    iterations: int = 500
    kernel: KernelConfig = field(default_factory=KernelConfig)

    def __post_init__(self):
        if not self.step_size >= 0:
            raise ValueError(f"step_size must be non-negative, got {self.step_size}")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")


@dataclass
class RunResult:
    """Final particles of a run; ``error`` is set when the run stopped early."""

    particles: np.ndarray
    iterations_done: int
    error: Optional[Exception] = None


def checked_scores(target, x: np.ndarray) -> np.ndarray:
    scores = np.asarray(target.score(x), dtype=float)
    bad = ~np.all(np.isfinite(scores), axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NumericalFailure(f"non-finite score at particle {i}", index=i)
    return scores


def weighted_stein_direction(x, scores, kvals, weights, gamma):
    """sum_i w_i [k(x_i, x_j) s_i + grad_{x_i} k(x_i, x_j)] for every j.

    ``kvals`` must already have inactive pairs zeroed if truncation applies.
    """
    a = kvals * weights[:, None]  # a[i, j] = w_i k_ij
    drive = a.T @ scores
    # grad_{x_i} k(x_i, x_j) = -(2/gamma) (x_i - x_j) k_ij
    repulse = -(2.0 / gamma) * (a.T @ x - x * a.sum(axis=0)[:, None])
    return drive + repulse


def svgd_direction(particles, target, cfg: KernelConfig) -> np.ndarray:
    x = as_particles(particles)
    n = x.shape[0]
    scores = checked_scores(target, x)
    km = kernel_matrix(x, cfg)
    return weighted_stein_direction(x, scores, km.values, np.full(n, 1.0 / n), cfg.gamma)


def svgd_step(particles, target, cfg: SamplerConfig) -> np.ndarray:
    x = as_particles(particles)
    return x + cfg.step_size * svgd_direction(x, target, cfg.kernel)


def svgd_run(init, target, cfg: SamplerConfig, hook: Optional[Hook] = None) -> RunResult:
    """Apply ``cfg.iterations`` SVGD steps, calling ``hook(t, particles)`` after each."""
    if cfg.iterations < 1:
        raise ValueError("iterations must be >= 1")
    x = as_particles(init).copy()
    for t in range(cfg.iterations):
        try:
            x = svgd_step(x, target, cfg)
        except NumericalFailure as err:
            return RunResult(x, t, err)
        if hook is not None:
            hook(t, x)
    return RunResult(x, cfg.iterations)
