"""Particle-based variational inference: SVGD and Langevin SVGD, plus a toy GAN."""

from lsvgd.errors import NumericalFailure
from lsvgd.kernels import KernelConfig, KernelMatrix, kernel, kernel_grad_wrt_first, kernel_matrix
from lsvgd.langevin import (
    LsvgdConfig,
    NoiseState,
    drift_and_correction,
    empirical_gradient_covariance,
    importance_weights,
    lsvgd_run,
    lsvgd_step,
    noise_covariance,
    regularizer_estimate,
    regularizer_monte_carlo,
)
from lsvgd.svgd import RunResult, SamplerConfig, svgd_direction, svgd_run, svgd_step
from lsvgd.targets import GaussianMixture, bimodal_target, ring_mixture, standard_normal

__all__ = [
    "GaussianMixture",
    "KernelConfig",
    "KernelMatrix",
    "LsvgdConfig",
    "NoiseState",
    "NumericalFailure",
    "RunResult",
    "SamplerConfig",
    "bimodal_target",
    "drift_and_correction",
    "empirical_gradient_covariance",
    "importance_weights",
    "kernel",
    "kernel_grad_wrt_first",
    "kernel_matrix",
    "lsvgd_run",
    "lsvgd_step",
    "noise_covariance",
    "regularizer_estimate",
    "regularizer_monte_carlo",
    "ring_mixture",
    "standard_normal",
    "svgd_direction",
    "svgd_run",
    "svgd_step",
]
