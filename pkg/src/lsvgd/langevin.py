"""Langevin SVGD.

Each iteration moves particles by an importance-weighted Stein direction and
adds per-particle Gaussian noise whose covariance follows the SGMCMC recipe
Sigma(x) = delta (2 B(x) - delta V(x)) with B(x) = b(x) I:

1. kernel matrix and active mask,
2. importance weights over the noise-smoothed mixture q_eps (previous Sigma),
3. drift scalar b and correction Gamma,
4. diagonal empirical score covariance V over the active neighborhood,
5. new Sigma (clamped at 0),
6. noise eps_j ~ N(0, diag Sigma_j), drawn in particle order,
7. x_j <- x_j + delta sum_i w_i [k_ij s_i + grad_{x_i} k_ij] + eps_j.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from lsvgd import seeding
from lsvgd.errors import NumericalFailure
from lsvgd.kernels import KernelConfig, KernelMatrix, as_particles, coordinate_sq_diffs, kernel_matrix
from lsvgd.svgd import RunResult, SamplerConfig, checked_scores, weighted_stein_direction
from lsvgd.targets import LOG_2PI, GaussianMixture


@dataclass(frozen=True)
class LsvgdConfig:
    """LSVGD settings on top of a :class:`SamplerConfig`.

    ``init_sigma0`` is the bootstrap noise scale for iteration 0 (covariance
    ``init_sigma0**2 I``); ``None`` means ``sqrt(2 * step_size)``.
    ``variance_floor`` lower-bounds the q_eps component variances, since a
    clamped Sigma entry would otherwise make its component a point mass.
    ``uniform_weights`` and ``inject_noise`` exist for ablations and the
    reduction to plain SVGD.
    """

    base: SamplerConfig = field(default_factory=SamplerConfig)
    init_sigma0: Optional[float] = None
    v_hat_min_neighbors: int = 2
    variance_floor: float = 1e-3
    uniform_weights: bool = False
    inject_noise: bool = True

    def __post_init__(self):
        if self.init_sigma0 is not None and not self.init_sigma0 > 0:
            raise ValueError("init_sigma0 must be positive")
        if self.v_hat_min_neighbors < 2:
            raise ValueError("v_hat_min_neighbors must be >= 2")
        if not self.variance_floor > 0:
            raise ValueError("variance_floor must be positive")

    @property
    def sigma0(self) -> float:
        if self.init_sigma0 is not None:
            return self.init_sigma0
        return float(np.sqrt(2.0 * self.base.step_size))


@dataclass
class NoiseState:
    """Per-particle noise machinery of one iteration.

    ``sigmas`` is the diagonal of Sigma(x_j) (the only part carried into the
    next iteration); the other fields are diagnostics. ``weights`` are the
    importance weights that were used to produce this state.
    """

    sigmas: np.ndarray
    drift: Optional[np.ndarray] = None
    gamma_correction: Optional[np.ndarray] = None
    v_hat_diag: Optional[np.ndarray] = None
    neighbor_counts: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    clamp_count: int = 0

    @classmethod
    def bootstrap(cls, n: int, dim: int, sigma0: float) -> "NoiseState":
        return cls(sigmas=np.full((n, dim), sigma0**2))


def _logsumexp(a, axis=None):
    top = np.max(a, axis=axis, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    out = np.log(np.sum(np.exp(a - top), axis=axis, keepdims=True)) + top
    return out.squeeze(axis) if axis is not None else out.item()


def mixture_log_density(points, centers, variances, sq_diffs=None):
    """log of (1/n) sum_j N(point | center_j, diag(variances_j)) for every point.

    ``sq_diffs`` may carry precomputed per-coordinate squared differences
    between ``points`` and ``centers``.
    """
    if sq_diffs is None:
        sq_diffs = [(points[:, d, None] - centers[None, :, d]) ** 2 for d in range(points.shape[1])]
    log_norm = -0.5 * np.sum(np.log(variances) + LOG_2PI, axis=1)
    quad = sum(sq / variances[None, :, d] for d, sq in enumerate(sq_diffs))
    return _logsumexp(log_norm[None, :] - 0.5 * quad, axis=1) - np.log(centers.shape[0])


def importance_weights(particles, prev: NoiseState, variance_floor: float = 1e-3, sq_diffs=None) -> np.ndarray:
    """w_i proportional to q_eps(x_i), q_eps the particle mixture with covariances Sigma_j."""
    x = as_particles(particles)
    sig = np.asarray(prev.sigmas, dtype=float)
    if sig.shape != x.shape:
        raise ValueError(f"noise state shape {sig.shape} does not match particles {x.shape}")
    log_q = mixture_log_density(x, x, np.maximum(sig, variance_floor), sq_diffs)
    if not np.all(np.isfinite(log_q)):
        i = int(np.flatnonzero(~np.isfinite(log_q))[0])
        raise NumericalFailure(f"mixture density at particle {i} cannot be normalized", index=i)
    w = np.exp(log_q - _logsumexp(log_q))
    return w / w.sum()


def drift_and_correction(particles, weights, km: KernelMatrix, cfg: KernelConfig):
    """b(x_j) = sum_i 1{active} w_i k_ij and Gamma(x_j) = -sum_i 1{active} w_i grad_{x_i} k_ij."""
    x = as_particles(particles)
    a = np.where(km.active_mask, km.values, 0.0) * np.asarray(weights)[:, None]
    drift = a.sum(axis=0)
    gamma_corr = (2.0 / cfg.gamma) * (a.T @ x - x * drift[:, None])
    return drift, gamma_corr


def empirical_gradient_covariance(scores, km: KernelMatrix, min_neighbors: int = 2):
    """Per-coordinate unbiased variance of the scores in each particle's active set.

    Returns ``(v_hat_diag, neighbor_counts)``; rows with fewer than
    ``min_neighbors`` active scores (self included) are zero.
    """
    mask = np.asarray(km.active_mask, dtype=bool)
    counts = mask.sum(axis=0)
    mt = mask.T.astype(float)
    mean = (mt @ scores) / counts[:, None]
    ss = np.empty_like(mean)
    for d in range(scores.shape[1]):
        dev = scores[None, :, d] - mean[:, d, None]  # dev[j, i] = s_i - mean_j
        ss[:, d] = np.sum(mt * dev * dev, axis=1)
    enough = counts >= min_neighbors
    v_hat = np.zeros_like(mean)
    v_hat[enough] = ss[enough] / (counts[enough, None] - 1)
    return v_hat, counts


def noise_covariance(drift, v_hat_diag, step_size: float):
    """Sigma_j = max(0, delta (2 b_j - delta V_j)) per coordinate; also the clamp count."""
    if not step_size > 0:
        raise ValueError("step_size must be positive")
    raw = step_size * (2.0 * np.asarray(drift)[:, None] - step_size * np.asarray(v_hat_diag))
    return np.maximum(raw, 0.0), int(np.count_nonzero(raw < 0))


def lsvgd_direction(x, scores, weights, km: KernelMatrix, cfg: KernelConfig):
    """sum_i w_i [k(x_i, x_j) s_i + grad_{x_i} k(x_i, x_j)] over active pairs only."""
    kvals = np.where(km.active_mask, km.values, 0.0)
    return weighted_stein_direction(x, scores, kvals, weights, cfg.gamma)


def noise_state_for(x, scores, km, weights, cfg: LsvgdConfig) -> NoiseState:
    """Steps 3-5 of the pipeline."""
    kcfg = cfg.base.kernel
    drift, gamma_corr = drift_and_correction(x, weights, km, kcfg)
    v_hat, counts = empirical_gradient_covariance(scores, km, cfg.v_hat_min_neighbors)
    sigmas, clamps = noise_covariance(drift, v_hat, cfg.base.step_size)
    return NoiseState(
        sigmas=sigmas,
        drift=drift,
        gamma_correction=gamma_corr,
        v_hat_diag=v_hat,
        neighbor_counts=counts,
        weights=weights,
        clamp_count=clamps,
    )


def lsvgd_update(x, scores, cfg: LsvgdConfig, prev: NoiseState, rng: np.random.Generator):
    """Pipeline on precomputed scores; returns ``(direction, noise, state)``.

    The particle move is ``step_size * direction + noise``. ``noise`` is all
    zeros (and ``rng`` untouched) when ``cfg.inject_noise`` is off.
    """
    n = x.shape[0]
    kcfg = cfg.base.kernel
    sq = coordinate_sq_diffs(x)
    km = kernel_matrix(x, kcfg, sq)
    if cfg.uniform_weights:
        weights = np.full(n, 1.0 / n)
    else:
        weights = importance_weights(x, prev, cfg.variance_floor, sq)
    state = noise_state_for(x, scores, km, weights, cfg)
    direction = lsvgd_direction(x, scores, weights, km, kcfg)
    if cfg.inject_noise:
        noise = rng.standard_normal(x.shape) * np.sqrt(state.sigmas)
    else:
        noise = np.zeros_like(x)
    return direction, noise, state


def lsvgd_step(particles, target, cfg: LsvgdConfig, prev: NoiseState, rng: np.random.Generator):
    """One LSVGD iteration; returns ``(new_particles, new_state)``."""
    x = as_particles(particles)
    scores = checked_scores(target, x)
    direction, noise, state = lsvgd_update(x, scores, cfg, prev, rng)
    return x + cfg.base.step_size * direction + noise, state


Hook = Callable[[int, np.ndarray, Optional[NoiseState]], None]


@dataclass
class LsvgdRunResult(RunResult):
    state: Optional[NoiseState] = None
    total_clamps: int = 0


def lsvgd_run(
    init,
    target,
    cfg: LsvgdConfig,
    seed: Union[int, np.random.Generator] = 0,
    hook: Optional[Hook] = None,
) -> LsvgdRunResult:
    """Iterate :func:`lsvgd_step`, threading the noise state between iterations.

    An integer ``seed`` is expanded with :func:`lsvgd.seeding.stream`.
    ``hook(t, particles, state)`` runs after every iteration.
    """
    if cfg.base.iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else seeding.stream(seed, seeding.LANGEVIN_NOISE)
    x = as_particles(init).copy()
    state = NoiseState.bootstrap(x.shape[0], x.shape[1], cfg.sigma0)
    clamps = 0
    for t in range(cfg.base.iterations):
        try:
            new_x, new_state = lsvgd_step(x, target, cfg, state, rng)
            if not np.all(np.isfinite(new_x)):
                i = int(np.flatnonzero(~np.all(np.isfinite(new_x), axis=1))[0])
                raise NumericalFailure(f"particle {i} left the finite range", index=i)
        except NumericalFailure as err:
            return LsvgdRunResult(x, t, err, state, clamps)
        x, state = new_x, new_state
        clamps += state.clamp_count
        if hook is not None:
            hook(t, x, state)
    return LsvgdRunResult(x, cfg.base.iterations, None, state, clamps)


def regularizer_estimate(particles, target: GaussianMixture, noise_variance, c_phi, dim=None) -> float:
    """|R(q, p)| ~ d sigma^2 C_phi sum_k sigma_k^-2 P_q(x in component k).

    Uses hard assignment for component membership.
    """
    x = as_particles(particles)
    d = x.shape[1] if dim is None else dim
    assigned = target.assign(x)
    frac = np.bincount(assigned, minlength=target.n_components) / x.shape[0]
    return float(d * noise_variance * c_phi * np.sum(frac / target.variances))


def regularizer_monte_carlo(
    particles, target: GaussianMixture, noise_variance, c_phi, n_draws: int, rng: np.random.Generator
) -> float:
    """R(q, p) = -E_eps E_x eps^T (-C_phi I) H_p(x) eps with the exact Hessian of log p.

    Signed (negative for a mixture target); compare its magnitude with
    :func:`regularizer_estimate`.
    """
    x = as_particles(particles)
    hess = target.log_density_hessian(x)  # (n, D, D)
    eps = rng.standard_normal((n_draws, x.shape[1])) * np.sqrt(noise_variance)
    # mean over draws of eps^T H eps equals tr(H C) with C the draws' second moment
    second_moment = eps.T @ eps / n_draws
    return float(c_phi * np.mean(np.einsum("nde,ed->n", hess, second_moment)))
