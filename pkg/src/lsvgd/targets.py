"""Target densities for the samplers.

Anything with ``dim``, ``log_density``, ``score`` and ``sample`` can be used as
a target; :class:`GaussianMixture` is the concrete one used throughout.
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy.special import logsumexp, softmax

LOG_2PI = np.log(2.0 * np.pi)


class TargetDistribution(Protocol):
    dim: int

    def log_density(self, x) -> np.ndarray: ...

    def score(self, x) -> np.ndarray: ...

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Mixture of isotropic Gaussians sum_k pi_k N(mu_k, sigma_k^2 I).

    Attributes:
        weights: Mixing proportions, shape ``(K,)``.
        means: Component means, shape ``(K, D)``.
        variances: Per-component isotropic variances, shape ``(K,)``.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        var = np.asarray(self.variances, dtype=float).reshape(-1)
        if not (len(w) == len(mu) == len(var)) or len(w) == 0:
            raise ValueError("weights, means and variances must have matching length K >= 1")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must be non-negative and sum to 1, got {w}")
        if np.any(var <= 0):
            raise ValueError("variances must be positive")
        for name, arr in (("weights", w), ("means", mu), ("variances", var)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return len(self.weights)

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim or x.ndim not in (1, 2):
            raise ValueError(f"expected points of dimension {self.dim}, got shape {x.shape}")
        return x

    def _component_log_terms(self, x):
        # log pi_k + log N(x | mu_k, sigma_k^2 I), shape (..., K)
        sq = np.sum((x[..., None, :] - self.means) ** 2, axis=-1)
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        return log_w - 0.5 * (self.dim * (LOG_2PI + np.log(self.variances)) + sq / self.variances)

    def log_density(self, x):
        """Log-density at one point ``(D,)`` or a batch ``(n, D)``."""
        x = self._points(x)
        out = logsumexp(self._component_log_terms(x), axis=-1)
        return float(out) if x.ndim == 1 else out

    def responsibilities(self, x):
        x = self._points(x)
        return softmax(self._component_log_terms(x), axis=-1)

    def score(self, x):
        """Gradient of the log-density, sum_k r_k(x) (mu_k - x) / sigma_k^2."""
        x = self._points(x)
        r = self.responsibilities(x)
        pull = (self.means - x[..., None, :]) / self.variances[:, None]
        return np.einsum("...k,...kd->...d", r, pull)

    def log_density_hessian(self, x):
        """Exact Hessian of log p, shape ``(D, D)`` or ``(n, D, D)``."""
        x = self._points(x)
        r = self.responsibilities(x)
        g = (self.means - x[..., None, :]) / self.variances[:, None]  # grad of each log term
        gbar = np.einsum("...k,...kd->...d", r, g)
        curv = -np.sum(r / self.variances, axis=-1)[..., None, None] * np.eye(self.dim)
        second = np.einsum("...k,...kd,...ke->...de", r, g, g)
        return curv + second - gbar[..., :, None] * gbar[..., None, :]

    def assign(self, x):
        """Hard component assignment (argmax responsibility, lowest index on ties)."""
        x = self._points(x)
        return np.argmax(self._component_log_terms(x), axis=-1)

    def gmm_hessian_approx(self, x) -> np.ndarray:
        """Hard-assignment Hessian of log p: -I / sigma_k^2 for the assigned k."""
        x = self._points(x)
        if x.ndim != 1:
            raise ValueError("gmm_hessian_approx takes a single point")
        k = self.assign(x)
        return -np.eye(self.dim) / self.variances[k]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.sample_with_labels(n, rng)[0]

    def sample_with_labels(self, n: int, rng: np.random.Generator):
        """Draw ``n`` points and the index of the component each came from."""
        if n < 1:
            raise ValueError("n must be >= 1")
        comps = rng.choice(self.n_components, size=n, p=self.weights)
        noise = rng.standard_normal((n, self.dim))
        return self.means[comps] + np.sqrt(self.variances[comps])[:, None] * noise, comps


def bimodal_target(mu1=(-1.0, 0.0), mu2=(1.0, 0.0), var1=0.5, var2=1.0) -> GaussianMixture:
    """Equal-weight two-component target of the toy comparisons."""
    return GaussianMixture(
        weights=np.array([0.5, 0.5]), means=np.array([mu1, mu2]), variances=np.array([var1, var2])
    )


def standard_normal(dim: int = 2) -> GaussianMixture:
    return GaussianMixture(weights=np.ones(1), means=np.zeros((1, dim)), variances=np.ones(1))


def ring_mixture(n_modes: int = 8, radius: float = 2.0, variance: float = 0.01) -> GaussianMixture:
    angles = 2.0 * np.pi * np.arange(n_modes) / n_modes
    means = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return GaussianMixture(
        weights=np.full(n_modes, 1.0 / n_modes), means=means, variances=np.full(n_modes, variance)
    )
