"""Toy GAN whose feature-layer gradients are replaced by particle directions.

The discriminator is ``main_head(extractor(x))``. Each training batch is
pushed through the extractor; the resulting feature vectors are treated as
particles whose target density is the classifier likelihood
``p(y | f) ~ exp(-loss(f, y))``. Instead of the ordinary loss gradient at the
feature layer, the negated particle direction (plain, SVGD or LSVGD) is
back-propagated into the extractor or generator. Classifier heads always get
their ordinary gradients.

Sign convention: particle directions ascend log-likelihood, so the value
injected at the feature layer is ``-direction``. In plain mode the direction
is ``score / n``, which makes the injected value exactly the gradient of the
batch-mean loss.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from lsvgd import seeding
from lsvgd.diagnostics import mode_coverage, particle_variance
from lsvgd.errors import NumericalFailure
from lsvgd.gan.networks import Mlp
from lsvgd.kernels import KernelConfig, kernel_matrix
from lsvgd.langevin import LsvgdConfig, NoiseState, lsvgd_update
from lsvgd.svgd import SamplerConfig, weighted_stein_direction
from lsvgd.targets import GaussianMixture

UPDATE_MODES = ("plain-gradient", "svgd", "lsvgd")
MODE_ALIASES = {"sgd": "plain-gradient", "plain": "plain-gradient"}


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _softmax(u):
    e = np.exp(u - u.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class GanBundle:
    generator: Mlp
    extractor: Mlp
    main_head: Mlp
    aux_head: Optional[Mlp] = None
    noise_dim: int = 2
    n_classes: int = 0

    @property
    def conditional(self):
        return self.n_classes > 0

    def generator_input(self, z, labels=None):
        if not self.conditional:
            return z
        return np.concatenate([z, np.eye(self.n_classes)[labels]], axis=1)

    def generate(self, z, labels=None):
        return self.generator(self.generator_input(z, labels))

    def discriminator_logit(self, x):
        return self.main_head(self.extractor(x))[:, 0]

    def copy(self):
        return GanBundle(
            self.generator.copy(),
            self.extractor.copy(),
            self.main_head.copy(),
            None if self.aux_head is None else self.aux_head.copy(),
            self.noise_dim,
            self.n_classes,
        )

    def all_finite(self):
        nets = [self.generator, self.extractor, self.main_head]
        if self.aux_head is not None:
            nets.append(self.aux_head)
        return all(net.all_finite() for net in nets)


def make_bundle(
    seed=0,
    noise_dim=2,
    hidden=32,
    feature_dim=8,
    n_classes=0,
    aux_head=True,
    data_dim=2,
    extractor_depth=1,
    feature_activation="tanh",
):
    """Generator ``noise_dim(+K) -> hidden -> hidden -> data_dim``.

    The extractor is ``data_dim -> hidden x extractor_depth -> feature_dim``.
    """
    gen = Mlp(
        [noise_dim + n_classes, hidden, hidden, data_dim],
        seeding.stream(seed, seeding.GAN_GENERATOR_INIT),
    )
    drng = seeding.stream(seed, seeding.GAN_DISCRIMINATOR_INIT)
    extractor = Mlp([data_dim] + [hidden] * extractor_depth + [feature_dim], drng, out_activation=feature_activation)
    main = Mlp([feature_dim, 1], drng)
    aux = None
    if n_classes > 0 and aux_head:
        aux = Mlp([feature_dim, n_classes], seeding.stream(seed, seeding.GAN_AUX_INIT))
    return GanBundle(gen, extractor, main, aux, noise_dim, n_classes)


@dataclass(frozen=True)
class GanTrainConfig:
    """Training settings.

    ``kernel`` is used by both particle modes (it overrides the kernel inside
    ``lsvgd``). The LSVGD noise is divided by ``lsvgd.base.step_size`` so
    the feature-layer value stays a direction, not a displacement; a large
    particle step therefore means mild noise.

    Every batch holds fresh samples, so by default the noise covariance used
    for the importance weights is re-bootstrapped each iteration. With
    ``carry_noise_state`` batch slot i instead inherits the previous
    iteration's covariance of slot i.
    """

    update_mode: str = "lsvgd"
    batch_size: int = 64
    learning_rate: float = 1e-2
    iterations: int = 20000
    kernel: KernelConfig = field(default_factory=lambda: KernelConfig(gamma=0.05))
    lsvgd: LsvgdConfig = field(default_factory=lambda: LsvgdConfig(base=SamplerConfig(step_size=100.0, iterations=1)))
    conditional: bool = False
    aux_weight: float = 1.0
    seed: int = 0
    checkpoint_every: int = 1000
    eval_samples: int = 2000
    carry_noise_state: bool = False

    def __post_init__(self):
        mode = MODE_ALIASES.get(self.update_mode, self.update_mode)
        if mode not in UPDATE_MODES:
            raise ValueError(f"update_mode must be one of {UPDATE_MODES}, got {self.update_mode!r}")
        object.__setattr__(self, "update_mode", mode)
        if mode != "plain-gradient" and self.batch_size < 2:
            raise ValueError("particle modes need batch_size >= 2")
        if self.batch_size < 1 or self.iterations < 0 or self.checkpoint_every < 1:
            raise ValueError("batch_size, iterations and checkpoint_every must be positive")
        if self.lsvgd.base.kernel != self.kernel:
            object.__setattr__(self, "lsvgd", replace(self.lsvgd, base=replace(self.lsvgd.base, kernel=self.kernel)))


def _head_terms(bundle: GanBundle, features, target_real: bool, classes=None, aux_weight=1.0):
    """Batch-mean loss, per-sample loss gradient at the features, and head parameter grads."""
    n = features.shape[0]
    logit, cache = bundle.main_head.forward(features)
    t = 1.0 if target_real else 0.0
    # binary cross-entropy through the sigmoid: softplus(-logit) or softplus(logit)
    loss = np.mean(np.logaddexp(0.0, -logit if target_real else logit))
    dlogit = _sigmoid(logit) - t
    main_grads, _ = bundle.main_head.backward(cache, dlogit / n)
    grad_f = dlogit @ bundle.main_head.params[0].T
    aux_grads = None
    if classes is not None and bundle.aux_head is not None:
        u, acache = bundle.aux_head.forward(features)
        onehot = np.eye(bundle.n_classes)[classes]
        logp = u - u.max(axis=1, keepdims=True)
        logp = logp - np.log(np.exp(logp).sum(axis=1, keepdims=True))
        loss = loss + aux_weight * np.mean(-np.sum(onehot * logp, axis=1))
        du = aux_weight * (_softmax(u) - onehot)
        aux_grads, _ = bundle.aux_head.backward(acache, du / n)
        grad_f = grad_f + du @ bundle.aux_head.params[0].T
    return loss, grad_f, main_grads, aux_grads


def likelihood_score(bundle: GanBundle, features, label: int, classes=None, aux_weight=1.0):
    """grad_f log p(y | f) per feature vector; ``label`` is +1 (real) or -1 (fake).

    With ``classes`` (and an auxiliary head) the class log-likelihood score is
    added.
    """
    if label not in (1, -1):
        raise ValueError("label must be +1 or -1")
    return -_head_terms(bundle, features, label == 1, classes, aux_weight)[1]


def batch_loss(bundle: GanBundle, features, target_real: bool, classes=None, aux_weight=1.0):
    return _head_terms(bundle, features, target_real, classes, aux_weight)[0]


def particle_direction(features, scores, cfg: GanTrainConfig, state: Optional[NoiseState], rng):
    """Feature-space ascent direction for the configured update mode; returns ``(phi, state)``."""
    n = features.shape[0]
    if cfg.update_mode == "plain-gradient":
        return scores / n, state
    if cfg.update_mode == "svgd":
        km = kernel_matrix(features, cfg.kernel)
        return weighted_stein_direction(features, scores, km.values, np.full(n, 1.0 / n), cfg.kernel.gamma), state
    if state is None or not cfg.carry_noise_state or state.sigmas.shape != features.shape:
        state = NoiseState.bootstrap(n, features.shape[1], cfg.lsvgd.sigma0)
    direction, noise, new_state = lsvgd_update(features, scores, cfg.lsvgd, state, rng)
    if cfg.lsvgd.inject_noise:
        direction = direction + noise / cfg.lsvgd.base.step_size
    return direction, new_state


@dataclass
class ParticleStates:
    """LSVGD noise states, one per particle group (used with ``carry_noise_state``)."""

    generator: Optional[NoiseState] = None
    real: Optional[NoiseState] = None
    fake: Optional[NoiseState] = None


def generator_gradients(bundle: GanBundle, z, labels, cfg: GanTrainConfig, states: ParticleStates, rng):
    """Generator parameter gradients with the discriminator frozen."""
    g_in = bundle.generator_input(z, labels)
    x, gcache = bundle.generator.forward(g_in)
    f, ecache = bundle.extractor.forward(x)
    classes = labels if bundle.conditional else None
    scores = likelihood_score(bundle, f, +1, classes, cfg.aux_weight)
    phi, states.generator = particle_direction(f, scores, cfg, states.generator, rng)
    _, grad_x = bundle.extractor.backward(ecache, -phi)
    grads, _ = bundle.generator.backward(gcache, grad_x)
    return grads


def discriminator_gradients(bundle, x_real, c_real, x_fake, c_fake, cfg: GanTrainConfig, states: ParticleStates, rng):
    """Gradients for ``(extractor, main_head, aux_head)`` with the generator frozen.

    Real and fake features are separate particle groups targeting labels +1
    and -1. Head gradients are the ordinary ones; extractor gradients come
    from the replaced feature-layer values.
    """
    use_aux = bundle.conditional and bundle.aux_head is not None
    ext_grads = None
    main_grads = aux_grads = None
    for x, classes, real in ((x_real, c_real, True), (x_fake, c_fake, False)):
        f, cache = bundle.extractor.forward(x)
        _, grad_f, mg, ag = _head_terms(bundle, f, real, classes if use_aux else None, cfg.aux_weight)
        key = "real" if real else "fake"
        phi, new_state = particle_direction(f, -grad_f, cfg, getattr(states, key), rng)
        setattr(states, key, new_state)
        eg, _ = bundle.extractor.backward(cache, -phi)
        ext_grads = eg if ext_grads is None else [a + b for a, b in zip(ext_grads, eg)]
        main_grads = mg if main_grads is None else [a + b for a, b in zip(main_grads, mg)]
        if ag is not None:
            aux_grads = ag if aux_grads is None else [a + b for a, b in zip(aux_grads, ag)]
    return ext_grads, main_grads, aux_grads


def generator_step(bundle, z, labels, cfg, states, rng):
    bundle.generator.step(generator_gradients(bundle, z, labels, cfg, states, rng), cfg.learning_rate)


def discriminator_step(bundle, x_real, c_real, x_fake, c_fake, cfg, states, rng):
    ext, main, aux = discriminator_gradients(bundle, x_real, c_real, x_fake, c_fake, cfg, states, rng)
    bundle.extractor.step(ext, cfg.learning_rate)
    bundle.main_head.step(main, cfg.learning_rate)
    if aux is not None:
        bundle.aux_head.step(aux, cfg.learning_rate)


@dataclass
class Checkpoint:
    iteration: int
    modes_covered: int
    mode_fractions: np.ndarray
    variance: float
    samples: np.ndarray


@dataclass
class GanRunResult:
    bundle: GanBundle
    checkpoints: List[Checkpoint]
    error: Optional[Exception] = None


def evaluate(bundle: GanBundle, data: GaussianMixture, z, labels, iteration):
    samples = bundle.generate(z, labels)
    covered, fractions = mode_coverage(samples, data, 3.0, 0.01)
    return Checkpoint(iteration, covered, fractions, particle_variance(samples), samples)


def gan_train(
    bundle: GanBundle,
    data: GaussianMixture,
    cfg: GanTrainConfig,
    hook: Optional[Callable[[Checkpoint], None]] = None,
) -> GanRunResult:
    """Alternate discriminator and generator steps for ``cfg.iterations`` rounds.

    The bundle is trained in place. Every ``cfg.checkpoint_every`` rounds (and
    after the last one) samples from a fixed evaluation batch are scored. On a
    numerical failure training stops and the last checkpointed bundle is
    returned with the error.
    """
    if cfg.conditional != bundle.conditional:
        raise ValueError("cfg.conditional does not match the bundle")
    n, k = cfg.batch_size, data.n_components
    data_rng = seeding.stream(cfg.seed, seeding.GAN_DATA)
    z_rng = seeding.stream(cfg.seed, seeding.GAN_LATENT)
    label_rng = seeding.stream(cfg.seed, seeding.GAN_LABELS)
    noise_rng = seeding.stream(cfg.seed, seeding.GAN_PARTICLE_NOISE)
    eval_z = seeding.stream(cfg.seed, seeding.GAN_EVAL).standard_normal((cfg.eval_samples, bundle.noise_dim))
    eval_labels = np.arange(cfg.eval_samples) % k if bundle.conditional else None

    states = ParticleStates()
    checkpoints: List[Checkpoint] = []
    saved = bundle.copy()
    for t in range(1, cfg.iterations + 1):
        try:
            x_real, c_real = data.sample_with_labels(n, data_rng)
            z = z_rng.standard_normal((n, bundle.noise_dim))
            c_fake = label_rng.integers(0, k, size=n) if bundle.conditional else None
            x_fake = bundle.generate(z, c_fake)
            discriminator_step(bundle, x_real, c_real, x_fake, c_fake, cfg, states, noise_rng)
            z = z_rng.standard_normal((n, bundle.noise_dim))
            c_gen = label_rng.integers(0, k, size=n) if bundle.conditional else None
            generator_step(bundle, z, c_gen, cfg, states, noise_rng)
            if not bundle.all_finite():
                raise NumericalFailure(f"non-finite parameters at iteration {t}", index=t)
        except NumericalFailure as err:
            return GanRunResult(saved, checkpoints, err)
        if t % cfg.checkpoint_every == 0 or t == cfg.iterations:
            cp = evaluate(bundle, data, eval_z, eval_labels, t)
            checkpoints.append(cp)
            saved = bundle.copy()
            if hook is not None:
                hook(cp)
    return GanRunResult(bundle, checkpoints)
