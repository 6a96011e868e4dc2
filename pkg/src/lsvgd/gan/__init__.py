from lsvgd.gan.networks import Mlp
from lsvgd.gan.toy import (
    GanBundle,
    GanTrainConfig,
    ParticleStates,
    batch_loss,
    discriminator_gradients,
    discriminator_step,
    gan_train,
    generator_gradients,
    generator_step,
    likelihood_score,
    make_bundle,
)

__all__ = [
    "GanBundle",
    "GanTrainConfig",
    "Mlp",
    "ParticleStates",
    "batch_loss",
    "discriminator_gradients",
    "discriminator_step",
    "gan_train",
    "generator_gradients",
    "generator_step",
    "likelihood_score",
    "make_bundle",
]
