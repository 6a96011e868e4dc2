"""Seed derivation.

Every random draw in a run comes from ``stream(seed, purpose, *more)``, a
generator built from ``SeedSequence([seed, purpose, *more])``. Purposes are the
integer constants below, so two runs with the same seed make identical draws
regardless of which other streams were consumed.
"""

import numpy as np

INIT = 0
LANGEVIN_NOISE = 1
GAN_GENERATOR_INIT = 10
GAN_DISCRIMINATOR_INIT = 11
GAN_AUX_INIT = 12
GAN_DATA = 13
GAN_LATENT = 14
GAN_LABELS = 15
GAN_PARTICLE_NOISE = 16
GAN_EVAL = 17


def stream(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seeds must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))
