"""Additive white Gaussian noise and additive transition states."""
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NoiseField:
    """Noise realization together with its level in 8-bit units."""

    values: np.ndarray
    level: float


def synthesize_noise(height, width, channels, level, rng):
    """Draw i.i.d. zero-mean Gaussian noise.

    Parameters
    ----------
    height, width: int
        Spatial size.
    channels: int or None
        Number of independent channels; None gives a 2-D field.
    level: float
        Standard deviation in 8-bit units; the field has standard deviation
        ``level / 255``.
    rng: numpy.random.Generator

    Returns
    -------
    NoiseField
    """
    if level < 0:
        raise ValueError(
            "Noise level must be nonnegative, got {}".format(level))
    shape = (height, width) if channels is None else (height, width,
                                                       channels)
    if level == 0:
        return NoiseField(np.zeros(shape), 0.)
    values = rng.standard_normal(shape) * (level / 255.)
    return NoiseField(values, float(level))


def additive_transition(x0, x1, tau):
    """Transition state ``tau * x0 + (1 - tau) * x1`` of two images.

    Here `tau` weights the first state; use
    :func:`canonical_additive_transition` for the orientation where
    ``tau = 0`` is the clean image.
    """
    x0 = np.asarray(x0)
    x1 = np.asarray(x1)
    if x0.shape != x1.shape:
        raise ValueError("Transition states differ in shape: {} and {}".format(
            x0.shape, x1.shape))
    if not 0. <= tau <= 1.:
        raise ValueError("tau must lie in [0, 1], got {}".format(tau))
    return tau * x0 + (1. - tau) * x1


def canonical_additive_transition(x_clean, x_strong, tau):
    """Transition state with ``tau = 0`` clean and ``tau = 1`` strongest."""
    return additive_transition(x_strong, x_clean, tau)
