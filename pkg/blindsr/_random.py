"""Seeded random generator hierarchy.

All randomness in a run derives from one integer seed. Each phase asks for
a named child generator, so adding draws to one phase never shifts the
draws of another.
"""
import zlib

import numpy as np


def _spawn_key(keys):
    spawn_key = []
    for key in keys:
        if isinstance(key, str):
            spawn_key.append(zlib.crc32(key.encode('utf-8')))
        elif isinstance(key, (int, np.integer)):
            if key < 0:
                raise ValueError(
                    "Random generator keys must be non-negative, "
                    "got {}".format(key))
            spawn_key.append(int(key))
        else:
            raise TypeError(
                "Random generator keys must be str or int, got {!r}".format(
                    key))
    return tuple(spawn_key)


def child_seed(seed, *keys):
    """Return the SeedSequence of the child named by `keys`."""
    return np.random.SeedSequence(entropy=int(seed),
                                  spawn_key=_spawn_key(keys))


def child_rng(seed, *keys):
    """Return a numpy Generator for the child named by `keys`.

    Parameters
    ----------
    seed: int
        Root seed of the run.
    *keys: str or int
        Path of the child, e.g. ``('eval', image_index, level_index)``.

    Returns
    -------
    numpy.random.Generator
    """
    return np.random.default_rng(child_seed(seed, *keys))
