"""
Provides testing capabilities for :mod:`blindsr` package.

"""
import os
import unittest
from functools import wraps

import mock
import numpy as np

from blindsr.imaging import save_image

# Settings of an experiment small enough to train in a unit test.
TINY_SETTINGS = {
    'family': 'noise',
    'scale': 2,
    'kernel_size': 5,
    'trunk_blocks': 1,
    'channels': 4,
    'transitional_blocks': 1,
    'batch_size': 2,
    'lr_patch': 8,
    'steps': 2,
    'dot_patch_count': 2,
    'dot_patch_size': 8,
    'dot_channels': 4,
    'dot_reduced_channels': 2,
    'dot_fc_hidden': 4,
    'dot_batch_size': 2,
    'dot_crop': 12,
    'dot_steps': 2,
    'dot_validate_every': 1,
    'dtype': 'float64',
    'eval_levels': [0., 30.],
    'eval_images': 2,
}


def smooth_image(height, width, seed=0):
    """Smooth random RGB image with values in ``[0, 1]``.

    A sum of a few low-frequency sinusoids, so that blur and downscaling
    change it in a predictable, mild way.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width] / float(max(height, width))
    img = np.empty((height, width, 3))
    for channel in range(3):
        freq = rng.uniform(1., 4., size=2)
        phase = rng.uniform(0., 2. * np.pi, size=2)
        img[:, :, channel] = 0.5 + 0.25 * (
            np.sin(2. * np.pi * freq[0] * xx + phase[0]) +
            np.cos(2. * np.pi * freq[1] * yy + phase[1]))
    return np.clip(img, 0., 1.)


def textured_image(height, width, seed=0):
    """Smooth image with fine oriented stripes that blur visibly removes.

    The stripe periods lie between 4 and 12 pixels.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(float)
    img = smooth_image(height, width, seed)
    for _ in range(4):
        angle = rng.uniform(0., np.pi)
        period = rng.uniform(4., 12.)
        phase = rng.uniform(0., 2. * np.pi)
        wave = np.sin(2. * np.pi *
                      (xx * np.cos(angle) + yy * np.sin(angle)) / period +
                      phase)
        img += 0.05 * wave[:, :, None]
    return np.clip(img, 0., 1.)


def write_images(dirname, count, height, width, seed=0):
    """Write `count` smooth PNG images to `dirname`, return their paths."""
    os.makedirs(dirname, exist_ok=True)
    files = []
    for i in range(count):
        filename = os.path.join(dirname, 'img{:02d}.png'.format(i))
        save_image(smooth_image(height, width, seed + i), filename)
        files.append(filename)
    return files


class Test(unittest.TestCase):
    """
    Provides blindsr specific testing functionality.

    """

    def _remove_testcase_patches(self):
        """Remove the per-testcase patches installed by :meth:`patch`."""
        for patch in self.testcase_patches:
            patch.stop()
        self.testcase_patches.clear()

    def patch(self, *args, **kwargs):
        """
        Install a :func:`mock.patch` removed after the current test.

        Returns
        -------
            The substitute mock instance returned by :func:`patch.start`.

        """
        patch = mock.patch(*args, **kwargs)
        start_result = patch.start()

        # NOTE: this mimics a setUp method, but continues to work when a
        # subclass defines its own setUp.
        if not hasattr(self, 'testcase_patches'):
            self.testcase_patches = {}
        if not self.testcase_patches:
            self.addCleanup(self._remove_testcase_patches)
        self.testcase_patches[patch] = start_result
        return start_result

    @wraps(np.testing.assert_array_equal)
    def assertArrayEqual(self, a, b, err_msg='', verbose=True):  # noqa: N802
        np.testing.assert_array_equal(a, b, err_msg=err_msg, verbose=verbose)

    @wraps(np.testing.assert_allclose)
    def assertArrayAllClose(self, a, b, rtol=1e-7, atol=0,  # noqa: N802
                            err_msg=''):
        np.testing.assert_allclose(a, b, rtol=rtol, atol=atol,
                                   err_msg=err_msg)

    def assertShape(self, array, shape):  # noqa: N802
        self.assertEqual(tuple(np.shape(array)), tuple(shape))
