"""Unit tests for :mod:`blindsr.imaging._resize`."""
import numpy as np
import pytest

import tests
from blindsr.imaging import bicubic_resize, cubic, resize_matrix
from tests import smooth_image


class TestCubic(tests.Test):
    def test_interpolating(self):
        self.assertEqual(cubic(np.array(0.)), 1.)
        self.assertArrayAllClose(cubic(np.array([-2., -1., 1., 2.])),
                                 0.,
                                 atol=1e-15)

    def test_support(self):
        self.assertArrayEqual(cubic(np.array([-3., -2.5, 2.01, 5.])), 0.)

    def test_partition_of_unity(self):
        offsets = np.linspace(0., 1., 11)
        total = sum(cubic(offsets + shift) for shift in (-2, -1, 0, 1))
        self.assertArrayAllClose(total, 1., atol=1e-12)


class TestResizeMatrix(tests.Test):
    def test_rows_sum_to_one(self):
        for in_length, out_length, scale in ((16, 32, 2.), (30, 10, 1 / 3.),
                                             (9, 9, 1.)):
            matrix = resize_matrix(in_length, out_length, scale)
            self.assertShape(matrix, (out_length, in_length))
            self.assertArrayAllClose(matrix.sum(axis=1), 1., atol=1e-12)

    def test_identity_at_scale_one(self):
        self.assertArrayAllClose(resize_matrix(7, 7, 1.),
                                 np.eye(7),
                                 atol=1e-12)

    def test_linear_ramp_reproduced_in_interior(self):
        ramp = np.arange(1., 17.)
        result = resize_matrix(16, 32, 2.) @ ramp
        expected = np.arange(1., 33.) / 2. + 0.25
        self.assertArrayAllClose(result[7:23], expected[7:23], atol=1e-12)

    def test_antialias_widens_support(self):
        narrow = resize_matrix(32, 8, 0.25, antialias=False)
        wide = resize_matrix(32, 8, 0.25, antialias=True)
        self.assertLess(np.count_nonzero(narrow[4]),
                        np.count_nonzero(wide[4]))


def test_bicubic_resize_shapes():
    img = smooth_image(24, 18)
    assert bicubic_resize(img, 0.5).shape == (12, 9, 3)
    assert bicubic_resize(img, 2).shape == (48, 36, 3)
    assert bicubic_resize(img, 1. / 3.).shape == (8, 6, 3)
    assert bicubic_resize(img[:, :, 0], 4).shape == (96, 72)


def test_bicubic_resize_identity():
    img = smooth_image(10, 12)
    np.testing.assert_allclose(bicubic_resize(img, 1), img, atol=1e-12)


def test_bicubic_resize_constant():
    img = np.full((12, 16, 3), 0.3)
    np.testing.assert_allclose(bicubic_resize(img, 0.5), 0.3, atol=1e-12)
    np.testing.assert_allclose(bicubic_resize(img, 3), 0.3, atol=1e-12)


def test_bicubic_resize_channels_independent():
    img = smooth_image(16, 16)
    result = bicubic_resize(img, 0.5)
    for channel in range(3):
        np.testing.assert_allclose(result[:, :, channel],
                                   bicubic_resize(img[:, :, channel], 0.5),
                                   atol=1e-12)


@pytest.mark.parametrize('scale', [0, -2.])
def test_bicubic_resize_invalid_scale(scale):
    with pytest.raises(ValueError, match='positive'):
        bicubic_resize(np.zeros((4, 4)), scale)


def test_bicubic_resize_empty_result():
    with pytest.raises(ValueError, match='empty'):
        bicubic_resize(np.zeros((4, 4)), 1e-3)


def _mirror(index, length):
    """0-based index of 1-based position `index` with mirrored edges."""
    index -= 1
    while not 0 <= index < length:
        index = -index - 1 if index < 0 else 2 * length - 1 - index
    return index


def brute_force_half(img):
    """Antialiased x1/2 bicubic downscale, one output pixel at a time."""
    height, width = img.shape
    result = np.zeros((height // 2, width // 2))
    for i in range(height // 2):
        for j in range(width // 2):
            u = 2. * (i + 1) - 0.5
            v = 2. * (j + 1) - 0.5
            total = norm = 0.
            for p in range(int(np.floor(u)) - 4, int(np.floor(u)) + 6):
                for q in range(int(np.floor(v)) - 4, int(np.floor(v)) + 6):
                    weight = (0.5 * cubic(0.5 * (u - p)) * 0.5 *
                              cubic(0.5 * (v - q)))
                    total += weight * img[_mirror(p, height),
                                          _mirror(q, width)]
                    norm += weight
            result[i, j] = total / norm
    return result


def test_bicubic_half_matches_weighted_sum():
    ramp = np.arange(64.).reshape(8, 8) / 63.
    np.testing.assert_allclose(bicubic_resize(ramp, 0.5),
                               brute_force_half(ramp),
                               atol=1e-12)


def test_bicubic_up_down_round_trip():
    yy, xx = np.mgrid[0:32, 0:32]
    img = 0.5 + 0.2 * np.sin(2. * np.pi * xx / 32.) * np.cos(
        2. * np.pi * yy / 24.)
    again = bicubic_resize(bicubic_resize(img, 2), 0.5)
    assert again.shape == img.shape
    assert np.sqrt(np.mean((again - img)**2)) < 0.01
