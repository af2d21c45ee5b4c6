"""Unit tests for :mod:`blindsr.imaging._metrics`."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindsr.imaging import (PSNR_CAP, crop_border, dihedral_transform,
                             metric_channel, psnr, quality, ssim)
from blindsr.imaging._metrics import SSIM_K1, SSIM_K2, ssim_window
from blindsr.imaging._patches import DIHEDRAL_ORDER


def brute_force_ssim(a, b):
    window = ssim_window()
    size = window.shape[0]
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    values = []
    for i in range(a.shape[0] - size + 1):
        for j in range(a.shape[1] - size + 1):
            pa = a[i:i + size, j:j + size]
            pb = b[i:i + size, j:j + size]
            mu_a = np.sum(window * pa)
            mu_b = np.sum(window * pb)
            var_a = np.sum(window * (pa - mu_a)**2)
            var_b = np.sum(window * (pb - mu_b)**2)
            cov = np.sum(window * (pa - mu_a) * (pb - mu_b))
            values.append((2 * mu_a * mu_b + c1) * (2 * cov + c2) /
                          ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)))
    return np.mean(values)


def test_psnr_uniform_error():
    a = np.full((8, 8), 0.5)
    assert psnr(a, a + 0.1) == pytest.approx(20.)


def brute_force_psnr(a, b):
    total = 0.
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            total += (a[i, j] - b[i, j])**2
    return 10. * np.log10(a.size / total)


@pytest.mark.parametrize('seed', range(5))
def test_psnr_matches_mean_squared_error(seed):
    rng = np.random.default_rng(seed)
    a = rng.random((9, 11))
    b = rng.random((9, 11))
    assert psnr(a, b) == pytest.approx(brute_force_psnr(a, b), rel=1e-12)


@given(seed=st.integers(0, 2**16))
@settings(max_examples=25, deadline=None)
def test_psnr_symmetric(seed):
    rng = np.random.default_rng(seed)
    a = rng.random((6, 7))
    b = rng.random((6, 7))
    assert psnr(a, b) == pytest.approx(psnr(b, a), rel=1e-12)


def test_psnr_decreases_with_noise():
    rng = np.random.default_rng(6)
    a = rng.random((16, 16))
    noise = rng.standard_normal(a.shape)
    values = [psnr(a, a + level * noise) for level in (.01, .02, .05, .1, .2)]
    assert all(high > low for high, low in zip(values, values[1:]))


@pytest.mark.parametrize('index', range(DIHEDRAL_ORDER))
def test_psnr_dihedral_invariant(index):
    rng = np.random.default_rng(7)
    a = rng.random((10, 12, 3))
    b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0., 1.)
    transformed = psnr(dihedral_transform(a, index),
                       dihedral_transform(b, index))
    assert transformed == pytest.approx(psnr(a, b), rel=1e-12)


def test_psnr_identical_is_capped():
    a = np.random.default_rng(0).random((8, 8))
    assert psnr(a, a) == PSNR_CAP


def test_psnr_border():
    a = np.zeros((10, 10))
    b = np.zeros((10, 10))
    b[0, :] = 1.
    assert psnr(a, b) < PSNR_CAP
    assert psnr(a, b, border=1) == PSNR_CAP


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError, match='differ in shape'):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


def test_crop_border():
    img = np.arange(36.).reshape(6, 6)
    np.testing.assert_array_equal(crop_border(img, 2), img[2:4, 2:4])
    assert crop_border(img, 0) is img
    with pytest.raises(ValueError):
        crop_border(img, 3)
    with pytest.raises(ValueError):
        crop_border(img, -1)


def test_ssim_window():
    window = ssim_window()
    assert window.shape == (11, 11)
    assert window.sum() == pytest.approx(1.)
    assert window[5, 5] == window.max()


def test_ssim_identical():
    a = np.random.default_rng(1).random((20, 24))
    assert ssim(a, a) == pytest.approx(1.)


def test_ssim_constant_images():
    c1 = SSIM_K1**2
    value = ssim(np.zeros((16, 16)), np.ones((16, 16)))
    assert value == pytest.approx(c1 / (1. + c1), rel=1e-6)


@pytest.mark.parametrize('seed', range(20))
def test_ssim_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = rng.random((13, 15))
    noise = rng.uniform(0.01, 0.5) * rng.standard_normal(a.shape)
    b = np.clip(a + noise, 0., 1.)
    assert ssim(a, b) == pytest.approx(brute_force_ssim(a, b), abs=1e-10)


def test_ssim_symmetric():
    rng = np.random.default_rng(3)
    a = rng.random((14, 14))
    b = rng.random((14, 14))
    assert ssim(a, b) == pytest.approx(ssim(b, a))


def test_ssim_single_channel_last_axis():
    a = np.random.default_rng(4).random((12, 12, 1))
    assert ssim(a, a * 0.5) == pytest.approx(ssim(a[:, :, 0],
                                                  a[:, :, 0] * 0.5))


def test_ssim_errors():
    with pytest.raises(ValueError, match='single-channel'):
        ssim(np.zeros((12, 12, 3)), np.zeros((12, 12, 3)))
    with pytest.raises(ValueError, match='at least'):
        ssim(np.zeros((10, 10)), np.zeros((10, 10)))
    with pytest.raises(ValueError, match='at least'):
        ssim(np.zeros((14, 14)), np.zeros((14, 14)), border=2)


def test_quality_uses_luminance():
    rng = np.random.default_rng(5)
    reference = rng.random((16, 16, 3))
    output = np.clip(reference + 0.05, 0., 1.)
    value_psnr, value_ssim = quality(output, reference, border=2)
    assert 0. < value_ssim <= 1.
    assert value_psnr == pytest.approx(
        psnr(metric_channel(output), metric_channel(reference), border=2))
