"""Full-reference image quality metrics."""
import logging

import numpy as np
from scipy import signal

from ._color import metric_channel

logger = logging.getLogger(__name__)

# Reported instead of infinity for (near) identical images.
PSNR_CAP = 100.
_MSE_FLOOR = 1e-10

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ValueError("Images differ in shape: {} and {}".format(
            a.shape, b.shape))


def crop_border(img, border):
    """Remove `border` pixels from every side of an image."""
    if border < 0:
        raise ValueError("Border must be nonnegative, got {}".format(border))
    if border == 0:
        return img
    if 2 * border >= min(img.shape[:2]):
        raise ValueError("Border {} leaves nothing of a {}x{} image".format(
            border, *img.shape[:2]))
    return img[border:-border, border:-border, ...]


def psnr(a, b, border=0):
    """Peak signal-to-noise ratio in dB for images with peak value 1.

    Returns :data:`PSNR_CAP` when the mean squared error is below 1e-10.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_shapes(a, b)
    diff = crop_border(a, border) - crop_border(b, border)
    mse = np.mean(diff**2)
    if mse < _MSE_FLOOR:
        return PSNR_CAP
    return float(10. * np.log10(1. / mse))


def ssim_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    """Normalized 2-D Gaussian weighting window."""
    offsets = np.arange(size) - (size - 1) / 2.
    profile = np.exp(-offsets**2 / (2. * sigma**2))
    window = np.outer(profile, profile)
    return window / window.sum()


def ssim(a, b, border=0):
    """Mean structural similarity of two single-channel images.

    Local statistics use an 11x11 Gaussian window (sigma 1.5) evaluated at
    every position where it fits entirely in the image, with ``K1 = 0.01``,
    ``K2 = 0.03`` and dynamic range 1.

    Parameters
    ----------
    a, b: numpy.ndarray
        ``H x W`` (or ``H x W x 1``) images.
    border: int
        Pixels cropped from every side first.

    Returns
    -------
    float

    Raises
    ------
    ValueError
        if the shapes differ, the images have several channels or are
        smaller than the window.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_shapes(a, b)
    if a.ndim == 3 and a.shape[2] == 1:
        a, b = a[:, :, 0], b[:, :, 0]
    if a.ndim != 2:
        raise ValueError(
            "SSIM needs single-channel images, got shape {}".format(a.shape))
    a = crop_border(a, border)
    b = crop_border(b, border)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(
            "SSIM needs images of at least {0}x{0} pixels, got {1}".format(
                SSIM_WINDOW, a.shape))

    window = ssim_window()

    def local_mean(img):
        return signal.correlate2d(img, window, mode='valid')

    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_a = local_mean(a)
    mu_b = local_mean(b)
    var_a = local_mean(a * a) - mu_a**2
    var_b = local_mean(b * b) - mu_b**2
    cov = local_mean(a * b) - mu_a * mu_b
    ssim_map = ((2. * mu_a * mu_b + c1) * (2. * cov + c2) /
                ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)))
    return float(ssim_map.mean())


def quality(output, reference, border=0):
    """Return ``(psnr, ssim)`` computed on the luminance channel."""
    output = metric_channel(output)
    reference = metric_channel(reference)
    return psnr(output, reference, border), ssim(output, reference, border)
