"""Color conversion."""
import numpy as np

# BT.601 studio swing, as used by the SR benchmarks.
_LUMA_WEIGHTS = np.array([65.481, 128.553, 24.966])
_LUMA_OFFSET = 16.


def rgb_to_luminance(img):
    """Return the luminance (Y) channel of an RGB image in ``[0, 1]``.

    ``Y = (65.481 R + 128.553 G + 24.966 B + 16) / 255``. The result has
    shape ``H x W``.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(
            "Luminance conversion needs an H x W x 3 image, got shape "
            "{}".format(img.shape))
    return (img @ _LUMA_WEIGHTS + _LUMA_OFFSET) / 255.


def metric_channel(img):
    """Reduce an image to the single channel metrics are computed on."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 1:
        return img[:, :, 0]
    return rgb_to_luminance(img)
