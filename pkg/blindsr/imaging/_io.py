"""Functions for loading, saving and normalizing images."""
import logging
import os

import numpy as np
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from .._version import __version__

logger = logging.getLogger(__name__)


def load_image(filename, mode='RGB'):
    """Load an 8-bit image file as floating point data in ``[0, 1]``.

    Parameters
    ----------
    filename: str
        Path to a PNG (or any other format PIL reads).
    mode: str
        ``'RGB'`` returns ``H x W x 3``, ``'L'`` returns ``H x W x 1``.

    Returns
    -------
    numpy.ndarray
    """
    if mode not in ('RGB', 'L'):
        raise ValueError("Unsupported image mode {!r}".format(mode))
    logger.debug("Loading image %s", filename)
    with Image.open(filename) as image:
        image.load()
        data = np.asarray(image.convert(mode), dtype=np.float64) / 255.
    if data.ndim == 2:
        data = data[:, :, None]
    return data


def quantize(img):
    """Clip an image to ``[0, 1]`` and round it to 8-bit integers."""
    img = np.asarray(img, dtype=np.float64)
    return np.round(np.clip(img, 0., 1.) * 255.).astype(np.uint8)


def save_image(img, filename):
    """Save an ``H x W x C`` image (C = 1 or 3) as an 8-bit PNG.

    Values are clipped to ``[0, 1]`` only here.
    """
    data = quantize(img)
    if data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    if data.ndim == 2:
        image = Image.fromarray(data)
    elif data.ndim == 3 and data.shape[2] == 3:
        image = Image.fromarray(data)
    else:
        raise ValueError("Cannot save image of shape {}".format(data.shape))
    dirname = os.path.dirname(filename)
    if dirname and not os.path.exists(dirname):
        os.makedirs(dirname)
    pnginfo = PngInfo()
    pnginfo.add_text('Software',
                     "Created with blindsr v{}".format(__version__))
    logger.debug("Saving image of shape %s to %s", img.shape, filename)
    image.save(filename, format='PNG', pnginfo=pnginfo)
    return filename


def modcrop(img, scale):
    """Crop the bottom and right edges so both sides are divisible by scale."""
    if scale < 1:
        raise ValueError("Scale must be at least 1, got {}".format(scale))
    height, width = img.shape[:2]
    height -= height % scale
    width -= width % scale
    if height == 0 or width == 0:
        raise ValueError("Image of shape {} is smaller than scale {}".format(
            img.shape, scale))
    return img[:height, :width, ...]


def mean_rgb(images):
    """Per-channel mean over all pixels of all images.

    Raises
    ------
    ValueError
        if `images` is empty.
    """
    total = None
    count = 0
    for img in images:
        img = np.asarray(img, dtype=np.float64)
        sums = img.reshape(-1, img.shape[-1]).sum(axis=0)
        total = sums if total is None else total + sums
        count += img.shape[0] * img.shape[1]
    if total is None:
        raise ValueError("Cannot compute the mean of an empty dataset")
    return total / count


def subtract_mean(img, mean):
    """Subtract a per-channel mean."""
    return img - np.asarray(mean)


def add_mean(img, mean):
    """Add a per-channel mean back."""
    return img + np.asarray(mean)


def to_tensor(images):
    """Stack ``H x W x C`` images into a ``(B, C, H, W)`` array."""
    if isinstance(images, np.ndarray) and images.ndim == 3:
        images = [images]
    return np.ascontiguousarray(np.stack(images).transpose(0, 3, 1, 2))


def to_images(tensor):
    """Split a ``(B, C, H, W)`` array into a list of ``H x W x C`` images."""
    return [np.ascontiguousarray(item.transpose(1, 2, 0)) for item in tensor]
