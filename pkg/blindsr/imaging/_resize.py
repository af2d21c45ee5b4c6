"""Bicubic resampling in the MATLAB ``imresize`` convention."""
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

# Cubic convolution parameter.
CUBIC_A = -0.5

_CUBIC_WIDTH = 4.


def cubic(x):
    """Keys cubic convolution kernel with ``a = -0.5``."""
    absx = np.abs(x)
    absx2 = absx**2
    absx3 = absx**3
    a = CUBIC_A
    near = ((a + 2.) * absx3 - (a + 3.) * absx2 + 1.) * (absx <= 1)
    far = (a * absx3 - 5. * a * absx2 + 8. * a * absx - 4. * a) * (
        (absx > 1) & (absx <= 2))
    return near + far


def _fold_symmetric(indices, length):
    """Map out-of-range indices back into ``[0, length)`` by mirroring.

    The edge pixel is repeated (``c b a | a b c | c b a``).
    """
    period = 2 * length
    indices = np.mod(indices, period)
    return np.where(indices >= length, period - 1 - indices, indices)


def output_length(in_length, scale):
    """Return ``ceil(in_length * scale)``, robust to round-off in `scale`."""
    return int(math.ceil(in_length * scale - 1e-9))


def resize_matrix(in_length, out_length, scale, antialias=True):
    """Dense ``(out_length, in_length)`` bicubic resampling matrix.

    Output pixel ``k`` (1-based) is centred at input coordinate
    ``u = k / scale + 0.5 * (1 - 1 / scale)``. When downscaling with
    `antialias`, the kernel is stretched by ``1 / scale``. Weights of every
    row are normalized to sum to one and taps falling outside the input are
    folded back symmetrically.
    """
    width = _CUBIC_WIDTH
    stretch = scale < 1 and antialias
    if stretch:
        width = width / scale
    positions = np.arange(1, out_length + 1, dtype=np.float64)
    centers = positions / scale + 0.5 * (1. - 1. / scale)
    left = np.floor(centers - width / 2.)
    taps = int(math.ceil(width)) + 2
    indices = left[:, None] + np.arange(taps)[None, :]
    distance = centers[:, None] - indices
    if stretch:
        weights = scale * cubic(distance * scale)
    else:
        weights = cubic(distance)
    weights = weights / weights.sum(axis=1, keepdims=True)

    columns = _fold_symmetric(indices.astype(np.int64) - 1, in_length)
    rows = np.repeat(np.arange(out_length), taps)
    matrix = np.zeros((out_length, in_length))
    np.add.at(matrix, (rows, columns.ravel()), weights.ravel())
    return matrix


def bicubic_resize(img, scale, antialias=True):
    """Resize an image by `scale` with bicubic interpolation.

    Parameters
    ----------
    img: numpy.ndarray
        ``H x W`` or ``H x W x C`` array.
    scale: float or fractions.Fraction
        Resize factor, ``< 1`` downscales.
    antialias: bool
        Widen the cubic support by ``1 / scale`` when downscaling.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(ceil(H * scale), ceil(W * scale), ...)``.
        Values are not clipped.

    Raises
    ------
    ValueError
        if `scale` is not positive or the target size is empty.
    """
    scale = float(scale)
    if not scale > 0:
        raise ValueError(
            "Resize scale must be positive, got {}".format(scale))
    img = np.asarray(img, dtype=np.float64)
    height, width = img.shape[:2]
    out_height = output_length(height, scale)
    out_width = output_length(width, scale)
    if out_height < 1 or out_width < 1:
        raise ValueError(
            "Resizing a {}x{} image by {} gives an empty image".format(
                height, width, scale))
    logger.debug("Resizing %sx%s image to %sx%s", height, width, out_height,
                 out_width)
    rows = resize_matrix(height, out_height, scale, antialias)
    cols = resize_matrix(width, out_width, scale, antialias)
    result = np.tensordot(rows, img, axes=(1, 0))
    result = np.moveaxis(np.tensordot(cols, result, axes=(1, 1)), 0, 1)
    return result
