"""Patch cropping and dihedral augmentation."""
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

# Number of elements of the dihedral group of the square.
DIHEDRAL_ORDER = 8


@dataclass(frozen=True)
class PatchBox:
    """Axis aligned box inside an image."""

    top: int
    left: int
    height: int
    width: int

    def crop(self, img):
        """Return the part of `img` covered by the box."""
        return img[self.top:self.top + self.height,
                   self.left:self.left + self.width, ...]

    def inside(self, shape):
        """Check that the box lies entirely inside an image of `shape`."""
        return (self.top >= 0 and self.left >= 0
                and self.top + self.height <= shape[0]
                and self.left + self.width <= shape[1])

    def scaled(self, scale):
        """The corresponding box on an image `scale` times larger."""
        return PatchBox(self.top * scale, self.left * scale,
                        self.height * scale, self.width * scale)


def _check_fits(shape, box_size):
    if shape[0] < box_size or shape[1] < box_size:
        raise ValueError(
            "Image of size {}x{} is smaller than the {}x{} crop box".format(
                shape[0], shape[1], box_size, box_size))


def random_box(shape, box_size, rng):
    """Draw a box position uniformly over all valid positions."""
    _check_fits(shape, box_size)
    top = int(rng.integers(0, shape[0] - box_size + 1))
    left = int(rng.integers(0, shape[1] - box_size + 1))
    return PatchBox(top, left, box_size, box_size)


def random_crops(img, count, box_size, rng):
    """Crop `count` square patches at random positions.

    Parameters
    ----------
    img: numpy.ndarray
        ``H x W x C`` image.
    count: int
        Number of patches.
    box_size: int
        Side length of every patch.
    rng: numpy.random.Generator

    Returns
    -------
    list of tuple(numpy.ndarray, PatchBox)

    Raises
    ------
    ValueError
        if the image is smaller than the box.
    """
    if count < 1:
        raise ValueError("Patch count must be positive, got {}".format(count))
    _check_fits(img.shape, box_size)
    crops = []
    for _ in range(count):
        box = random_box(img.shape, box_size, rng)
        crops.append((box.crop(img), box))
    return crops


def random_patch_pair(lr, hr, lr_size, scale, rng):
    """Crop aligned patches of size `lr_size` and ``scale * lr_size``."""
    box = random_box(lr.shape, lr_size, rng)
    return box.crop(lr), box.scaled(scale).crop(hr)


def dihedral_transform(img, index):
    """Apply one of the 8 dihedral transforms to an image.

    ``index % 4`` quarter turns are applied first; ``index >= 4`` then
    reverses the columns. Index 0 is the identity and 4 is a horizontal
    flip.
    """
    if not 0 <= index < DIHEDRAL_ORDER:
        raise ValueError(
            "Dihedral transform index must be in [0, 8), got {}".format(index))
    result = np.rot90(img, k=index % 4, axes=(0, 1))
    if index >= 4:
        result = result[:, ::-1, ...]
    return np.ascontiguousarray(result)


def augment(lr, hr, rng):
    """Apply the same random dihedral transform to an LR/HR pair.

    Returns
    -------
    tuple(numpy.ndarray, numpy.ndarray)

    Raises
    ------
    ValueError
        if the HR image is not an integer multiple of the LR image.
    """
    scale = hr.shape[0] // lr.shape[0] if lr.shape[0] else 0
    if (scale < 1 or hr.shape[0] != scale * lr.shape[0]
            or hr.shape[1] != scale * lr.shape[1]):
        raise ValueError(
            "HR shape {} is not a multiple of LR shape {}".format(
                hr.shape, lr.shape))
    index = int(rng.integers(DIHEDRAL_ORDER))
    return dihedral_transform(lr, index), dihedral_transform(hr, index)
