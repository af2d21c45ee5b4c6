"""Data finder and dataset ingestion for blindsr."""
import fnmatch
import hashlib
import logging
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .imaging import load_image, mean_rgb, modcrop, quantize, save_image

logger = logging.getLogger(__name__)

IMAGE_PATTERNS = ('*.png', '*.PNG')
INDEX_FILE = 'index.yml'


class DataError(Exception):
    """Input data is missing or unusable."""


def find_files(dirnames, filenames):
    """Find files matching filenames in dirnames."""
    logger.debug("Looking for files matching %s in %s", filenames, dirnames)

    result = []
    for dirname in dirnames:
        for path, _, files in os.walk(dirname, followlinks=True):
            for filename in filenames:
                matches = fnmatch.filter(files, filename)
                result.extend(os.path.join(path, f) for f in matches)

    return sorted(set(result))


def find_images(dirname):
    """Return the sorted PNG files below `dirname`.

    Raises
    ------
    DataError
        if the directory does not exist or holds no PNG files.
    """
    if dirname is None or not os.path.isdir(dirname):
        raise DataError("Image directory {} does not exist".format(dirname))
    files = find_files([dirname], IMAGE_PATTERNS)
    if not files:
        raise DataError("No PNG images found in {}".format(dirname))
    return files


def image_id(filename, root):
    """Identifier of an image: its path below `root` without extension."""
    relative = os.path.relpath(filename, root)
    return os.path.splitext(relative)[0].replace(os.sep, '/')


def load_images(dirname, limit=None):
    """Load all readable PNG images below `dirname`.

    Unreadable files are skipped with a warning.

    Returns
    -------
    list of tuple(str, numpy.ndarray)
        ``(image_id, image)`` pairs in sorted order.

    Raises
    ------
    DataError
        if no image could be read.
    """
    images = []
    for filename in find_images(dirname):
        try:
            img = load_image(filename)
        except (OSError, ValueError) as exc:
            logger.warning("Skipping unreadable image %s: %s", filename, exc)
            continue
        images.append((image_id(filename, dirname), img))
        if limit is not None and len(images) >= limit:
            break
    if not images:
        raise DataError("None of the images in {} could be read".format(
            dirname))
    return images


def _digest(img):
    """SHA-256 of the 8-bit content and shape of an image."""
    data = quantize(img)
    sha = hashlib.sha256()
    sha.update(repr(data.shape).encode('utf-8'))
    sha.update(data.tobytes())
    return sha.hexdigest()


@dataclass
class DatasetHandle:
    """An ingested dataset: cropped HR images, their mean and an index.

    Attributes
    ----------
    index_file: str
    scale: int
        Every image side is divisible by this factor.
    mean: numpy.ndarray
        Per-channel mean over all pixels.
    entries: list of dict
        ``id``, ``file``, ``source``, ``height``, ``width`` and ``sha256``
        per image.
    """

    index_file: str
    scale: int
    mean: np.ndarray
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    @property
    def ids(self):
        return [entry['id'] for entry in self.entries]

    def filenames(self):
        root = os.path.dirname(self.index_file)
        return [os.path.join(root, entry['file']) for entry in self.entries]

    def images(self, limit=None):
        """Load the cropped images."""
        files = self.filenames()
        if limit is not None:
            files = files[:limit]
        return [load_image(filename) for filename in files]

    @classmethod
    def load(cls, index_file):
        """Open a dataset from its index file.

        Raises
        ------
        DataError
            if the index is missing or malformed.
        """
        if not os.path.isfile(index_file):
            raise DataError("Dataset index {} does not exist".format(
                index_file))
        with open(index_file, 'r') as file:
            index = yaml.safe_load(file)
        try:
            return cls(index_file=index_file,
                       scale=int(index['scale']),
                       mean=np.array(index['mean'], dtype=np.float64),
                       entries=list(index['images']))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError("Malformed dataset index {}: {}".format(
                index_file, exc)) from exc


def ingest_dataset(dirname, scale, cache_dir):
    """Prepare a directory of HR images for training or evaluation.

    Every readable PNG below `dirname` is cropped so that both sides are
    divisible by `scale` and written to ``cache_dir/images``. The mean RGB
    value, the image list and a SHA-256 digest per image go into
    ``cache_dir/index.yml``; ingesting the same inputs twice gives an
    identical index.

    Parameters
    ----------
    dirname: str
    scale: int
    cache_dir: str

    Returns
    -------
    DatasetHandle

    Raises
    ------
    DataError
        if the directory is missing or holds no readable image.
    """
    files = find_images(dirname)
    logger.info("Ingesting %s image files from %s", len(files), dirname)
    image_dir = os.path.join(cache_dir, 'images')
    os.makedirs(image_dir, exist_ok=True)

    entries = []
    images = []
    for filename in files:
        try:
            img = load_image(filename)
            img = modcrop(img, scale)
        except (OSError, ValueError) as exc:
            logger.warning("Skipping image %s: %s", filename, exc)
            continue
        name = image_id(filename, dirname)
        target = os.path.join('images', name.replace('/', '__') + '.png')
        save_image(img, os.path.join(cache_dir, target))
        entries.append({
            'id': name,
            'file': target,
            'source': os.path.relpath(filename, dirname),
            'height': int(img.shape[0]),
            'width': int(img.shape[1]),
            'sha256': _digest(img),
        })
        images.append(img)
    if not entries:
        raise DataError("None of the images in {} could be read".format(
            dirname))

    mean = mean_rgb(images)
    index = {
        'scale': int(scale),
        'mean': [float(value) for value in mean],
        'images': entries,
    }
    index_file = os.path.join(cache_dir, INDEX_FILE)
    with open(index_file, 'w') as file:
        yaml.safe_dump(index, file, sort_keys=True)
    logger.info("Ingested %s images, mean RGB %s, index %s", len(entries),
                index['mean'], index_file)
    return DatasetHandle(index_file, int(scale), mean, entries)
