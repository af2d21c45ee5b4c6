"""Tests for _data_finder.py."""
import os

import numpy as np
import pytest
import yaml

from blindsr._data_finder import (INDEX_FILE, DataError, DatasetHandle,
                                  find_images, image_id, ingest_dataset,
                                  load_images)
from blindsr.imaging import load_image, save_image
from tests import smooth_image, write_images

# Load test configuration
with open(os.path.join(os.path.dirname(__file__), 'data_finder.yml')) as file:
    CONFIG = yaml.safe_load(file)


def create_tree(path, filenames):
    """Create PNG images, or empty files for other suffixes."""
    for index, filename in enumerate(filenames):
        target = os.path.join(path, filename)
        os.makedirs(os.path.dirname(target), exist_ok=True)
        if filename.lower().endswith('.png'):
            save_image(smooth_image(8, 8, index), target)
        else:
            with open(target, 'a'):
                pass


@pytest.mark.parametrize('cfg', CONFIG['find_images'],
                         ids=[cfg['name'] for cfg in CONFIG['find_images']])
def test_find_images(tmp_path, cfg):
    root = str(tmp_path / 'images')
    create_tree(root, cfg['files'])
    found = [image_id(filename, root) for filename in find_images(root)]
    assert sorted(found) == cfg['ids']


def test_find_images_missing(tmp_path):
    with pytest.raises(DataError, match='does not exist'):
        find_images(str(tmp_path / 'nothing'))
    os.makedirs(str(tmp_path / 'empty'))
    with pytest.raises(DataError, match='No PNG images'):
        find_images(str(tmp_path / 'empty'))


def test_load_images_skips_corrupt(tmp_path):
    root = str(tmp_path / 'images')
    write_images(root, 3, 12, 10)
    with open(os.path.join(root, 'broken.png'), 'wb') as file:
        file.write(b'not a png')
    images = load_images(root)
    assert [name for name, _ in images] == ['img00', 'img01', 'img02']
    assert images[0][1].shape == (12, 10, 3)
    assert len(load_images(root, limit=2)) == 2


def test_load_images_all_corrupt(tmp_path):
    root = tmp_path / 'images'
    root.mkdir()
    (root / 'broken.png').write_bytes(b'not a png')
    with pytest.raises(DataError, match='could be read'):
        load_images(str(root))


def test_ingest_dataset(tmp_path):
    root = str(tmp_path / 'images')
    write_images(root, 3, 13, 11)
    with open(os.path.join(root, 'broken.png'), 'wb') as file:
        file.write(b'not a png')
    handle = ingest_dataset(root, 4, str(tmp_path / 'cache'))

    assert len(handle) == 3
    assert handle.ids == ['img00', 'img01', 'img02']
    assert handle.scale == 4
    for entry in handle.entries:
        assert (entry['height'], entry['width']) == (12, 8)
        assert len(entry['sha256']) == 64
    images = handle.images()
    assert all(img.shape == (12, 8, 3) for img in images)
    original = load_image(os.path.join(root, 'img01.png'))
    np.testing.assert_array_equal(images[1], original[:12, :8])
    np.testing.assert_allclose(
        handle.mean,
        np.concatenate([img.reshape(-1, 3) for img in images]).mean(axis=0))
    assert len(handle.images(limit=1)) == 1


def test_ingest_dataset_is_reproducible(tmp_path):
    root = str(tmp_path / 'images')
    write_images(root, 2, 16, 16)
    first = ingest_dataset(root, 2, str(tmp_path / 'first'))
    second = ingest_dataset(root, 2, str(tmp_path / 'second'))
    with open(first.index_file) as file:
        first_index = file.read()
    with open(second.index_file) as file:
        second_index = file.read()
    assert first_index == second_index
    assert os.path.basename(first.index_file) == INDEX_FILE


def test_ingest_dataset_rerun_in_same_cache(tmp_path):
    root = str(tmp_path / 'images')
    write_images(root, 3, 17, 15)
    cache = str(tmp_path / 'cache')
    first = ingest_dataset(root, 2, cache)
    with open(first.index_file) as file:
        first_index = file.read()
    second = ingest_dataset(root, 2, cache)
    with open(second.index_file) as file:
        assert file.read() == first_index
    assert second.entries == first.entries
    assert sorted(os.listdir(os.path.join(cache, 'images'))) == sorted(
        os.path.basename(entry['file']) for entry in first.entries)


def test_dataset_handle_load(tmp_path):
    root = str(tmp_path / 'images')
    write_images(root, 2, 8, 8)
    handle = ingest_dataset(root, 2, str(tmp_path / 'cache'))
    loaded = DatasetHandle.load(handle.index_file)
    assert loaded.entries == handle.entries
    np.testing.assert_allclose(loaded.mean, handle.mean)
    assert loaded.filenames() == handle.filenames()


def test_dataset_handle_load_errors(tmp_path):
    with pytest.raises(DataError, match='does not exist'):
        DatasetHandle.load(str(tmp_path / INDEX_FILE))
    index_file = tmp_path / INDEX_FILE
    index_file.write_text('scale: 2\n')
    with pytest.raises(DataError, match='Malformed'):
        DatasetHandle.load(str(index_file))
