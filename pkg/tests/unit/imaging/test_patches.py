"""Unit tests for :mod:`blindsr.imaging._patches`."""
import numpy as np
import pytest

import tests
from blindsr.imaging import (PatchBox, augment, dihedral_transform,
                             random_box, random_crops, random_patch_pair)


class TestPatchBox(tests.Test):
    def setUp(self):
        self.box = PatchBox(top=1, left=2, height=3, width=4)

    def test_crop(self):
        img = np.arange(60.).reshape(6, 10)
        self.assertArrayEqual(self.box.crop(img), img[1:4, 2:6])

    def test_inside(self):
        self.assertTrue(self.box.inside((4, 6)))
        self.assertFalse(self.box.inside((3, 6)))
        self.assertFalse(PatchBox(-1, 0, 2, 2).inside((8, 8)))

    def test_scaled(self):
        self.assertEqual(self.box.scaled(2), PatchBox(2, 4, 6, 8))


def test_random_box_covers_all_positions():
    rng = np.random.default_rng(0)
    boxes = {random_box((5, 4), 3, rng) for _ in range(300)}
    assert {(box.top, box.left) for box in boxes} == {
        (top, left) for top in range(3) for left in range(2)}
    assert all(box.inside((5, 4)) for box in boxes)


def test_random_crops():
    img = np.random.default_rng(1).random((20, 16, 3))
    crops = random_crops(img, 5, 8, np.random.default_rng(2))
    assert len(crops) == 5
    for patch, box in crops:
        assert patch.shape == (8, 8, 3)
        np.testing.assert_array_equal(patch, box.crop(img))


def test_random_crops_errors():
    img = np.zeros((6, 6, 3))
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match='smaller than'):
        random_crops(img, 1, 7, rng)
    with pytest.raises(ValueError, match='count'):
        random_crops(img, 0, 3, rng)


def test_random_patch_pair_aligned():
    lr = np.random.default_rng(3).random((10, 12, 3))
    hr = np.kron(lr, np.ones((3, 3, 1)))
    lr_patch, hr_patch = random_patch_pair(lr, hr, 4, 3,
                                           np.random.default_rng(4))
    assert lr_patch.shape == (4, 4, 3)
    assert hr_patch.shape == (12, 12, 3)
    np.testing.assert_array_equal(np.kron(lr_patch, np.ones((3, 3, 1))),
                                  hr_patch)


def test_dihedral_transforms():
    img = np.arange(6.).reshape(2, 3)
    results = [dihedral_transform(img, index) for index in range(8)]
    np.testing.assert_array_equal(results[0], img)
    np.testing.assert_array_equal(results[1], np.rot90(img))
    np.testing.assert_array_equal(results[4], img[:, ::-1])
    flat = {tuple(result.shape) + tuple(result.ravel()) for result in results}
    assert len(flat) == 8


@pytest.mark.parametrize('index', [-1, 8])
def test_dihedral_transform_invalid(index):
    with pytest.raises(ValueError):
        dihedral_transform(np.zeros((2, 2)), index)


def test_augment_keeps_pair_aligned():
    rng = np.random.default_rng(5)
    for _ in range(10):
        lr = rng.random((4, 3, 3))
        hr = np.kron(lr, np.ones((2, 2, 1)))
        lr_aug, hr_aug = augment(lr, hr, rng)
        np.testing.assert_array_equal(np.kron(lr_aug, np.ones((2, 2, 1))),
                                      hr_aug)


def test_augment_shape_mismatch():
    with pytest.raises(ValueError, match='not a multiple'):
        augment(np.zeros((4, 4, 3)), np.zeros((8, 7, 3)),
                np.random.default_rng(0))
