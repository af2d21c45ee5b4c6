import numpy as np
import pytest

from blindsr._random import child_rng, child_seed


def test_child_rng_reproducible():
    first = child_rng(3, 'eval', 1, 2).random(4)
    second = child_rng(3, 'eval', 1, 2).random(4)
    np.testing.assert_array_equal(first, second)


@pytest.mark.parametrize('keys', [
    (4, 'eval', 1, 2),
    (3, 'eval', 2, 1),
    (3, 'eval-crops', 1, 2),
    (3, 'eval', 1),
])
def test_children_are_independent(keys):
    reference = child_rng(3, 'eval', 1, 2).random(4)
    assert not np.array_equal(child_rng(*keys).random(4), reference)


def test_child_seed_spawn_key():
    seed = child_seed(7, 'dot', 5)
    assert seed.entropy == 7
    assert len(seed.spawn_key) == 2
    assert seed.spawn_key[1] == 5


def test_invalid_keys():
    with pytest.raises(ValueError):
        child_rng(0, -1)
    with pytest.raises(TypeError):
        child_rng(0, 1.5)
