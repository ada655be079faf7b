"""Character transform tests."""

import numpy as np
import pytest

from core.errors import FieldMismatchError, PrecisionLossError
from core.transform import (
    character_transform,
    digits_count,
    exact_dot,
    to_exact,
    walsh_hadamard,
)


def test_walsh_hadamard_small():
    """Transform of a point mass is the character row."""
    values = np.array([0, 1, 0, 0], dtype=np.int64)
    assert list(walsh_hadamard(values)) == [1, -1, 1, -1]


def test_walsh_hadamard_inverse():
    rng = np.random.default_rng(1)
    values = rng.integers(0, 100, size=256).astype(np.int64)
    twice = walsh_hadamard(walsh_hadamard(values))
    assert np.array_equal(twice, 256 * values)


@pytest.mark.parametrize("p,n", [(3, 4), (5, 2)])
def test_convolution_theorem(p, n):
    """The transform turns digitwise convolution into a product."""
    size = p**n
    rng = np.random.default_rng(p)
    f = rng.integers(0, 5, size=size)
    g = rng.integers(0, 5, size=size)
    weights = p ** np.arange(n)
    digits = (np.arange(size)[:, None] // weights) % p
    direct = np.zeros(size, dtype=np.int64)
    for x in range(size):
        shifted = (((digits - digits[x]) % p) @ weights).astype(np.int64)
        direct += f[x] * g[shifted]
    transformed = np.fft.ifftn(
        (character_transform(f, p) * character_transform(g, p)).reshape((p,) * n)
    ).reshape(size)
    assert np.array_equal(to_exact(transformed, magnitude=float(f.sum() * g.sum())), direct)


def test_digits_count():
    assert digits_count(81, 3) == 4
    assert digits_count(1, 5) == 0
    with pytest.raises(FieldMismatchError):
        digits_count(10, 3)


def test_to_exact_rejects_noise():
    with pytest.raises(PrecisionLossError):
        to_exact(np.array([1.3, 2.0]))


def test_to_exact_rejects_huge():
    with pytest.raises(PrecisionLossError):
        to_exact(np.array([1.0]), magnitude=2.0**60)


def test_to_exact_scale():
    assert list(to_exact(np.array([8, 16], dtype=np.int64), scale=8)) == [1, 2]
    with pytest.raises(PrecisionLossError):
        to_exact(np.array([3], dtype=np.int64), scale=2)


def test_exact_dot_large():
    """Products beyond int64 fall back to Python integers."""
    u = np.array([2**40, 3], dtype=np.int64)
    assert exact_dot(u, u) == 2**80 + 9
