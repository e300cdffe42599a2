import numpy as np
import pytest

from editplan import resize_bilinear


def photo_like(rng, size=64, noise=0.02):
    """Smooth low-frequency random image kept away from the [0, 1] rails,
    so edits don't destroy information through clipping."""
    base = rng.random((4, 4, 3))
    img = resize_bilinear(base, size, size)
    img = 0.15 + 0.7 * img + noise * rng.standard_normal((size, size, 3))
    return np.clip(img, 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
