import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def random_image(rng):
    return rng.random((32, 32))
