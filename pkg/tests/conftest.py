import numpy as np
import pytest

from dsii.lib.grid.ComplexGrid import gaussian, make_grid


@pytest.fixture
def small_grid():
    return make_grid(5.0, 16)


@pytest.fixture
def small_kgrid():
    return make_grid(6.0, 16)


@pytest.fixture
def weak_gaussian(small_grid):
    return gaussian(small_grid, 0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
