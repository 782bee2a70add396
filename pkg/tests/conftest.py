import numpy as np
import pytest

from viscowave.spectral import Field, make_grid


@pytest.fixture(scope="session")
def grid1d():
    # L = 20 keeps unit-width Gaussian truncation below 1e-40
    return make_grid(1, 512, 20.0)


@pytest.fixture(scope="session")
def grid2d():
    return make_grid(2, 64, 10.0)


def random_field(grid, seed=0, smooth=True):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape)
    if smooth:
        # mollify so spectral tails are resolved
        spec = np.fft.fftn(vals) * np.exp(-0.5 * grid.s)
        vals = np.fft.ifftn(spec).real
    return Field(grid, vals)
