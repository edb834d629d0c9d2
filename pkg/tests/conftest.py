import numpy as np
import pytest

from choquard.grids import Grid, ModelParams
from choquard.landscape import compute_constants

REF_D, REF_ALPHA, REF_Q = 3, 2.0, 1.9


@pytest.fixture(scope="session")
def params():
    return ModelParams(REF_D, REF_ALPHA, REF_Q)


@pytest.fixture(scope="session")
def constants(params):
    return compute_constants(params)


@pytest.fixture(scope="session")
def grid32():
    return Grid(3, 32, 12.0)


@pytest.fixture(scope="session")
def grid64():
    return Grid(3, 64, 12.0)


@pytest.fixture(scope="session")
def grid128():
    return Grid(3, 128, 12.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_localized_field(grid, rng, n_bumps=3, width_range=(0.8, 2.2),
                           center_box=2.5, complex_amp=True):
    """Smooth decaying random field: quadrature-faithful surrogate of a
    whole-space state (tails negligible at the boundary)."""
    from choquard.grids import Field, gaussian
    vals = np.zeros(grid.shape, dtype=np.complex128)
    for _ in range(n_bumps):
        width = float(rng.uniform(*width_range))
        center = rng.uniform(-center_box, center_box, size=grid.d)
        if complex_amp:
            amp = complex(rng.normal(), rng.normal())
        else:
            amp = float(rng.normal())
        vals += amp * gaussian(grid, width=width, center=center).values
    return Field(grid, vals)
