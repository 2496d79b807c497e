import numpy as np
import pytest

from eup_bell import configuration
from eup_bell.quantum.deformation import model_from_alpha
from eup_bell.quantum.grid import make_grid


@pytest.fixture
def grid_1d():
    return make_grid(1, 64, 20.0)


@pytest.fixture
def grid_3d():
    return make_grid(3, 32, 18.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def eup_model():
    """Positive deformation inside the guard of the 3D grid."""
    return model_from_alpha(1.0e-3)


@pytest.fixture
def negative_model():
    return model_from_alpha(-1.0e-3)


@pytest.fixture(autouse=True)
def reset_configuration():
    configuration.config = {}
    yield
    configuration.config = {}
