import numpy as np
import pytest

from hoisolver.mesh import make_box, make_icosphere
from hoisolver.skeleton import load_skeleton


@pytest.fixture(scope="session")
def unit_cube():
    return make_box((1.0, 1.0, 1.0))


@pytest.fixture(scope="session")
def icosphere():
    return make_icosphere(radius=0.7, subdivisions=2)


@pytest.fixture(scope="session")
def skeleton():
    return load_skeleton()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
