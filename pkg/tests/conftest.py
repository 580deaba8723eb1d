import numpy as np
import pytest

from donorsim import DeviceParameters


@pytest.fixture(scope="session")
def p():
    return DeviceParameters()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
