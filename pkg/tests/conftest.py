import pytest

from config import load_device
from noise_ensemble import NoiseModel


@pytest.fixture
def reference_spec():
    return load_device("reference")


@pytest.fixture
def selective_spec():
    return load_device("selective")


@pytest.fixture
def noiseless():
    return NoiseModel.noiseless()
