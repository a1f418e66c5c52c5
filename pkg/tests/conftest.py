import numpy as np
import pytest

from qprobe import build_space, reference_params


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def space32():
    return build_space(32, 1.0, 1.0)


@pytest.fixture
def space64():
    return build_space(64, 1.0, 1.0)


@pytest.fixture
def desk_params():
    # natural units, chi = 1, nbar = 1/2, per-step exponent 1/2
    return reference_params(chi=1.0, nbar=0.5, d01=0.5)
