import numpy as np
import pytest

from mpmp.geometry import FluidAntennaGeometry, UpaGeometry, wavelength_of

CARRIER = 39e9
LAM = wavelength_of(CARRIER)


@pytest.fixture
def lam():
    return LAM


@pytest.fixture
def bs88():
    return UpaGeometry(n_h=8, n_v=8, d_h=LAM / 2, d_v=LAM / 2)


@pytest.fixture
def bs28():
    return UpaGeometry(n_h=2, n_v=8, d_h=LAM / 2, d_v=LAM / 2)


@pytest.fixture
def fa300():
    return FluidAntennaGeometry(w=20.0, m_ports=300, wavelength=LAM)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
