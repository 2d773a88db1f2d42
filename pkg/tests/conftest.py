import numpy as np
import pytest

from chaoscomm import (
    ChaoticBasisParams,
    RrcParams,
    sample_chaotic_basis,
    sample_rrc,
)

F_HZ = 600.0
FS_HZ = 9600.0
FC_HZ = 1800.0
TS = 1.0 / F_HZ


@pytest.fixture(scope="session")
def basis_params():
    return ChaoticBasisParams(F_HZ)


@pytest.fixture(scope="session")
def chaos_pulse(basis_params):
    return sample_chaotic_basis(basis_params, FS_HZ)


@pytest.fixture(scope="session")
def rrc_params():
    return RrcParams(0.35, TS, 4)


@pytest.fixture(scope="session")
def rrc_pulse(rrc_params):
    return sample_rrc(rrc_params, FS_HZ)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
