import logging

import pytest

from tests.helpers import SignalFactory
from vnumra import LctParams, Resolution, VnumraSystem, build_system
from vnumra.testing import (
    box_bank,
    daubechies_bank,
    haar_bank,
    mixed_daubechies_bank,
    non_fourier_params,
)

logging.basicConfig(level=logging.DEBUG)


@pytest.fixture(scope="function")
def signals() -> SignalFactory:
    return SignalFactory.seeded(20240611)


@pytest.fixture(scope="session")
def fourier() -> LctParams:
    return LctParams.fourier()


@pytest.fixture(scope="session")
def haar_system(fourier) -> VnumraSystem:
    return build_system(fourier, haar_bank())


@pytest.fixture(scope="session")
def chirped_haar_system() -> VnumraSystem:
    return build_system(non_fourier_params(), haar_bank())


@pytest.fixture(scope="session")
def haar3_system() -> VnumraSystem:
    return build_system(non_fourier_params(), haar_bank(3))


@pytest.fixture(scope="session")
def box_system(fourier) -> VnumraSystem:
    return build_system(fourier, box_bank(), Resolution(depth=0))


@pytest.fixture(scope="session")
def daubechies_system(fourier) -> VnumraSystem:
    return build_system(fourier, daubechies_bank())


@pytest.fixture(scope="session")
def mixed_system() -> VnumraSystem:
    return build_system(non_fourier_params(), mixed_daubechies_bank())
