import numpy as np
import pytest

from epor.curve import bootstrap, flat_quotes
from epor.hullwhite import HullWhiteParams
from epor.instruments import AmortizingSwapSpec
from epor.relocation import IntensityParams
from epor.valuation import make_grid


@pytest.fixture(scope="session")
def curve():
    return bootstrap(flat_quotes(0.03, [1, 3, 5, 7, 10]))


@pytest.fixture(scope="session")
def params(curve):
    return HullWhiteParams(0.05, 0.01, curve)


@pytest.fixture(scope="session")
def bullet():
    return AmortizingSwapSpec.build("bullet", 10.0, 1, 0.03)


@pytest.fixture(scope="session")
def linear():
    return AmortizingSwapSpec.build("linear", 10.0, 1, 0.03)


@pytest.fixture(scope="session")
def grid(bullet):
    return make_grid(0.0, 10.0, 1.0 / 48.0, bullet.payment_dates)


@pytest.fixture(scope="session")
def ip():
    return IntensityParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
