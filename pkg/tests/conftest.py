import numpy as np
import pytest

from bsqlab import scattering as sc
from bsqlab import soliton as so

K1 = 1.3


@pytest.fixture(scope="session")
def c13():
    return so.real_constant_with_modulus(K1, 0.1)


@pytest.fixture(scope="session")
def one_soliton(c13):
    return so.SolitonSpectrum(real_solitons=((K1, c13),))


@pytest.fixture(scope="session")
def breather_spec():
    return so.SolitonSpectrum(breathers=((1.5 * np.exp(0.3j), 0.2 + 0.1j),))


@pytest.fixture(scope="session")
def mixed_spec(c13):
    return so.SolitonSpectrum(breathers=((1.5 * np.exp(0.3j), 0.2 + 0.1j),), real_solitons=((K1, c13),))


@pytest.fixture(scope="session")
def bump_table():
    return sc.synthetic_table(sc.BumpProfile())


@pytest.fixture(scope="session")
def bump_data():
    return sc.gaussian_data(0.3, width=1.0, support_radius=8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
