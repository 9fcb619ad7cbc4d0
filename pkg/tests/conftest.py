import numpy as np
import pytest

from lyaplab import GammaOptions, TorusPotential


@pytest.fixture(scope="session")
def corpus():
    """The five-potential solver corpus: constant, three trig, one grid."""
    return [
        TorusPotential.constant(2.0),
        TorusPotential.trig(2.0, (1.0,)),
        TorusPotential.trig(2.0, (0.9,), (0.0, 0.3)),
        TorusPotential.trig(2.0, (0.6, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.15),
                            (0.0, 0.35, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0)),
        TorusPotential.grid((1.0, 2.5, 3.0, 2.0, 1.5, 2.2, 2.8, 1.2)),
    ]


@pytest.fixture(scope="session")
def opts():
    return GammaOptions()


@pytest.fixture(scope="session")
def vcos():
    return TorusPotential.trig(2.0, (1.0,))


def rng_for(*key):
    return np.random.default_rng(key)
