import numpy as np
import pytest
from hypothesis import settings

from clifftorsion import geometry as geo
from clifftorsion.clifford import Signature
from clifftorsion.spinor import build_gamma

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def flat4():
    sig = Signature(4, 0)
    return geo.build_chart("flat", (4, 4, 4, 4), 0.5, sig), build_gamma(sig)


@pytest.fixture(scope="session")
def flat2():
    sig = Signature(2, 0)
    return geo.build_chart("flat", (6, 6), 0.4, sig), build_gamma(sig)


@pytest.fixture(scope="session")
def conformal2():
    sig = Signature(2, 0)
    return geo.build_chart("conformal", (8, 8), 0.5, sig, amplitude=0.1), build_gamma(sig)
