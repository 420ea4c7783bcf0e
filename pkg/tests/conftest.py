import pytest

from singmech.models import (
    model_G1,
    model_G2,
    model_R,
    model_S1,
    model_S2,
    mt_drift,
    mt_shear,
)
from singmech.pipeline import AnalysisConfig, analyze

_RESULTS = {}


def analyzed(name):
    """Analysis results are pure; cache per session to keep tests fast."""
    if name not in _RESULTS:
        builders = {
            "R": model_R,
            "S1": model_S1,
            "S2": model_S2,
            "G1": model_G1,
            "G2": model_G2,
        }
        _RESULTS[name] = analyze(builders[name](), AnalysisConfig())
    return _RESULTS[name]


@pytest.fixture
def res_R():
    return analyzed("R")


@pytest.fixture
def res_S1():
    return analyzed("S1")


@pytest.fixture
def res_S2():
    return analyzed("S2")


@pytest.fixture
def res_G1():
    return analyzed("G1")


@pytest.fixture
def res_G2():
    return analyzed("G2")


@pytest.fixture
def drift():
    return mt_drift()


@pytest.fixture
def shear():
    return mt_shear()
