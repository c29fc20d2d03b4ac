import numpy as np
import pytest

from laptime.tire import MagicFormulaTire, load_tir
from laptime.data import default_tir_path


@pytest.fixture(scope="session")
def tir_params():
    return load_tir(default_tir_path())


@pytest.fixture(scope="session")
def tire(tir_params):
    return MagicFormulaTire(tir_params)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
