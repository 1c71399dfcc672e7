import os

# Pin the thread pool before numba is first imported so the determinism
# test can flip between 1 and 4 workers at runtime.
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import numpy as np
import pytest

from gringotts import (ClearingParams, build_monopoly_network,
                       build_split_network, derive_gdp)


@pytest.fixture(scope="session")
def calib():
    return derive_gdp()


@pytest.fixture(scope="session")
def split_net(calib):
    return build_split_network(calib)


@pytest.fixture(scope="session")
def mono_net(calib):
    return build_monopoly_network(calib)


@pytest.fixture(scope="session")
def default_params():
    return ClearingParams.from_bankruptcy_cost(0.10)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
