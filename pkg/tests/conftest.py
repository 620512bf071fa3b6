import numpy as np
import pytest
from hypothesis import settings

from braess_lab import instances

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig1():
    return instances.fig1()


@pytest.fixture
def fig2():
    return instances.fig2()


@pytest.fixture
def fig3():
    return instances.fig3()
