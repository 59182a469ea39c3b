import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from horoduality.geometry import space_from_name

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ALL_SPACES = ["e2", "e3", "h2", "h3", "spd2", "spd3", "h2xr"]


@pytest.fixture(params=ALL_SPACES)
def space(request):
    return space_from_name(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
