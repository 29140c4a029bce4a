import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

reals = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, reals, reals)
small_complexes = st.builds(complex, st.floats(-1, 1), st.floats(-1, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, size=None, scale=1.0):
    return scale * (rng.normal(size=size) + 1j * rng.normal(size=size))
