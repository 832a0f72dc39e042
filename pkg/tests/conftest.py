import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def walk(rng, n, sigma=0.5, spacing="unit"):
    """Random-walk stream; irregular spacing draws gaps from [0.1, 2)."""
    if spacing == "unit":
        t = np.arange(1, n + 1, dtype=float)
    else:
        t = 1.0 + np.cumsum(rng.uniform(0.1, 2.0, n))
    y = np.cumsum(rng.normal(0.0, sigma, n))
    return t, y
