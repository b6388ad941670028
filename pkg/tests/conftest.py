import numpy as np
import pytest


@pytest.fixture
def rng():
    """Fresh seeded generator per test so draws never couple across tests."""
    return np.random.default_rng(20260819)
