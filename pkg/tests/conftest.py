import pytest

from minitwistor.segre import build_surface, default_surface


@pytest.fixture(scope="session")
def S():
    return default_surface("approx")


@pytest.fixture(scope="session")
def S_exact():
    return build_surface(16, 0, 25, "exact")
