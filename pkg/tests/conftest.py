import pytest

from agentgate.core import ManualClock, SeededRandomSource


@pytest.fixture
def clock() -> ManualClock:
    return ManualClock()


@pytest.fixture
def rng() -> SeededRandomSource:
    return SeededRandomSource(1234)
