"""Shared fixtures and hypothesis settings for the test suite."""

import pytest
from hypothesis import HealthCheck, settings

from fbmkit.context import make_context

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def ctx25():
    return make_context(0.25)


@pytest.fixture(scope="session")
def ctx75():
    return make_context(0.75)
