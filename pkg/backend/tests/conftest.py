import os

# Keep test runs out of the CSV activity logs
os.environ.setdefault("ACTIVITY_LOG_ENABLED", "false")

import pytest

from app.models.switch import SwitchConfig, Trace
from app.services.workloads import tight_two_valued_trace, two_valued_config


@pytest.fixture
def tight_config() -> SwitchConfig:
    """Values {1, 2}, one unit-capacity queue each."""
    return two_valued_config(2, 1)


@pytest.fixture
def tight_trace(tight_config) -> Trace:
    return tight_two_valued_trace(tight_config)


@pytest.fixture
def powers_of_two() -> SwitchConfig:
    return SwitchConfig.restricted([1, 2, 4], 2)
