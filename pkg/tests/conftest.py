from __future__ import annotations

from datetime import datetime, timezone

import pytest

from agentgov import fixtures
from agentgov.charter import load_charter
from agentgov.clock import ManualClock


@pytest.fixture
def charter():
    return load_charter(fixtures.DEFAULT_CHARTER_YAML)


@pytest.fixture
def clock():
    return ManualClock(datetime(2026, 3, 14, 10, 23, 41, tzinfo=timezone.utc))


@pytest.fixture
def engine(tmp_path):
    return fixtures.build_engine(data_dir=tmp_path / "state")
