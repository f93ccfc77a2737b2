"""Logical clock injection: every timestamp in the kernel flows through a clock
callable so tests (daily-burn windows, audit timestamps) are deterministic.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Callable

Clock = Callable[[], datetime]

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def utc_now() -> datetime:
    """Wall clock, UTC, truncated to second precision."""
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    """Second-precision "YYYY-MM-DDTHH:MM:SSZ"; the instant must be UTC-aware."""
    if dt.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware UTC instants")
    return dt.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT)


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, TIMESTAMP_FORMAT).replace(tzinfo=timezone.utc)


def day_start(instant: datetime) -> datetime:
    """00:00:00Z of the instant's UTC calendar day (the daily-burn window start)."""
    utc = instant.astimezone(timezone.utc)
    return utc.replace(hour=0, minute=0, second=0, microsecond=0)


class ManualClock:
    """A settable clock for tests; call it like a function."""

    def __init__(self, start: datetime | None = None):
        self._now = (start or datetime(2026, 3, 14, 10, 23, 41, tzinfo=timezone.utc)).replace(
            microsecond=0
        )

    def __call__(self) -> datetime:
        return self._now

    def advance(self, seconds: int = 1) -> datetime:
        self._now += timedelta(seconds=seconds)
        return self._now

    def set(self, instant: datetime) -> None:
        if instant.tzinfo is None:
            raise ValueError("ManualClock requires timezone-aware instants")
        self._now = instant.replace(microsecond=0)
