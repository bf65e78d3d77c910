"""Time sources.

Nodes never read the wall clock directly; they hold a clock object so the
simulation can drive a fully deterministic timeline and live serving can use
real time with no other change.
"""

from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    def now(self) -> int:
        """Current time as UTC epoch seconds."""
        ...


class SystemClock:
    """Wall-clock time, second granularity."""

    def now(self) -> int:
        return int(time.time())


class SimClock:
    """Manually advanced clock for deterministic simulation."""

    def __init__(self, start: int = 0):
        self._now = start

    def now(self) -> int:
        return self._now

    def advance(self, seconds: int) -> None:
        if seconds < 0:
            raise ValueError("clock cannot move backward")
        self._now += seconds

    def advance_to(self, instant: int) -> None:
        if instant < self._now:
            raise ValueError("clock cannot move backward")
        self._now = instant
