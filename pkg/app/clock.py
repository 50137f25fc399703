"""
Injectable clock
A fixed clock makes end-to-end outputs byte-stable for testing
"""

import time
from datetime import datetime, timezone
from typing import Optional


class Clock:
    """Real wall clock and monotonic timer"""

    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def monotonic(self) -> float:
        return time.perf_counter()


class FixedClock(Clock):
    """Clock frozen at one instant; elapsed time is always zero"""

    def __init__(self, instant: datetime):
        if instant.tzinfo is None:
            instant = instant.replace(tzinfo=timezone.utc)
        self.instant = instant

    def now(self) -> datetime:
        return self.instant

    def monotonic(self) -> float:
        return 0.0


def make_clock(fixed: Optional[datetime] = None) -> Clock:
    """Return a FixedClock when a fixed instant is configured, else the real clock"""
    return FixedClock(fixed) if fixed is not None else Clock()
