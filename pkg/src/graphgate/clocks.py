"""Injectable time and identifier sources.

Decision records and incident triples carry timestamps and fresh IDs; tests
and the gold harness pin both so whole runs are byte-reproducible.
"""

from __future__ import annotations

import random
import uuid
from datetime import datetime, timedelta, timezone


class SystemClock:
    def now(self) -> datetime:
        return datetime.now(timezone.utc)


class FixedClock:
    """Starts at a fixed instant and advances by a fixed step per reading."""

    def __init__(self, start: datetime | None = None, step_seconds: float = 1.0):
        self._current = start or datetime(2024, 1, 1, tzinfo=timezone.utc)
        self._step = timedelta(seconds=step_seconds)

    def now(self) -> datetime:
        value = self._current
        self._current = value + self._step
        return value


class IdMinter:
    """UUID-like hex identifiers; seeded minters repeat exactly."""

    def __init__(self, seed: int | None = None):
        self._rng = random.Random(seed) if seed is not None else None

    def mint(self) -> str:
        if self._rng is None:
            return uuid.uuid4().hex
        return "".join(self._rng.choice("0123456789abcdef") for _ in range(32))

    def short(self) -> str:
        return self.mint()[:12]


def isoformat_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
