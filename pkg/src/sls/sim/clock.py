"""Clock adapters: simulated time for deterministic runs, wall time for live."""

from __future__ import annotations

import time

__all__ = ["VirtualClock", "WallClock"]


class VirtualClock:
    """Time advances only when explicitly stepped; sleeping is free."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def advance(self, dt: float) -> float:
        if dt < 0:
            raise ValueError("cannot advance time backwards")
        self._now += dt
        return self._now

    def sleep(self, dt: float):
        self.advance(dt)


class WallClock:
    """Real time, for the live console path. Same interface as VirtualClock."""

    def __init__(self):
        self._start = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._start

    def sleep(self, dt: float):
        if dt > 0:
            time.sleep(dt)
