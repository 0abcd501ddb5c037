"""Clock abstraction: real wall time for deployments, virtual time for tests.

Daemons take a Clock instead of calling time.time() directly so the
simulation harness can own time and step it deterministically.
"""

from __future__ import annotations

import time


class SystemClock:
    def now(self) -> float:
        return time.time()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class VirtualClock:
    """Manually advanced clock. sleep() advances time instead of blocking."""

    def __init__(self, start: float = 0.0):
        self._t = float(start)

    def now(self) -> float:
        return self._t

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self._t += seconds

    def advance(self, seconds: float) -> float:
        self._t += seconds
        return self._t
