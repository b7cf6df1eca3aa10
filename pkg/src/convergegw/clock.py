"""Single gateway clock.

All timestamps come from here so that presence last-write-wins ties are
impossible: successive calls never return the same value.
"""

from __future__ import annotations

import threading
import time


class MonotoneClock:
    """Wall-clock seconds, strictly increasing across calls."""

    def __init__(self):
        self._lock = threading.Lock()
        self._last = 0.0

    def now(self) -> float:
        with self._lock:
            t = time.time()
            if t <= self._last:
                t = self._last + 1e-6
            self._last = t
            return t


clock = MonotoneClock()
