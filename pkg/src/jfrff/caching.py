"""Small exact-match cache for fractional transform matrices."""

from __future__ import annotations

import threading

import numpy as np


class MatrixCache:
    """Bounded FIFO cache keyed by the exact float order.

    Reads are plain dict lookups (safe under CPython for concurrent readers);
    insertions take a lock so the eviction bookkeeping stays consistent with
    a single writer at a time.
    """

    def __init__(self, maxsize: int = 16):
        self._maxsize = int(maxsize)
        self._data: dict[float, np.ndarray] = {}
        self._order: list[float] = []
        self._lock = threading.Lock()

    def get(self, key: float):
        return self._data.get(key)

    def put(self, key: float, value: np.ndarray) -> None:
        with self._lock:
            if key in self._data:
                return
            if len(self._order) >= self._maxsize:
                oldest = self._order.pop(0)
                self._data.pop(oldest, None)
            self._data[key] = value
            self._order.append(key)

    def __len__(self) -> int:
        return len(self._data)
