"""Thread-safe memo table for collector relations and derived tables."""

from __future__ import annotations

import threading
from collections import OrderedDict
from collections.abc import Callable, Hashable
from typing import Generic, TypeVar

V = TypeVar("V")


class RelationCache(Generic[V]):
    """Thread-safe memo, optionally bounded with LRU eviction.

    Fills are idempotent: when two threads race on the same key both may
    compute, but the first stored value wins and is returned to both.
    """

    def __init__(self, max_size: int | None = None):
        self._max_size = max_size
        self._cache: OrderedDict[Hashable, V] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: Hashable) -> V | None:
        """Retrieve a cached value, or None."""
        with self._lock:
            value = self._cache.get(key)
            if value is None:
                self.misses += 1
                return None
            self.hits += 1
            if self._max_size is not None:
                self._cache.move_to_end(key)
            return value

    def put(self, key: Hashable, value: V) -> V:
        """Store a value unless one is already present; return the stored value."""
        with self._lock:
            existing = self._cache.get(key)
            if existing is not None:
                return existing
            self._cache[key] = value
            if self._max_size is not None:
                while len(self._cache) > self._max_size:
                    self._cache.popitem(last=False)
            return value

    def get_or_compute(self, key: Hashable, compute: Callable[[], V]) -> V:
        """Return the cached value for key, computing it outside the lock on a miss."""
        value = self.get(key)
        if value is not None:
            return value
        return self.put(key, compute())

    def clear(self) -> None:
        """Remove all entries."""
        with self._lock:
            self._cache.clear()

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)

    def __contains__(self, key: Hashable) -> bool:
        with self._lock:
            return key in self._cache
