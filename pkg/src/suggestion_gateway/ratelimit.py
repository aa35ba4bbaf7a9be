"""Per-client token-bucket rate limiting.

Denial is a value, not an exception: callers get back whether the request
may proceed and, if not, how long until the next token.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class RateCheck:
    allowed: bool
    retry_after_s: float = 0.0


class TokenBucketLimiter:
    """Classic token bucket, one bucket per client id.

    Buckets start full (capacity B) and refill at R tokens per second.
    The clock is injectable so refill arithmetic is testable without
    sleeping.
    """

    def __init__(
        self,
        capacity: float,
        refill_per_s: float,
        clock: Callable[[], float] = time.monotonic,
    ):
        if capacity < 1 or refill_per_s <= 0:
            raise ValueError("capacity must be >= 1 and refill rate positive")
        self.capacity = float(capacity)
        self.refill_per_s = float(refill_per_s)
        self._clock = clock
        self._buckets: dict[str, tuple[float, float]] = {}  # client -> (tokens, last)
        self._lock = threading.Lock()

    def rate_check(self, client_id: str) -> RateCheck:
        with self._lock:
            now = self._clock()
            tokens, last = self._buckets.get(client_id, (self.capacity, now))
            tokens = min(self.capacity, tokens + (now - last) * self.refill_per_s)
            if tokens >= 1.0:
                self._buckets[client_id] = (tokens - 1.0, now)
                return RateCheck(allowed=True)
            self._buckets[client_id] = (tokens, now)
            return RateCheck(allowed=False, retry_after_s=(1.0 - tokens) / self.refill_per_s)
