"""Run-time configuration: caps, output format, seed and worker count."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import InputError

__all__ = ["Config", "DEFAULT_CAPS", "workers", "parallel_map"]

DEFAULT_CAPS = {
    "k": 7,            # EF value recursion depth
    "order": 10,       # graph order for value recursion
    "enum_n": 9,       # graph enumeration
    "digits": 100_000,  # decimal digits materialized by the bound calculator
}

FORMATS = ("json", "csv", "text")


@dataclass
class Config:
    caps: dict = field(default_factory=lambda: dict(DEFAULT_CAPS))
    format: str = "json"
    seed: int = 0

    def __post_init__(self):
        for name, val in self.caps.items():
            if not isinstance(val, int) or val <= 0:
                raise InputError(f"cap {name!r} must be a positive integer")
        if self.format not in FORMATS:
            raise InputError(f"unknown output format {self.format!r}")


def workers() -> int:
    """Worker cap from FO_DEFLAB_THREADS (default 1)."""
    raw = os.environ.get("FO_DEFLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"FO_DEFLAB_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_map(fn, items):
    """Ordered map, spread over a thread pool when more than one worker is allowed.

    Only use it for read-only work: formulas and graphs are shared, never built.
    """
    items = list(items)
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
