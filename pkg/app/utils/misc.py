import os
import statistics
import time
from typing import Iterable


def resolve_threads(requested: int | None) -> int:
    """0/None -> available parallelism; anything else is taken as-is (min 1)."""
    if not requested:
        return max(1, os.cpu_count() or 1)
    return max(1, int(requested))


def median_ms(samples: Iterable[float]) -> float:
    """Median of wall-clock samples given in milliseconds (0.0 when empty)."""
    vals = list(samples)
    if not vals:
        return 0.0
    return float(statistics.median(vals))


class Stopwatch:
    """
    Wall-clock timer used for the *_ms report columns.

        with Stopwatch() as sw:
            ...
        sw.elapsed_ms
    """

    def __init__(self) -> None:
        self._start = 0.0
        self.elapsed_ms = 0.0

    def __enter__(self) -> "Stopwatch":
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc) -> None:
        self.elapsed_ms = (time.perf_counter() - self._start) * 1000.0
