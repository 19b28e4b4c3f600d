"""
Verification worker pool.

W asyncio worker tasks each own the queue partitions p with p % W == w and
drain them in FIFO order; the CPU-bound check runs on a shared
ThreadPoolExecutor. Verdicts are returned sorted by (node id, round, level),
so any schedule yields the same decisions. threads == 1 is the reference
sequential schedule (no executor, partitions drained in index order).
"""
from __future__ import annotations

import asyncio
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

from app.fedsim.node import NodeUpdate
from app.fedsim.queue import PartitionedQueue

logger = logging.getLogger(__name__)

CheckFn = Callable[[NodeUpdate], bool]


@dataclass
class Verdict:
    update: NodeUpdate
    ok: bool
    worker: int = 0

    @property
    def node_id(self) -> int:
        return self.update.node_id


def _sort_key(v: Verdict) -> tuple[int, int, int]:
    return v.update.node_id, v.update.round, v.update.level


class VerificationPool:
    def __init__(self, threads: int = 1) -> None:
        self.threads = max(1, int(threads))
        self._executor: ThreadPoolExecutor | None = (
            ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="verify") if self.threads > 1 else None
        )

    @property
    def executor(self) -> ThreadPoolExecutor | None:
        return self._executor

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "VerificationPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # ------------------------------------------------------------------
    def _drain_sequential(self, queue: PartitionedQueue, check: CheckFn) -> list[Verdict]:
        out = []
        for p in range(queue.partitions):
            while (u := queue.pop(p)) is not None:
                out.append(Verdict(u, check(u)))
        return out

    async def drain_async(self, queue: PartitionedQueue, check: CheckFn) -> list[Verdict]:
        loop = asyncio.get_running_loop()
        n_workers = min(self.threads, queue.partitions)

        async def worker(w: int) -> list[Verdict]:
            out = []
            for p in range(w, queue.partitions, n_workers):
                while (u := queue.pop(p)) is not None:
                    ok = await loop.run_in_executor(self._executor, check, u)
                    out.append(Verdict(u, ok, w))
            return out

        results = await asyncio.gather(*(worker(w) for w in range(n_workers)))
        return [v for part in results for v in part]

    def drain(self, queue: PartitionedQueue, check: CheckFn) -> list[Verdict]:
        """Consume every pending update; verdicts sorted by node id."""
        if self._executor is None:
            verdicts = self._drain_sequential(queue, check)
        else:
            verdicts = asyncio.run(self.drain_async(queue, check))
        verdicts.sort(key=_sort_key)
        per_worker = dict(sorted(Counter(v.worker for v in verdicts).items()))
        logger.debug("drained %d updates with %d thread(s), per worker %s", len(verdicts), self.threads, per_worker)
        return verdicts

    def map(self, fn: Callable, items: list) -> list:
        """Order-preserving parallel map for node-side work."""
        if self._executor is None:
            return [fn(x) for x in items]
        return list(self._executor.map(fn, items))
