"""In-process stand-in for partitioned message topics: P FIFO partitions keyed by node id."""
from __future__ import annotations

import threading
from collections import deque

from app.fedsim.node import NodeUpdate


class PartitionedQueue:
    def __init__(self, partitions: int = 8) -> None:
        if partitions < 1:
            raise ValueError("partitions must be >= 1")
        self.partitions = partitions
        self._parts: list[deque[NodeUpdate]] = [deque() for _ in range(partitions)]
        self._lock = threading.Lock()
        self.enqueued = 0
        self.dequeued = 0

    def partition_of(self, node_id: int) -> int:
        return node_id % self.partitions

    def put(self, update: NodeUpdate) -> None:
        with self._lock:
            self._parts[self.partition_of(update.node_id)].append(update)
            self.enqueued += 1

    def pop(self, partition: int) -> NodeUpdate | None:
        with self._lock:
            part = self._parts[partition]
            if not part:
                return None
            self.dequeued += 1
            return part.popleft()

    def pending(self) -> int:
        with self._lock:
            return sum(len(p) for p in self._parts)

    def reset_counters(self) -> None:
        with self._lock:
            self.enqueued = self.dequeued = 0
