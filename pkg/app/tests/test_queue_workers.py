# test_queue_workers.py

import logging

import pytest

from app.fedsim.queue import PartitionedQueue
from app.fedsim.workers import VerificationPool
from app.tests.conftest import RecordingCheck, make_hist, make_update


def _fill(queue, rng, ids, level=0):
    for k in ids:
        queue.put(make_update(k, make_hist(rng), level=level))


def test_partition_is_id_mod_p():
    q = PartitionedQueue(4)
    assert [q.partition_of(k) for k in (0, 1, 5, 8, 11)] == [0, 1, 1, 0, 3]


def test_fifo_within_partition(rng):
    q = PartitionedQueue(2)
    for level in range(3):
        _fill(q, rng, [1, 3], level=level)
    popped = []
    while (u := q.pop(1)) is not None:
        popped.append((u.node_id, u.level))
    assert popped == [(1, 0), (3, 0), (1, 1), (3, 1), (1, 2), (3, 2)]
    assert q.pop(0) is None


def test_counters(rng):
    q = PartitionedQueue(3)
    _fill(q, rng, range(7))
    assert (q.enqueued, q.pending()) == (7, 7)
    q.pop(0)
    assert (q.dequeued, q.pending()) == (1, 6)
    q.reset_counters()
    assert q.enqueued == q.dequeued == 0


def test_queue_needs_a_partition():
    with pytest.raises(ValueError):
        PartitionedQueue(0)


def test_drain_sorts_by_node_id(rng):
    q = PartitionedQueue(3)
    _fill(q, rng, [4, 0, 7, 2, 5])
    with VerificationPool(1) as pool:
        verdicts = pool.drain(q, RecordingCheck(reject={7}))
    assert [v.node_id for v in verdicts] == [0, 2, 4, 5, 7]
    assert [v.ok for v in verdicts] == [True, True, True, True, False]
    assert q.pending() == 0 and q.dequeued == 5


@pytest.mark.parametrize("threads", [2, 4, 8])
def test_thread_count_does_not_change_verdicts(rng, threads):
    ids = list(range(20))
    reject = {3, 11, 17}

    def run(n):
        q = PartitionedQueue(5)
        _fill(q, rng, ids)
        check = RecordingCheck(reject)
        with VerificationPool(n) as pool:
            verdicts = pool.drain(q, check)
        assert sorted(check.seen) == ids
        return [(v.node_id, v.ok) for v in verdicts]

    assert run(threads) == run(1)


@pytest.mark.asyncio
async def test_drain_async_assigns_partitions_to_workers(rng):
    q = PartitionedQueue(4)
    _fill(q, rng, range(8))
    pool = VerificationPool(2)
    try:
        verdicts = await pool.drain_async(q, RecordingCheck())
    finally:
        pool.close()
    assert sorted(v.node_id for v in verdicts) == list(range(8))
    # worker w owns partitions w, w + 2, ...
    assert all(v.worker == (v.node_id % 4) % 2 for v in verdicts)


def test_map_preserves_order():
    with VerificationPool(3) as pool:
        assert pool.map(lambda x: x * x, list(range(10))) == [x * x for x in range(10)]
    assert VerificationPool(1).map(str, [1, 2]) == ["1", "2"]


def test_close_is_idempotent():
    pool = VerificationPool(2)
    pool.close()
    pool.close()
    assert pool.executor is None


def test_drain_logs_per_worker_load(rng, caplog):
    caplog.set_level(logging.DEBUG, logger="app.fedsim.workers")
    q = PartitionedQueue(4)
    _fill(q, rng, range(8))
    with VerificationPool(2) as pool:
        pool.drain(q, RecordingCheck())
    assert "per worker {0: 4, 1: 4}" in caplog.text
