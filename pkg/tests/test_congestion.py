import pytest

from pchnet.congestion import (
    ChannelQueue,
    QueueOverflow,
    admit,
    dequeue_next,
    enqueue,
    mark_overdue,
    window_on_abort,
    window_on_success,
)
from pchnet.routing import PathState, TransactionUnit, TUState


def tu(i, amount, deadline=10.0):
    return TransactionUnit(i, i, amount, deadline=deadline)


def test_enqueue_and_overflow():
    q = enqueue(ChannelQueue((0, 1)), tu(0, 4000), 0.0)
    assert q.volume == 4000
    q = ChannelQueue((0, 1), volume=7_999_000)
    unit = tu(1, 4000)
    with pytest.raises(QueueOverflow):
        enqueue(q, unit, 0.0)
    assert unit.state is TUState.ABORTED


def test_enqueue_keeps_order():
    q = ChannelQueue((0, 1))
    enqueue(q, tu(0, 1), 0.0)
    enqueue(q, tu(1, 1), 0.01)
    assert [e.enqueued_at for e in q.entries] == [0.0, 0.01]


def filled(amounts):
    q = ChannelQueue((0, 1))
    for i, a in enumerate(amounts):
        enqueue(q, tu(i, a, deadline=10.0 - i), i * 0.01)
    return q


def test_dequeue_policies():
    assert dequeue_next(filled([4, 2, 3]), "fifo", 10).amount == 4
    assert dequeue_next(filled([4, 2, 3]), "spf", 10).amount == 2
    assert dequeue_next(filled([4, 2, 3]), "lifo", 10).amount == 3
    assert dequeue_next(filled([4, 2, 3]), "edf", 10).amount == 3
    assert dequeue_next(filled([4, 2, 3]), "fifo", 1) is None
    q = filled([4, 2, 3])
    dequeue_next(q, "fifo", 10)
    assert q.volume == 5


def test_dequeue_deterministic():
    order = []
    for _ in range(2):
        q = filled([3, 1, 3, 2, 1])
        order.append([dequeue_next(q, "spf", 10).tuid for _ in range(5)])
    assert order[0] == order[1] == [1, 4, 3, 0, 2]


def test_marking():
    q = ChannelQueue((0, 1))
    enqueue(q, tu(0, 1), 0.0)
    enqueue(q, tu(1, 1), 0.401)
    assert [t.tuid for t in mark_overdue(q, 0.401, 0.4)] == [0]
    assert not q.entries[1].tu.marked
    assert mark_overdue(q, 0.5, 0.4) == []
    assert q.entries[0].tu.marked


def test_windows():
    ps = PathState((0, 1), 1.0, window=25.0)
    assert window_on_abort(ps, 10) == 15
    ps.window = 5.0
    assert window_on_abort(ps, 10) == 1.0
    ps.window = 30.0
    window_on_abort(ps, 10)
    window_on_abort(ps, 10)
    assert ps.window == 10
    one = PathState((0, 1), 1.0, window=1.0)
    assert window_on_success(one, [one], 0.1) == pytest.approx(1.1)
    five = [PathState((0, 1), 1.0, window=2.0) for _ in range(5)]
    assert window_on_success(five[0], five, 0.1) == pytest.approx(2.01)
    small = [PathState((0, 1), 1.0, window=1.0) for _ in range(2)]
    big = [PathState((0, 1), 1.0, window=10.0) for _ in range(2)]
    assert window_on_success(small[0], small, 0.1) - 1.0 > window_on_success(big[0], big, 0.1) - 10.0


def test_admit():
    ps = PathState((0, 1), 1.0, window=1.0)
    assert admit(ps)
    ps.window, ps.outstanding = 3.0, 3
    assert not admit(ps)
    while not admit(ps):
        window_on_success(ps, [ps], 0.5)
    assert ps.window >= 4
