"""Per-direction waiting queues, scheduling, delay marking and windows."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .routing import PathState, TransactionUnit, TUState

QUEUE_LIMIT = 8_000_000  # milli-tokens
W_MIN = 1.0
W_INIT = 4.0


class QueueOverflow(Exception):
    pass


class Policy(enum.Enum):
    FIFO = "fifo"
    LIFO = "lifo"
    SPF = "spf"
    EDF = "edf"


@dataclass
class QueueEntry:
    tu: TransactionUnit
    enqueued_at: float
    seq: int


@dataclass
class ChannelQueue:
    direction: tuple[int, int]
    limit: int = QUEUE_LIMIT
    entries: list[QueueEntry] = field(default_factory=list)
    volume: int = 0
    _seq: int = 0

    def __len__(self):
        return len(self.entries)

    def remove(self, tu: TransactionUnit) -> bool:
        for i, ent in enumerate(self.entries):
            if ent.tu is tu:
                del self.entries[i]
                self.volume -= tu.amount
                return True
        return False


def enqueue(q: ChannelQueue, tu: TransactionUnit, now: float) -> ChannelQueue:
    if q.volume + tu.amount > q.limit:
        tu.state = TUState.ABORTED
        raise QueueOverflow(f"queue {q.direction} full ({q.volume} + {tu.amount} > {q.limit})")
    q.entries.append(QueueEntry(tu, now, q._seq))
    q._seq += 1
    q.volume += tu.amount
    tu.state = TUState.QUEUED
    return q


def _priority(policy: Policy, ent: QueueEntry):
    # ties: enqueue time, then tuid
    base = (ent.enqueued_at, ent.seq, ent.tu.tuid)
    if policy is Policy.FIFO:
        return base
    if policy is Policy.LIFO:
        return (-ent.enqueued_at, -ent.seq, ent.tu.tuid)
    if policy is Policy.SPF:
        return (ent.tu.amount,) + base
    return (ent.tu.deadline,) + base


def dequeue_next(q: ChannelQueue, policy: Policy | str, funds_available: int) -> TransactionUnit | None:
    policy = Policy(policy)
    fitting = [ent for ent in q.entries if ent.tu.amount <= funds_available]
    if not fitting:
        return None
    best = min(fitting, key=lambda ent: _priority(policy, ent))
    q.entries.remove(best)
    q.volume -= best.tu.amount
    return best.tu


def mark_overdue(q: ChannelQueue, now: float, threshold: float) -> list[TransactionUnit]:
    """Mark TUs that waited longer than ``threshold``; returns newly marked."""
    if threshold <= 0:
        raise ValueError("marking threshold must be positive")
    fresh = []
    for ent in q.entries:
        if not ent.tu.marked and now - ent.enqueued_at > threshold:
            ent.tu.mark()
            fresh.append(ent.tu)
    return fresh


def window_on_abort(ps: PathState, beta: float, w_min: float = W_MIN) -> float:
    ps.window = max(w_min, ps.window - beta)
    return ps.window


def window_on_success(ps: PathState, all_paths, gamma: float) -> float:
    total = sum(p.window for p in all_paths)
    ps.window += gamma / total
    return ps.window


def admit(ps: PathState) -> bool:
    """Whether one more TU may be put in flight on this path."""
    return ps.outstanding < math.floor(ps.window)
