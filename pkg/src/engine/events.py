"""Event types and the totally ordered event queue."""

import heapq
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, List, Tuple

from ..model.errors import EventQueueOverflowError

CENTRAL = 0


class EventClass(IntEnum):
    ENV_CHANGE = 1
    SAMPLE = 2
    BCAST_ARRIVAL = 3
    BACKOFF_FIRE = 4
    UPLINK_ARRIVAL = 5


@dataclass(frozen=True, order=True)
class Event:
    time: float
    cls: EventClass
    actor: int
    seq: int
    components: Tuple[int, ...] = field(default=(), compare=False)
    payload: Any = field(default=None, compare=False)
    created: float = field(default=0.0, compare=False)


class EventQueue:
    """Min-heap over (time, class, actor, sequence)."""

    def __init__(self, max_events: int = 1_000_000):
        self._heap: List[Event] = []
        self._seq = 0
        self.max_events = max_events
        self.pushed = 0

    def push(self, time: float, cls: EventClass, actor: int, components=(), payload=None, created: float = 0.0) -> Event:
        if self.pushed >= self.max_events:
            raise EventQueueOverflowError(f"event queue overflow: more than {self.max_events} events")
        event = Event(time, cls, actor, self._seq, tuple(components), payload, created)
        self._seq += 1
        self.pushed += 1
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> Event:
        return heapq.heappop(self._heap)

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)
