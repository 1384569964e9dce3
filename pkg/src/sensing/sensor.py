"""Per-sensor observation, verification, backoff scheduling and cancellation."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..environment.random_walk import EnvironmentPath
from ..model.backoff import sample_backoff
from ..model.config import ArchitectureKind, ComponentMap, ScenarioConfig
from ..model.errors import ComponentNotObservedError
from ..model.streams import KeyedStreams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Observation:
    sensor: int
    component: int
    time: float
    value: float
    index: int = 0


@dataclass
class ScheduledTransmission:
    schedule_id: int
    sensor: int
    created: float
    fire_time: float
    observations: Dict[int, Observation]


@dataclass(frozen=True)
class Packet:
    sensor: int
    send_time: float
    observations: Tuple[Observation, ...]

    @property
    def size(self) -> int:
        return len(self.observations)

    @property
    def components(self) -> Tuple[int, ...]:
        return tuple(obs.component for obs in self.observations)


@dataclass(frozen=True)
class Broadcast:
    origin: int
    destination: int
    send_time: float
    arrival_time: float
    values: Tuple[Tuple[int, float], ...]

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass
class SensorState:
    sensor: int
    components: Tuple[int, ...]
    refs: Dict[int, float]
    pending: Dict[int, ScheduledTransmission] = field(default_factory=dict)
    latest: Dict[int, Observation] = field(default_factory=dict)
    next_schedule_id: int = 0

    @classmethod
    def initial(cls, sensor: int, cmap: ComponentMap, x0: Iterable[float]) -> "SensorState":
        x0 = tuple(x0)
        components = cmap.observed_by(sensor)
        refs = {k: float(x0[cmap.full_index[k] - 1]) for k in components}
        return cls(sensor=sensor, components=components, refs=refs)

    def pending_components(self) -> Set[int]:
        return {k for schedule in self.pending.values() for k in schedule.observations}


def observe(
    path: EnvironmentPath,
    j: int,
    k: int,
    t: float,
    streams: KeyedStreams,
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    index: int,
) -> Observation:
    """y_jk(t) = x_{i_k}(t) + sigma * z, z keyed by (sensor, component, sample index)."""
    if k not in cmap.observed_by(j):
        raise ComponentNotObservedError(j, k)
    value = path.value(cmap.full_index[k], t)
    if cfg.sigma > 0:
        value += cfg.sigma * streams.normal("noise", j, k, index)
    return Observation(sensor=j, component=k, time=t, value=value, index=index)


def verify(
    state: SensorState,
    observations: Iterable[Observation],
    arch: ArchitectureKind,
    epsilon: float,
) -> List[Observation]:
    """Observations whose component triggers under ``arch``."""
    if arch is ArchitectureKind.IN0:
        return list(observations)
    return [obs for obs in observations if abs(obs.value - state.refs[obs.component]) >= epsilon]


def schedule_backoff(
    state: SensorState,
    triggers: List[Observation],
    t: float,
    streams: KeyedStreams,
    cfg: ScenarioConfig,
    instant: int,
) -> ScheduledTransmission:
    """Schedule one packet for all triggered components with a single backoff draw."""
    if not triggers:
        raise ValueError("schedule_backoff requires at least one trigger")
    pinned = streams.pinned("backoff", state.sensor, 0, instant)
    if pinned is not None:
        delay = pinned
    else:
        delay = sample_backoff(cfg.backoff, streams.generator("backoff", state.sensor, 0, instant))

    triggered = {obs.component for obs in triggers}
    for schedule_id in list(state.pending):
        older = state.pending[schedule_id]
        for k in triggered & set(older.observations):
            del older.observations[k]
        if not older.observations:
            del state.pending[schedule_id]

    schedule = ScheduledTransmission(
        schedule_id=state.next_schedule_id,
        sensor=state.sensor,
        created=t,
        fire_time=t + delay,
        observations={obs.component: obs for obs in triggers},
    )
    state.pending[schedule.schedule_id] = schedule
    state.next_schedule_id += 1
    return schedule


def apply_broadcast(
    state: SensorState,
    broadcast: Broadcast,
    epsilon: float,
    arch: ArchitectureKind,
) -> Set[int]:
    """Cancel pending components within epsilon of the broadcast value; adopt it as reference."""
    if not arch.has_downlink:
        raise ValueError(f"{arch.value} has no downlink broadcasts")
    cancelled: Set[int] = set()
    for k, v in broadcast.values:
        for schedule_id in list(state.pending):
            schedule = state.pending[schedule_id]
            own = schedule.observations.get(k)
            if own is not None and abs(own.value - v) < epsilon:
                del schedule.observations[k]
                cancelled.add(k)
                if not schedule.observations:
                    del state.pending[schedule_id]
        state.refs[k] = v
    if cancelled:
        logger.debug("Sensor %d cancelled %s at t=%.6g", state.sensor, sorted(cancelled), broadcast.arrival_time)
    return cancelled


def fire_transmission(state: SensorState, schedule_id: int, t: float) -> Optional[Packet]:
    """Emit what remains of a due schedule; ``None`` if it was emptied or replaced."""
    schedule = state.pending.pop(schedule_id, None)
    if schedule is None or not schedule.observations:
        return None
    observations = tuple(schedule.observations[k] for k in sorted(schedule.observations))
    for obs in observations:
        state.refs[obs.component] = obs.value
    return Packet(sensor=state.sensor, send_time=t, observations=observations)
