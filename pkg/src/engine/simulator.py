"""Deterministic discrete-event loop for the IN0, IN(eps) and OUT(eps) architectures."""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

from ..environment.random_walk import EnvironmentPath
from ..fusion.estimator import EstimateState, fuse
from ..fusion.metrics import MetricsReport, summarize
from ..model.config import ArchitectureKind, ComponentMap, ScenarioConfig
from ..model.streams import KeyedStreams
from ..sensing.sensor import (
    Broadcast,
    Packet,
    SensorState,
    apply_broadcast,
    fire_transmission,
    observe,
    schedule_backoff,
    verify,
)
from .events import CENTRAL, Event, EventClass, EventQueue
from .ledger import DOWNLINK, DOWNLINK_CANCEL, UPLINK, PowerLedger, accumulate_power

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["replication", "arch", "time", "class", "actor", "kind", "component_ids", "value"]


@dataclass(frozen=True)
class TraceRecord:
    time: float
    cls: int
    actor: int
    kind: str
    components: Tuple[int, ...] = ()
    values: Tuple[float, ...] = ()
    sample_times: Tuple[float, ...] = ()


@dataclass
class SimulationTrace:
    arch: ArchitectureKind
    replication: int
    horizon: float
    path: EnvironmentPath
    ledger: PowerLedger
    estimates: EstimateState
    primitive_digest: str
    records: List[TraceRecord] = field(default_factory=list)

    def log(self, record: TraceRecord) -> None:
        self.records.append(record)

    def of_kind(self, kind: str) -> List[TraceRecord]:
        return [r for r in self.records if r.kind == kind]

    @property
    def cancellations(self) -> List[TraceRecord]:
        return self.of_kind("cancel")

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (
                self.replication,
                self.arch.value,
                r.time,
                r.cls,
                r.actor,
                r.kind,
                ";".join(str(k) for k in r.components),
                ";".join(repr(v) for v in r.values),
            )
            for r in self.records
        ]
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def deliver_uplink(queue: EventQueue, trace: SimulationTrace, packet: Packet, cfg: ScenarioConfig) -> Event:
    """Charge the packet and enqueue its arrival at t + m * dt_up."""
    if packet.size < 1:
        raise ValueError("deliver_uplink requires a nonempty packet")
    accumulate_power(trace.ledger, packet.send_time, UPLINK, packet.size)
    trace.log(
        TraceRecord(
            packet.send_time,
            EventClass.BACKOFF_FIRE,
            packet.sensor,
            "uplink_send",
            packet.components,
            tuple(o.value for o in packet.observations),
            tuple(o.time for o in packet.observations),
        )
    )
    return queue.push(
        packet.send_time + packet.size * cfg.dt_up,
        EventClass.UPLINK_ARRIVAL,
        packet.sensor,
        packet.components,
        payload=packet,
        created=packet.send_time,
    )


def start_broadcast(
    queue: EventQueue,
    trace: SimulationTrace,
    packet: Packet,
    t_arrival: float,
    cfg: ScenarioConfig,
    cmap: ComponentMap,
) -> Optional[Event]:
    """Forward the shared part of an arrived packet to the other sensor."""
    shared = tuple((o.component, o.value) for o in packet.observations if o.component in cmap.shared)
    if not shared:
        return None
    destination = 2 if packet.sensor == 1 else 1
    broadcast = Broadcast(
        origin=packet.sensor,
        destination=destination,
        send_time=t_arrival,
        arrival_time=t_arrival + len(shared) * cfg.dt_down,
        values=shared,
    )
    accumulate_power(trace.ledger, t_arrival, DOWNLINK, broadcast.size)
    components = tuple(k for k, _ in shared)
    trace.log(TraceRecord(t_arrival, EventClass.UPLINK_ARRIVAL, CENTRAL, "bcast_send", components, tuple(v for _, v in shared)))
    return queue.push(
        broadcast.arrival_time,
        EventClass.BCAST_ARRIVAL,
        destination,
        components,
        payload=broadcast,
        created=t_arrival,
    )


class Simulation:
    """One architecture on one sample path."""

    def __init__(
        self,
        cfg: ScenarioConfig,
        cmap: ComponentMap,
        arch: ArchitectureKind,
        path: EnvironmentPath,
        streams: KeyedStreams,
        horizon: float,
    ):
        self.cfg = cfg
        self.cmap = cmap
        self.arch = arch
        self.path = path
        self.streams = streams
        self.horizon = horizon
        self.queue = EventQueue(cfg.max_events)
        self.clock = 0.0
        self.sensors: Dict[int, SensorState] = {j: SensorState.initial(j, cmap, path.x0) for j in (1, 2)}
        self.trace = SimulationTrace(
            arch=arch,
            replication=streams.replication,
            horizon=horizon,
            path=path,
            ledger=PowerLedger(cfg.p_up, cfg.p_down, cfg.broadcast_accounting),
            estimates=EstimateState(cmap, path.x0),
            primitive_digest=primitive_digest(path, streams),
        )

    def _seed_events(self) -> None:
        for record in self.path.changes:
            t = record.interval * self.path.delta_t
            if t < self.horizon:
                self.queue.push(t, EventClass.ENV_CHANGE, CENTRAL, (record.full_index,))
        for j in (1, 2):
            if self.sensors[j].components:
                self.queue.push(0.0, EventClass.SAMPLE, j, payload=0)

    def run(self) -> SimulationTrace:
        self._seed_events()
        handlers = {
            EventClass.ENV_CHANGE: lambda event: None,
            EventClass.SAMPLE: self._on_sample,
            EventClass.BCAST_ARRIVAL: self._on_broadcast_arrival,
            EventClass.BACKOFF_FIRE: self._on_backoff_fire,
            EventClass.UPLINK_ARRIVAL: self._on_uplink_arrival,
        }
        while self.queue:
            event = self.queue.pop()
            if event.time >= self.horizon:
                break
            assert event.time >= self.clock and event.time >= event.created
            self.clock = event.time
            handlers[event.cls](event)
        logger.debug(
            "Simulated %s replication %d: %d records, %d events",
            self.arch.value,
            self.streams.replication,
            len(self.trace.records),
            self.queue.pushed,
        )
        return self.trace

    def _on_sample(self, event: Event) -> None:
        j, m = event.actor, event.payload
        state = self.sensors[j]
        t = m * self.cfg.tau(j)
        observations = [
            observe(self.path, j, k, t, self.streams, self.cfg, self.cmap, m) for k in state.components
        ]
        for obs in observations:
            state.latest[obs.component] = obs

        if m % self.cfg.verification_stride(j) == 0:
            for obs in observations:
                self.trace.log(TraceRecord(t, EventClass.SAMPLE, j, "sample", (obs.component,), (obs.value,)))
            triggers = verify(state, observations, self.arch, self.cfg.epsilon)
            for obs in triggers:
                self.trace.log(TraceRecord(t, EventClass.SAMPLE, j, "trigger", (obs.component,), (obs.value,)))
            if triggers:
                schedule = schedule_backoff(state, triggers, t, self.streams, self.cfg, m)
                components = tuple(sorted(schedule.observations))
                self.trace.log(
                    TraceRecord(t, EventClass.SAMPLE, j, "schedule", components, (schedule.fire_time,))
                )
                self.queue.push(
                    schedule.fire_time,
                    EventClass.BACKOFF_FIRE,
                    j,
                    components,
                    payload=schedule.schedule_id,
                    created=t,
                )

        t_next = (m + 1) * self.cfg.tau(j)
        if t_next < self.horizon:
            self.queue.push(t_next, EventClass.SAMPLE, j, payload=m + 1, created=t)

    def _on_backoff_fire(self, event: Event) -> None:
        packet = fire_transmission(self.sensors[event.actor], event.payload, event.time)
        if packet is not None:
            deliver_uplink(self.queue, self.trace, packet, self.cfg)

    def _on_uplink_arrival(self, event: Event) -> None:
        packet: Packet = event.payload
        for obs in packet.observations:
            fuse(self.trace.estimates, packet.sensor, obs.component, obs.value, obs.time, event.time)
        self.trace.log(
            TraceRecord(
                event.time,
                EventClass.UPLINK_ARRIVAL,
                packet.sensor,
                "uplink_arrive",
                packet.components,
                tuple(o.value for o in packet.observations),
                tuple(o.time for o in packet.observations),
            )
        )
        if self.arch.has_downlink:
            start_broadcast(self.queue, self.trace, packet, event.time, self.cfg, self.cmap)

    def _on_broadcast_arrival(self, event: Event) -> None:
        broadcast: Broadcast = event.payload
        state = self.sensors[broadcast.destination]
        self.trace.log(
            TraceRecord(
                event.time,
                EventClass.BCAST_ARRIVAL,
                broadcast.destination,
                "bcast_arrive",
                tuple(k for k, _ in broadcast.values),
                tuple(v for _, v in broadcast.values),
            )
        )
        cancelled = apply_broadcast(state, broadcast, self.cfg.epsilon, self.arch)
        for k in sorted(cancelled):
            self.trace.log(TraceRecord(event.time, EventClass.BCAST_ARRIVAL, broadcast.destination, "cancel", (k,)))
        accumulate_power(self.trace.ledger, event.time, DOWNLINK_CANCEL, len(cancelled))


def primitive_digest(path: EnvironmentPath, streams: KeyedStreams) -> str:
    """Checksum of the environment path and the stream keys driving noise and backoff."""
    frame = path.to_frame()
    body = frame.to_csv(index=False) + streams.digest()
    return hashlib.sha256(body.encode()).hexdigest()


def run_simulation(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    arch: ArchitectureKind,
    source,
    streams: Optional[KeyedStreams] = None,
) -> Tuple[SimulationTrace, MetricsReport]:
    """Simulate ``arch`` on a path or conditioned scenario over [0, horizon).

    A conditioned scenario supplies its own horizon and, unless ``streams``
    is given, the streams it was accepted with.
    """
    if isinstance(source, EnvironmentPath):
        path, horizon = source, cfg.t_sim
        if streams is None:
            raise ValueError("streams are required when simulating a bare path")
    else:
        path, horizon = source.path, source.horizon
        streams = streams if streams is not None else source.streams
    trace = Simulation(cfg, cmap, arch, path, streams, horizon).run()
    return trace, summarize(trace, cfg)
