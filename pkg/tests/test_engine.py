import pytest
from hypothesis import given, strategies as st

from src.engine.events import CENTRAL, EventClass, EventQueue
from src.engine.ledger import DOWNLINK, DOWNLINK_CANCEL, UPLINK, PowerLedger, accumulate_power
from src.engine.simulator import run_simulation
from src.environment.random_walk import sample_path
from src.experiments.paired import uplink_dominates
from src.experiments.presets import preset
from src.model.config import ArchitectureKind
from src.model.errors import EventQueueOverflowError
from src.model.streams import KeyedStreams

IN0, IN, OUT = ArchitectureKind.IN0, ArchitectureKind.IN_EPS, ArchitectureKind.OUT_EPS


def _simulate(name, arch, replication=0):
    cfg, cmap = preset(name)
    streams = KeyedStreams(cfg.seed, replication)
    return run_simulation(cfg, cmap, arch, sample_path(cfg, streams), streams)


def test_queue_orders_by_time_class_actor_then_insertion():
    queue = EventQueue()
    queue.push(5.0, EventClass.UPLINK_ARRIVAL, CENTRAL)
    queue.push(5.0, EventClass.SAMPLE, 2)
    queue.push(5.0, EventClass.SAMPLE, 1, payload="a")
    queue.push(5.0, EventClass.SAMPLE, 1, payload="b")
    queue.push(4.0, EventClass.BACKOFF_FIRE, 2)
    order = [queue.pop() for _ in range(len(queue))]
    assert [(e.time, e.cls, e.actor, e.payload) for e in order] == [
        (4.0, EventClass.BACKOFF_FIRE, 2, None),
        (5.0, EventClass.SAMPLE, 1, "a"),
        (5.0, EventClass.SAMPLE, 1, "b"),
        (5.0, EventClass.SAMPLE, 2, None),
        (5.0, EventClass.UPLINK_ARRIVAL, CENTRAL, None),
    ]


def test_queue_overflow():
    queue = EventQueue(max_events=2)
    queue.push(0.0, EventClass.SAMPLE, 1)
    queue.push(1.0, EventClass.SAMPLE, 1)
    with pytest.raises(EventQueueOverflowError, match="event queue overflow"):
        queue.push(2.0, EventClass.SAMPLE, 1)


EVENT_KEYS = st.tuples(
    st.sampled_from([0.0, 1.0, 2.5]),
    st.sampled_from(list(EventClass)),
    st.sampled_from([CENTRAL, 1, 2]),
)


def _drain(keys):
    queue = EventQueue()
    for time, cls, actor in keys:
        queue.push(time, cls, actor)
    return [(e.time, e.cls, e.actor) for e in (queue.pop() for _ in range(len(queue)))]


KEYS_AND_SHUFFLED = st.lists(EVENT_KEYS, unique=True, max_size=20).flatmap(
    lambda keys: st.tuples(st.just(keys), st.permutations(keys))
)


@given(KEYS_AND_SHUFFLED)
def test_pop_order_does_not_depend_on_insertion_order(keys_and_shuffled):
    keys, shuffled = keys_and_shuffled
    assert _drain(keys) == _drain(shuffled) == sorted(keys)


@given(st.permutations(range(6)))
def test_fully_tied_events_pop_in_insertion_order(labels):
    queue = EventQueue()
    for label in labels:
        queue.push(3.0, EventClass.SAMPLE, 1, payload=label)
    assert [queue.pop().payload for _ in labels] == list(labels)


def test_ledger_windows_and_modes():
    ledger = PowerLedger(p_up=2.0, p_down=1.0, mode="conditional")
    accumulate_power(ledger, 1.0, UPLINK, 3)
    accumulate_power(ledger, 2.0, DOWNLINK, 2)
    accumulate_power(ledger, 4.0, DOWNLINK_CANCEL, 1)
    accumulate_power(ledger, 5.0, UPLINK, 0)
    assert ledger.power() == 2.0 * 3 + 1.0 * 1
    assert ledger.power(mode="always") == 2.0 * 3 + 1.0 * 2
    assert ledger.power(1.0, 4.0) == 6.0
    assert ledger.power(4.0, 5.0) == 1.0
    assert len(ledger.entries) == 3


@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0.0, max_value=99.99),
            st.sampled_from([UPLINK, DOWNLINK, DOWNLINK_CANCEL]),
            st.integers(min_value=0, max_value=4),
        ),
        max_size=40,
    ),
    st.sampled_from(["always", "conditional"]),
)
def test_ledger_power_is_additive_over_intervals(charges, mode):
    ledger = PowerLedger(p_up=2.0, p_down=1.0, mode=mode)
    for time, channel, components in charges:
        accumulate_power(ledger, time, channel, components)
    parts = sum(ledger.power(10.0 * c, 10.0 * (c + 1)) for c in range(10))
    assert ledger.power(0.0, 100.0) == pytest.approx(parts)


@pytest.mark.parametrize("mode", ["always", "conditional"])
def test_trace_power_is_additive_over_environment_intervals(mode):
    cfg, _ = preset("fig_event")
    trace, _ = _simulate("fig_event", OUT)
    total = trace.ledger.power(0.0, trace.horizon, mode=mode)
    parts = [
        trace.ledger.power(c * cfg.delta_t, (c + 1) * cfg.delta_t, mode=mode) for c in range(cfg.n_intervals)
    ]
    assert total == pytest.approx(sum(parts))
    assert total > 0


def test_trace_is_time_ordered():
    trace, _ = _simulate("fig_event", OUT)
    times = [r.time for r in trace.records]
    assert times == sorted(times)
    assert all(t < trace.horizon for t in times)


def test_metrics_agree_with_ledger_and_log():
    cfg, _ = preset("fig_event")
    trace, report = _simulate("fig_event", OUT)
    assert report.uplink_components == sum(len(r.components) for r in trace.of_kind("uplink_send"))
    assert report.power_total == pytest.approx(trace.ledger.power(mode=cfg.broadcast_accounting))
    assert report.cancellations == len(trace.of_kind("cancel"))


def test_estimates_change_only_at_uplink_arrivals():
    trace, _ = _simulate("fig_event", OUT)
    arrivals = {r.time for r in trace.of_kind("uplink_arrive")}
    for points in trace.estimates.trajectory.values():
        assert all(t in arrivals for t, _ in points[1:])


def test_in_eps_has_no_downlink():
    trace, report = _simulate("fig_event", IN)
    assert trace.of_kind("bcast_send") == []
    assert report.downlink_components == 0


def test_uplink_delay_scales_with_packet_size():
    cfg, _ = preset("fig_event")
    trace, _ = _simulate("fig_event", IN0)
    sends = trace.of_kind("uplink_send")
    arrivals = trace.of_kind("uplink_arrive")
    received = {(a.actor, a.sample_times): a.time for a in arrivals}
    for send in sends:
        expected = send.time + len(send.components) * cfg.dt_up
        if expected < trace.horizon:
            assert received[(send.actor, send.sample_times)] == pytest.approx(expected)


@pytest.mark.parametrize("replication", range(10))
def test_noiseless_dominance(replication):
    out, _ = _simulate("fig_event", OUT, replication)
    in_eps, _ = _simulate("fig_event", IN, replication)
    in0, _ = _simulate("fig_event", IN0, replication)
    assert uplink_dominates(out, in_eps)
    assert uplink_dominates(in_eps, in0)


def test_cancellations_happen_in_noiseless_regime():
    cancels = sum(len(_simulate("fig_event", OUT, r)[0].cancellations) for r in range(5))
    assert cancels > 0


def test_simulation_is_deterministic():
    a, _ = _simulate("fig_time", OUT, 3)
    b, _ = _simulate("fig_time", OUT, 3)
    assert a.to_frame().equals(b.to_frame())
