import pytest

from src.environment.random_walk import EnvironmentPath
from src.model.backoff import BackoffSpec
from src.model.config import ArchitectureKind, with_overrides
from src.model.errors import ComponentNotObservedError
from src.sensing.sensor import (
    Broadcast,
    Observation,
    SensorState,
    apply_broadcast,
    fire_transmission,
    observe,
    schedule_backoff,
    verify,
)


@pytest.fixture
def state(small_map):
    return SensorState.initial(1, small_map, (0.0, 0.0, 0.0))


def _obs(k, value, t=0.0):
    return Observation(sensor=1, component=k, time=t, value=value)


def test_observe_rejects_unobserved_component(small_cfg, small_map, streams):
    path = EnvironmentPath(x0=(0.0, 0.0, 0.0), delta_t=10.0, n_intervals=1, changes=())
    with pytest.raises(ComponentNotObservedError, match="component not observed by sensor: k=3, j=1"):
        observe(path, 1, 3, 0.0, streams, small_cfg, small_map, 0)


def test_noiseless_observation_is_exact(small_cfg, small_map, streams):
    path = EnvironmentPath(x0=(1.0, 2.0, 3.0), delta_t=10.0, n_intervals=1, changes=())
    obs = observe(path, 2, 3, 0.0, streams, with_overrides(small_cfg, sigma=0.0), small_map, 0)
    assert obs.value == 3.0


def test_verify_threshold_is_inclusive(state):
    observations = [_obs(1, 0.5), _obs(2, 0.4999)]
    triggered = verify(state, observations, ArchitectureKind.IN_EPS, 0.5)
    assert [o.component for o in triggered] == [1]


def test_in0_triggers_everything(state):
    observations = [_obs(1, 0.0), _obs(2, 0.0)]
    assert verify(state, observations, ArchitectureKind.IN0, 0.5) == observations


def test_new_schedule_supersedes_older_components(state, small_cfg, streams):
    cfg = with_overrides(small_cfg, backoff=BackoffSpec.uniform(50.0))
    first = schedule_backoff(state, [_obs(1, 1.0), _obs(2, 1.0)], 0.0, streams, cfg, 0)
    second = schedule_backoff(state, [_obs(1, 2.0, 10.0)], 10.0, streams, cfg, 1)
    assert set(state.pending[first.schedule_id].observations) == {2}
    assert state.pending[second.schedule_id].observations[1].value == 2.0
    assert state.pending_components() == {1, 2}


def test_pinned_backoff_fires_immediately(state, small_cfg, streams):
    pinned = streams.with_overrides({("backoff", 1, 0, 3): 0.0})
    schedule = schedule_backoff(state, [_obs(1, 1.0, 30.0)], 30.0, pinned, small_cfg, 3)
    assert schedule.fire_time == 30.0


def test_broadcast_cancels_within_epsilon(state, small_cfg, streams):
    schedule = schedule_backoff(state, [_obs(1, 1.0)], 0.0, streams, small_cfg, 0)
    broadcast = Broadcast(origin=2, destination=1, send_time=1.0, arrival_time=2.0, values=((1, 1.3),))
    assert apply_broadcast(state, broadcast, 0.5, ArchitectureKind.OUT_EPS) == {1}
    assert state.refs[1] == 1.3
    assert fire_transmission(state, schedule.schedule_id, schedule.fire_time) is None


def test_broadcast_at_epsilon_does_not_cancel(state, small_cfg, streams):
    schedule = schedule_backoff(state, [_obs(1, 1.0)], 0.0, streams, small_cfg, 0)
    broadcast = Broadcast(origin=2, destination=1, send_time=1.0, arrival_time=2.0, values=((1, 1.5),))
    assert apply_broadcast(state, broadcast, 0.5, ArchitectureKind.OUT_EPS) == set()
    assert state.refs[1] == 1.5
    packet = fire_transmission(state, schedule.schedule_id, schedule.fire_time)
    assert packet.components == (1,)
    assert state.refs[1] == 1.0


def test_in_architectures_reject_broadcasts(state):
    broadcast = Broadcast(origin=2, destination=1, send_time=0.0, arrival_time=1.0, values=((1, 0.0),))
    with pytest.raises(ValueError):
        apply_broadcast(state, broadcast, 0.5, ArchitectureKind.IN_EPS)


def test_packet_lists_components_in_order(state, small_cfg, streams):
    schedule = schedule_backoff(state, [_obs(2, 3.0), _obs(1, 4.0)], 0.0, streams, small_cfg, 0)
    packet = fire_transmission(state, schedule.schedule_id, 2.0)
    assert packet.components == (1, 2)
    assert packet.size == 2
    assert state.refs == {1: 4.0, 2: 3.0}
    assert state.pending == {}
