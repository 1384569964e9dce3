import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from src.environment.random_walk import ChangeRecord, EnvironmentPath, sample_path, step_environment
from src.model.config import with_overrides
from src.model.streams import KeyedStreams


def test_path_is_deterministic(small_cfg):
    a = sample_path(small_cfg, KeyedStreams(9, 4))
    b = sample_path(small_cfg, KeyedStreams(9, 4))
    assert a == b
    np.testing.assert_array_equal(a.states, b.states)


def test_no_changes_when_probability_is_zero(small_cfg):
    path = sample_path(with_overrides(small_cfg, p_change=0.0), KeyedStreams(1))
    assert path.changes == ()
    np.testing.assert_array_equal(path.states, 0.0)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_steps_respect_magnitude_bounds(seed, small_cfg):
    path = sample_path(small_cfg, KeyedStreams(seed))
    for record in path.changes:
        assert small_cfg.d_low <= abs(record.step) <= small_cfg.d_up
        assert 1 <= record.interval < small_cfg.n_intervals


def test_single_mode_changes_at_most_one_index(small_cfg):
    cfg = with_overrides(small_cfg, change_mode="single", p_change=1.0)
    path = sample_path(cfg, KeyedStreams(3))
    intervals = [r.interval for r in path.changes]
    assert intervals == list(range(1, cfg.n_intervals))


def test_forced_step_replaces_draws(small_cfg, streams):
    x, records = step_environment(np.zeros(3), 2, streams, small_cfg, forced={2: 1.5})
    np.testing.assert_array_equal(x, [0.0, 1.5, 0.0])
    assert records == [ChangeRecord(interval=2, full_index=2, step=1.5)]


def test_path_is_piecewise_constant():
    path = EnvironmentPath(
        x0=(0.0, 0.0),
        delta_t=10.0,
        n_intervals=3,
        changes=(ChangeRecord(1, 1, 2.0), ChangeRecord(2, 1, -0.5), ChangeRecord(2, 2, 1.0)),
    )
    assert path.value(1, 9.999) == 0.0
    assert path.value(1, 10.0) == 2.0
    assert path.value(1, 25.0) == 1.5
    np.testing.assert_array_equal(path.x(20.0), [1.5, 1.0])
    times, values = path.breakpoints(2)
    np.testing.assert_array_equal(times, [0.0, 10.0, 20.0])
    np.testing.assert_array_equal(values, [0.0, 0.0, 1.0])


def test_path_frame_columns(small_cfg):
    frame = sample_path(small_cfg, KeyedStreams(2)).to_frame()
    assert list(frame.columns) == ["interval", "full_index", "step_value"]


def test_replications_differ(small_cfg):
    assert sample_path(small_cfg, KeyedStreams(2, 0)) != sample_path(small_cfg, KeyedStreams(2, 1))
