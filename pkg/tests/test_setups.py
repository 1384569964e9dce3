import pytest

from src.engine.simulator import run_simulation
from src.environment.setups import (
    build_setup_one,
    build_setup_two,
    find_setup_two_pair,
    observed_triggers,
)
from src.experiments.presets import preset
from src.model.config import ArchitectureKind, with_overrides
from src.model.errors import ConditioningInfeasibleError, SetupGeometryError
from src.model.streams import KeyedStreams


def test_setup_two_pair_for_23_41():
    cfg, _ = preset("setup2")
    a1, a2 = find_setup_two_pair(cfg)
    assert (a1, a2) == (2, 1)
    assert (a1 - 1) * cfg.T_1 < a2 * cfg.T_2 < a1 * cfg.T_1


def test_equal_periods_have_no_pair():
    cfg, _ = preset("setup2")
    with pytest.raises(SetupGeometryError, match=r"no valid \(a1,a2\) pair"):
        find_setup_two_pair(with_overrides(cfg, T_1=20.0, T_2=20.0))


def test_setup_one_noiseless_accepts_first_attempt(setup1_noiseless):
    cfg, cmap = setup1_noiseless
    scenario = build_setup_one(cfg, cmap, KeyedStreams(cfg.seed, 0))
    assert scenario.metadata.rejections == 0
    assert scenario.window == (20.0, 40.0)
    assert scenario.horizon == 40.0
    assert [r.interval for r in scenario.path.changes] == [1]


def test_setup_one_trigger_pattern(setup1):
    cfg, cmap = setup1
    for r in range(5):
        scenario = build_setup_one(cfg, cmap, KeyedStreams(cfg.seed, r))
        trace, _ = run_simulation(scenario.cfg, cmap, ArchitectureKind.IN_EPS, scenario)
        assert observed_triggers(trace) == {(1, 1, 20.0), (2, 1, 20.0)}
        first = trace.of_kind("uplink_send")[0]
        assert (first.actor, first.time) == (1, 20.0)


def test_setup_one_infeasible_without_trigger(setup1_noiseless):
    cfg, cmap = setup1_noiseless
    cfg = with_overrides(cfg, epsilon=100.0)
    with pytest.raises(ConditioningInfeasibleError, match="setup-I conditioning infeasible"):
        build_setup_one(cfg, cmap, KeyedStreams(cfg.seed, 0))


def test_setup_one_requires_shared_component(setup1):
    cfg, _ = setup1
    _, unshared_only = preset("unshared_power")
    with pytest.raises(SetupGeometryError):
        build_setup_one(with_overrides(cfg, n=2), unshared_only, KeyedStreams(0))


def test_setup_two_change_windows():
    cfg, cmap = preset("setup2")
    for r in range(3):
        scenario = build_setup_two(cfg, cmap, KeyedStreams(cfg.seed, r))
        times = scenario.metadata.change_times
        assert 23.0 < times["k_shared"] <= 41.0
        assert 41.0 < times["k_own"] <= 46.0
        assert scenario.window == (23.0, 46.0)
        assert scenario.horizon > 46.0 + cfg.backoff.support_max
        trace, _ = run_simulation(scenario.cfg, cmap, ArchitectureKind.IN_EPS, scenario)
        assert observed_triggers(trace) == scenario.metadata.expected_triggers


def test_setup_two_rejects_bad_geometry():
    cfg, cmap = preset("setup2")
    with pytest.raises(SetupGeometryError, match="invalid setup-2 geometry"):
        build_setup_two(cfg, cmap, KeyedStreams(0), pair=(3, 1))
