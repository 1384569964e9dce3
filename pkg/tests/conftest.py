"""Shared fixtures for the test suite."""

import pytest

from src.experiments.presets import preset
from src.model.backoff import BackoffSpec
from src.model.config import ComponentMap, ScenarioConfig
from src.model.streams import KeyedStreams


@pytest.fixture
def small_map():
    return ComponentMap(shared={1}, unshared_1={2}, unshared_2={3}, full_index={1: 1, 2: 2, 3: 3})


@pytest.fixture
def small_cfg():
    return ScenarioConfig(
        n=3,
        delta_t=10.0,
        tau_1=10.0,
        tau_2=10.0,
        T_1=10.0,
        T_2=10.0,
        epsilon=0.5,
        sigma=0.2,
        d_low=1.0,
        d_up=2.0,
        p_change=0.5,
        backoff=BackoffSpec.uniform(4.0),
        t_sim=100.0,
        seed=17,
    )


@pytest.fixture
def streams():
    return KeyedStreams(root_seed=123, replication=0)


@pytest.fixture(params=["setup1", "single_change", "fig_event"])
def named_preset(request):
    return preset(request.param)


@pytest.fixture
def setup1():
    return preset("setup1")


@pytest.fixture
def setup1_noiseless(setup1):
    from src.model.config import with_overrides

    cfg, cmap = setup1
    return with_overrides(cfg, sigma=0.0), cmap
