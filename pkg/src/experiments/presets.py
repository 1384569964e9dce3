"""Named scenario presets."""

from itertools import product
from typing import Callable, Dict, List, Tuple

from ..environment.setups import find_setup_two_pair
from ..model.backoff import BackoffSpec
from ..model.config import ComponentMap, ScenarioConfig, validate_config, with_overrides
from ..model.errors import UnknownPresetError

Preset = Tuple[ScenarioConfig, ComponentMap]

SWEEP_EPSILONS = (0.25, 0.5, 1.0, 2.0)
SWEEP_SIGMAS = (0.0, 0.1, 0.5, 1.0)


def _identity_map(shared, unshared_1, unshared_2) -> ComponentMap:
    ids = sorted(set(shared) | set(unshared_1) | set(unshared_2))
    return ComponentMap(shared=shared, unshared_1=unshared_1, unshared_2=unshared_2, full_index={k: k for k in ids})


def _setup1() -> Preset:
    cfg = ScenarioConfig(
        n=1, delta_t=20.0, tau_1=20.0, tau_2=20.0, T_1=20.0, T_2=20.0, H=1,
        epsilon=1.0, sigma=1.0, d_low=5.0, d_up=8.0, p_change=0.0,
        dt_up=1.0, dt_down=1.0, p_up=2.0, p_down=1.0, backoff=BackoffSpec.uniform(10.0),
        t_sim=40.0, broadcast_accounting="conditional", seed=2024,
    )
    return cfg, _identity_map({1}, set(), set())


def _setup2() -> Preset:
    cfg = ScenarioConfig(
        n=2, delta_t=1.0, tau_1=1.0, tau_2=1.0, T_1=23.0, T_2=41.0, H=1,
        epsilon=1.0, sigma=1.0, d_low=5.0, d_up=8.0, p_change=0.0,
        dt_up=1.0, dt_down=1.0, p_up=2.0, p_down=1.0, backoff=BackoffSpec.uniform(10.0),
        t_sim=100.0, broadcast_accounting="conditional", seed=2024,
    )
    cmap = _identity_map({1}, {2}, set())
    find_setup_two_pair(cfg)
    return cfg, cmap


def _fig_event() -> Preset:
    cfg = ScenarioConfig(
        n=6, delta_t=20.0, tau_1=20.0, tau_2=20.0, T_1=20.0, T_2=20.0, H=1,
        epsilon=0.5, sigma=0.0, d_low=1.0, d_up=3.0, p_change=0.3,
        dt_up=1.0, dt_down=1.0, p_up=2.0, p_down=1.0, backoff=BackoffSpec.uniform(10.0),
        t_sim=200.0, broadcast_accounting="always", seed=7,
    )
    return cfg, _identity_map({1, 2}, {3, 4}, {5, 6})


def _fig_time() -> Preset:
    cfg = ScenarioConfig(
        n=12, delta_t=10.0, tau_1=1.0, tau_2=1.0, T_1=23.0, T_2=41.0, H=10,
        epsilon=0.5, sigma=0.1, d_low=1.0, d_up=3.0, p_change=0.1,
        dt_up=1.0, dt_down=1.0, p_up=2.0, p_down=1.0, backoff=BackoffSpec.zero(),
        t_sim=200.0, broadcast_accounting="always", seed=23,
    )
    return cfg, _identity_map({7, 10, 11, 12}, {1, 2, 3, 4}, {5, 6, 8, 9})


def _sweep() -> Preset:
    cfg, cmap = _fig_event()
    return with_overrides(cfg, sigma=0.5, seed=11), cmap


def _single_change() -> Preset:
    cfg = ScenarioConfig(
        n=3, delta_t=10.0, tau_1=10.0, tau_2=10.0, T_1=10.0, T_2=10.0, H=1,
        epsilon=0.5, sigma=0.0, d_low=1.0, d_up=2.0, p_change=1.0, change_mode="single",
        dt_up=1.0, dt_down=1.0, p_up=2.0, p_down=1.0, backoff=BackoffSpec.uniform(5.0),
        t_sim=200.0, broadcast_accounting="conditional", seed=3,
    )
    return cfg, _identity_map({1}, {2}, {3})


def _unshared_power() -> Preset:
    cfg = ScenarioConfig(
        n=2, delta_t=10.0, tau_1=2.0, tau_2=2.0, T_1=2.0, T_2=2.0, H=5,
        epsilon=1.0, sigma=0.5, d_low=1.0, d_up=2.0, p_change=0.3,
        dt_up=1.0, dt_down=0.5, p_up=2.0, p_down=1.0, backoff=BackoffSpec.uniform(1.5),
        t_sim=30.0, broadcast_accounting="conditional", seed=5,
    )
    return cfg, _identity_map(set(), {1}, {2})


PRESETS: Dict[str, Callable[[], Preset]] = {
    "setup1": _setup1,
    "setup2": _setup2,
    "fig_event": _fig_event,
    "fig_time": _fig_time,
    "sweep": _sweep,
    "single_change": _single_change,
    "unshared_power": _unshared_power,
}

FIG_TIME_INDICES = (7, 10, 12)


def preset(name: str) -> Preset:
    """Validated (config, component map) for a named preset."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise UnknownPresetError(f"unknown preset: {name!r}") from None
    cfg, cmap = factory()
    return validate_config(cfg, cmap), cmap


def sweep_grid(epsilons=SWEEP_EPSILONS, sigmas=SWEEP_SIGMAS) -> List[Tuple[float, float]]:
    return list(product(epsilons, sigmas))
