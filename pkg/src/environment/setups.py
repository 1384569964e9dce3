"""Conditioned scenarios: one shared change (Setup I) and the two-change pattern (Setup II).

Noise and backoff draws are resampled by bumping the stream attempt counter
until a replay of the scenario shows exactly the declared trigger pattern.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Optional, Set, Tuple

import numpy as np

from ..model.config import ArchitectureKind, ComponentMap, ScenarioConfig
from ..model.errors import ConditioningInfeasibleError, SetupGeometryError
from ..model.streams import KeyedStreams
from .random_walk import ChangeRecord, EnvironmentPath, _draw_step

logger = logging.getLogger(__name__)

Trigger = Tuple[int, int, float]


@dataclass(frozen=True)
class SetupMetadata:
    setup: str
    components: Dict[str, int]
    full_indices: Dict[str, int]
    intervals: Dict[str, int]
    change_times: Dict[str, float]
    expected_triggers: FrozenSet[Trigger]
    rejections: int = 0


@dataclass
class ConditionedScenario:
    path: EnvironmentPath
    window: Tuple[float, float]
    horizon: float
    streams: KeyedStreams
    metadata: SetupMetadata
    cfg: ScenarioConfig = field(repr=False, default=None)


def _key(t: float) -> float:
    return round(t, 9)


def observed_triggers(trace) -> Set[Trigger]:
    return {(r.actor, r.components[0], _key(r.time)) for r in trace.of_kind("trigger")}


def replay_matches(scenario: ConditionedScenario, cmap: ComponentMap) -> bool:
    """Replay both threshold architectures and compare trigger sets with the declared pattern.

    IN(eps) must reproduce the pattern exactly; OUT(eps) may only drop triggers,
    since a broadcast can move a reference before verification.
    """
    from ..engine.simulator import run_simulation

    expected = scenario.metadata.expected_triggers
    in_trace, _ = run_simulation(scenario.cfg, cmap, ArchitectureKind.IN_EPS, scenario)
    if observed_triggers(in_trace) != expected:
        return False
    out_trace, _ = run_simulation(scenario.cfg, cmap, ArchitectureKind.OUT_EPS, scenario)
    return observed_triggers(out_trace) <= expected


def _condition(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    streams: KeyedStreams,
    path: EnvironmentPath,
    window: Tuple[float, float],
    horizon: float,
    metadata: SetupMetadata,
    overrides: Dict,
    budget: Optional[int],
    label: str,
) -> ConditionedScenario:
    budget = budget if budget is not None else cfg.rejection_budget
    if cfg.sigma == 0:
        budget = 1  # noiseless: every attempt replays identically
    sim_cfg = replace(cfg, t_sim=horizon)
    for attempt in range(budget):
        candidate = ConditionedScenario(
            path=path,
            window=window,
            horizon=horizon,
            streams=streams.with_attempt(attempt).with_overrides(overrides),
            metadata=replace(metadata, rejections=attempt),
            cfg=sim_cfg,
        )
        if replay_matches(candidate, cmap):
            logger.debug("%s accepted after %d rejections", label, attempt)
            return candidate
    logger.warning("%s conditioning failed after %d attempts", label, budget)
    raise ConditioningInfeasibleError(f"{label} conditioning infeasible")


def build_setup_one(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    streams: KeyedStreams,
    interval: int = 1,
    budget: Optional[int] = None,
) -> ConditionedScenario:
    """Shared component k changes at the start of interval ``interval`` and nothing else moves.

    Both sensors trigger on k at c*delta_t; sensor 1 transmits at once and
    sensor 2 backs off.
    """
    if not cmap.shared:
        raise SetupGeometryError("setup I requires a shared component")
    if not cfg.event_triggered:
        raise SetupGeometryError("setup I requires event-triggered verification (T_j = tau_j)")
    if interval < 1:
        raise SetupGeometryError("setup I interval must be at least 1")

    k = min(cmap.shared)
    i = cmap.full_index[k]
    c = interval
    t_change = c * cfg.delta_t
    path = EnvironmentPath(
        x0=tuple(0.0 for _ in range(cfg.n)),
        delta_t=cfg.delta_t,
        n_intervals=c + 1,
        changes=(ChangeRecord(interval=c, full_index=i, step=_draw_step(cfg, streams, i, c)),),
    )
    m1 = c * cfg.samples_per_interval(1)
    metadata = SetupMetadata(
        setup="I",
        components={"k": k},
        full_indices={"k": i},
        intervals={"c": c},
        change_times={"k": t_change},
        expected_triggers=frozenset({(1, k, _key(t_change)), (2, k, _key(t_change))}),
    )
    return _condition(
        cfg,
        cmap,
        streams,
        path,
        window=(t_change, t_change + cfg.delta_t),
        horizon=t_change + cfg.delta_t,
        metadata=metadata,
        overrides={("backoff", 1, 0, m1): 0.0},
        budget=budget,
        label="setup-I",
    )


def find_setup_two_pair(cfg: ScenarioConfig) -> Tuple[int, int]:
    """Smallest a1 with an a2 such that (a1-1)*T_1 < a2*T_2 < a1*T_1 inside [0, t_sim)."""
    a1 = 1
    while a1 * cfg.T_1 < cfg.t_sim:
        a2 = math.ceil(a1 * cfg.T_1 / cfg.T_2) - 1
        if a2 >= 1 and (a1 - 1) * cfg.T_1 < a2 * cfg.T_2 < a1 * cfg.T_1:
            return a1, a2
        a1 += 1
    raise SetupGeometryError("no valid (a1,a2) pair")


def _pick_boundary(cfg: ScenarioConfig, streams: KeyedStreams, lower: float, upper: float, slot: int) -> int:
    """Interval index c with c*delta_t in (lower, upper], chosen uniformly."""
    first = int(np.floor(lower / cfg.delta_t + 1e-9)) + 1
    last = int(np.floor(upper / cfg.delta_t + 1e-9))
    if last < first:
        raise SetupGeometryError(f"no environment boundary in ({lower}, {upper}]")
    u = streams.uniform("setup_pick", 0, slot, 0)
    return first + min(int(u * (last - first + 1)), last - first)


def build_setup_two(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    streams: KeyedStreams,
    pair: Optional[Tuple[int, int]] = None,
    budget: Optional[int] = None,
) -> ConditionedScenario:
    """Shared k' changes in ((a1-1)T_1, a2 T_2], sensor 1's unshared k1 in (a2 T_2, a1 T_1]."""
    if not (cfg.T_1 > cfg.tau_1 and cfg.T_2 > cfg.tau_2):
        raise SetupGeometryError("setup II requires T_j > tau_j for both sensors")
    if not cmap.shared or not cmap.unshared_1:
        raise SetupGeometryError("setup II requires a shared component and an unshared component of sensor 1")
    a1, a2 = pair if pair is not None else find_setup_two_pair(cfg)
    if not (a1 - 1) * cfg.T_1 < a2 * cfg.T_2 < a1 * cfg.T_1:
        raise SetupGeometryError("invalid setup-2 geometry")

    k_shared, k_own = min(cmap.shared), min(cmap.unshared_1)
    i_shared, i_own = cmap.full_index[k_shared], cmap.full_index[k_own]
    t1, t2 = a1 * cfg.T_1, a2 * cfg.T_2
    c_shared = _pick_boundary(cfg, streams, (a1 - 1) * cfg.T_1, t2, slot=1)
    c_own = _pick_boundary(cfg, streams, t2, t1, slot=2)

    tail = cfg.backoff.support_max + len(cmap.observed_by(1)) * cfg.dt_up + cfg.dt_down
    n_intervals = int(math.ceil((t1 + tail) / cfg.delta_t - 1e-9)) + 1
    horizon = n_intervals * cfg.delta_t
    path = EnvironmentPath(
        x0=tuple(0.0 for _ in range(cfg.n)),
        delta_t=cfg.delta_t,
        n_intervals=n_intervals,
        changes=(
            ChangeRecord(c_shared, i_shared, _draw_step(cfg, streams, i_shared, c_shared)),
            ChangeRecord(c_own, i_own, _draw_step(cfg, streams, i_own, c_own)),
        ),
    )
    metadata = SetupMetadata(
        setup="II",
        components={"k_shared": k_shared, "k_own": k_own},
        full_indices={"k_shared": i_shared, "k_own": i_own},
        intervals={"a1": a1, "a2": a2},
        change_times={"k_shared": c_shared * cfg.delta_t, "k_own": c_own * cfg.delta_t},
        expected_triggers=frozenset(
            {(2, k_shared, _key(t2)), (1, k_shared, _key(t1)), (1, k_own, _key(t1))}
        ),
    )
    return _condition(
        cfg,
        cmap,
        streams,
        path,
        window=((a1 - 1) * cfg.T_1, t1),
        horizon=horizon,
        metadata=metadata,
        overrides={},
        budget=budget,
        label="setup-II",
    )
