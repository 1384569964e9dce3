"""Empirical p-table for the unshared-power closed form."""

import logging
import math
from collections import Counter
from typing import Optional

from tqdm import tqdm

from ..engine.simulator import run_simulation
from ..environment.random_walk import sample_path
from ..model.config import ArchitectureKind, ComponentMap, ScenarioConfig
from ..model.streams import KeyedStreams
from .closed_forms import PTable, time_key, unshared_grid

logger = logging.getLogger(__name__)


class PTableAccumulator:
    """Counts, per grid instant, the paths on which an unshared trigger was transmitted."""

    def __init__(self, cfg: ScenarioConfig, cmap: ComponentMap, interval: int):
        self.cfg = cfg
        self.cmap = cmap
        self.interval = interval
        self.keys = {
            (g.sensor, g.component, g.time) for j in (1, 2) for g in unshared_grid(cfg, cmap, interval, j)
        }
        self.counts: Counter = Counter()
        self.reps = 0

    def add(self, trace) -> None:
        seen = set()
        for record in trace.of_kind("uplink_send"):
            for k, ts in zip(record.components, record.sample_times):
                key = (record.actor, k, time_key(ts))
                if key in self.keys:
                    seen.add(key)
        self.counts.update(seen)
        self.reps += 1

    def table(self) -> PTable:
        table = PTable(interval=self.interval, reps=self.reps)
        for key in sorted(self.keys):
            p = self.counts[key] / self.reps if self.reps else 0.0
            table.p[key] = p
            table.stderr[key] = math.sqrt(p * (1.0 - p) / self.reps) if self.reps else 0.0
        return table


def default_interval(cfg: ScenarioConfig) -> int:
    """First interval whose previous interval lies fully inside the horizon."""
    return 1 if cfg.n_intervals >= 2 else 0


def estimate_p_jk(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    reps: int,
    root_seed: Optional[int] = None,
    interval: Optional[int] = None,
    arch: ArchitectureKind = ArchitectureKind.IN_EPS,
    progress: bool = False,
) -> PTable:
    """Frequency over ``reps`` free-running paths that sensor j transmits its trigger of k at each grid instant."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    root_seed = cfg.seed if root_seed is None else root_seed
    interval = default_interval(cfg) if interval is None else interval
    accumulator = PTableAccumulator(cfg, cmap, interval)
    for r in tqdm(range(reps), desc="Estimating p-table", disable=not progress):
        streams = KeyedStreams(root_seed, r)
        trace, _ = run_simulation(cfg, cmap, arch, sample_path(cfg, streams), streams)
        accumulator.add(trace)
    logger.info("Estimated p-table over %d replications for interval %d", reps, interval)
    return accumulator.table()
