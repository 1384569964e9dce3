"""Piecewise-constant random-walk environment paths."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from ..model.config import ScenarioConfig
from ..model.streams import KeyedStreams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChangeRecord:
    interval: int
    full_index: int
    step: float


@dataclass(frozen=True)
class EnvironmentPath:
    """Realization of x(t): constant on each [c*delta_t, (c+1)*delta_t)."""

    x0: Tuple[float, ...]
    delta_t: float
    n_intervals: int
    changes: Tuple[ChangeRecord, ...]

    def __post_init__(self):
        n = len(self.x0)
        steps = np.zeros((self.n_intervals, n))
        for record in self.changes:
            steps[record.interval, record.full_index - 1] += record.step
        states = np.asarray(self.x0, dtype=float) + np.cumsum(steps, axis=0)
        states.setflags(write=False)
        object.__setattr__(self, "_states", states)

    @property
    def n(self) -> int:
        return len(self.x0)

    @property
    def horizon(self) -> float:
        return self.n_intervals * self.delta_t

    @property
    def states(self) -> np.ndarray:
        """Row c holds x on interval c."""
        return self._states

    def interval_of(self, t: float) -> int:
        c = int(np.floor(t / self.delta_t + 1e-9))
        return min(max(c, 0), self.n_intervals - 1)

    def x(self, t: float) -> np.ndarray:
        return self._states[self.interval_of(t)]

    def value(self, full_index: int, t: float) -> float:
        return float(self._states[self.interval_of(t), full_index - 1])

    def breakpoints(self, full_index: int) -> Tuple[np.ndarray, np.ndarray]:
        """Times at which x_i may change and the value held from each."""
        times = np.arange(self.n_intervals) * self.delta_t
        return times, self._states[:, full_index - 1]

    def to_frame(self) -> pd.DataFrame:
        rows = [(r.interval, r.full_index, r.step) for r in self.changes]
        return pd.DataFrame(rows, columns=["interval", "full_index", "step_value"])

    def to_csv(self, file_path: Path) -> None:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(file_path, index=False)


def _draw_step(cfg: ScenarioConfig, streams: KeyedStreams, full_index: int, c: int) -> float:
    magnitude = cfg.d_low + (cfg.d_up - cfg.d_low) * streams.uniform("env_step", 0, full_index, c)
    sign = 1.0 if streams.uniform("env_sign", 0, full_index, c) < 0.5 else -1.0
    return sign * magnitude


def step_environment(
    x: np.ndarray,
    c: int,
    streams: KeyedStreams,
    cfg: ScenarioConfig,
    forced: Optional[Mapping[int, float]] = None,
) -> Tuple[np.ndarray, List[ChangeRecord]]:
    """Advance the state into interval ``c``.

    ``forced`` maps full indices to steps that replace the random draws; when
    given, no other index changes.
    """
    new_x = np.array(x, dtype=float, copy=True)
    records: List[ChangeRecord] = []
    if forced is not None:
        steps: Dict[int, float] = dict(forced)
    elif cfg.change_mode == "single":
        steps = {}
        if streams.uniform("env_change", 0, 0, c) < cfg.p_change:
            i = 1 + min(int(streams.uniform("env_pick", 0, 0, c) * cfg.n), cfg.n - 1)
            steps[i] = _draw_step(cfg, streams, i, c)
    else:
        steps = {
            i: _draw_step(cfg, streams, i, c)
            for i in range(1, cfg.n + 1)
            if streams.uniform("env_change", 0, i, c) < cfg.p_change
        }
    for i in sorted(steps):
        new_x[i - 1] += steps[i]
        records.append(ChangeRecord(interval=c, full_index=i, step=float(steps[i])))
    return new_x, records


def sample_path(cfg: ScenarioConfig, streams: KeyedStreams) -> EnvironmentPath:
    """Random-walk path over [0, t_sim) starting from the zero vector."""
    x = np.zeros(cfg.n)
    changes: List[ChangeRecord] = []
    for c in range(1, cfg.n_intervals):
        x, records = step_environment(x, c, streams, cfg)
        changes.extend(records)
    logger.debug("Sampled path with %d change records", len(changes))
    return EnvironmentPath(
        x0=tuple(0.0 for _ in range(cfg.n)),
        delta_t=cfg.delta_t,
        n_intervals=cfg.n_intervals,
        changes=tuple(changes),
    )
