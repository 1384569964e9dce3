"""Central-processor estimate: latest-timestamp averaging fusion."""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from ..model.config import ComponentMap


@dataclass
class EstimateState:
    """Stored reports per component and the piecewise-constant estimate trajectory.

    ``trajectory[i]`` lists (time, value) breakpoints for full index ``i``; the
    first breakpoint is the initial state at time 0.
    """

    cmap: ComponentMap
    x0: Tuple[float, ...]
    stored: Dict[int, Dict[int, Tuple[float, float]]] = field(default_factory=dict)
    trajectory: Dict[int, List[Tuple[float, float]]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.trajectory:
            self.trajectory = {i: [(0.0, float(v))] for i, v in enumerate(self.x0, start=1)}

    def estimate(self, full_index: int) -> float:
        return self.trajectory[full_index][-1][1]

    def breakpoints(self, full_index: int) -> Tuple[np.ndarray, np.ndarray]:
        points = self.trajectory[full_index]
        return np.array([p[0] for p in points]), np.array([p[1] for p in points])


def fuse(state: EstimateState, sensor: int, component: int, value: float, sample_time: float, now: float) -> float:
    """Store sensor's report and recompute the mean over the newest timestamp.

    A report older than the sensor's stored one leaves the estimate untouched.
    """
    entries = state.stored.setdefault(component, {})
    full_index = state.cmap.full_index[component]
    previous = entries.get(sensor)
    if previous is not None and previous[1] > sample_time:
        return state.estimate(full_index)
    entries[sensor] = (float(value), float(sample_time))
    newest = max(ts for _, ts in entries.values())
    fused = float(np.mean([v for v, ts in entries.values() if ts == newest]))
    state.trajectory[full_index].append((now, fused))
    return fused
