"""MSE integration and per-run metrics."""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..model.config import ScenarioConfig
from .estimator import EstimateState, fuse


@dataclass(frozen=True)
class MSEResult:
    raw: Dict[int, float]
    normalized: Dict[int, float]
    total: float


@dataclass(frozen=True)
class MetricsReport:
    per_index_mse: Dict[int, float]
    mse_total: float
    power_total: float
    uplink_components: int
    downlink_components: int
    cancellations: int

    def to_row(self) -> Dict[str, float]:
        row = {
            "mse_total": self.mse_total,
            "power_total": self.power_total,
            "uplink_components": self.uplink_components,
            "downlink_components": self.downlink_components,
            "cancellations": self.cancellations,
        }
        for i, value in sorted(self.per_index_mse.items()):
            row[f"mse_idx_{i}"] = value
        return row


def _step_values(times: np.ndarray, values: np.ndarray, at: np.ndarray) -> np.ndarray:
    """Right-continuous step function through (times, values) evaluated at ``at``.

    Several breakpoints at the same time resolve to the last one.
    """
    idx = np.searchsorted(times, at, side="right") - 1
    return values[np.clip(idx, 0, len(values) - 1)]


def integrate_index(path, estimates: EstimateState, full_index: int, window: Tuple[float, float]) -> float:
    """Exact integral of (x_i - xhat_i)^2 over ``window``."""
    start, end = window
    if end <= start:
        return 0.0
    x_times, x_values = path.breakpoints(full_index)
    e_times, e_values = estimates.breakpoints(full_index)
    cuts = np.concatenate(([start], x_times, e_times))
    cuts = np.unique(cuts[(cuts >= start) & (cuts < end)])
    durations = np.diff(np.append(cuts, end))
    error = _step_values(x_times, x_values, cuts) - _step_values(e_times, e_values, cuts)
    return float(np.sum(error**2 * durations))


def integrate_mse(
    path,
    estimates: EstimateState,
    window: Optional[Tuple[float, float]] = None,
    t_sim: Optional[float] = None,
) -> MSEResult:
    """Per-index un-normalized integrals over ``window`` and totals divided by ``t_sim``."""
    t_sim = t_sim if t_sim is not None else path.horizon
    window = window if window is not None else (0.0, t_sim)
    raw = {i: integrate_index(path, estimates, i, window) for i in range(1, path.n + 1)}
    normalized = {i: value / t_sim for i, value in raw.items()}
    return MSEResult(raw=raw, normalized=normalized, total=sum(normalized.values()))


def summarize(trace, cfg: ScenarioConfig) -> MetricsReport:
    """Metrics of a completed trace; counts agree with the ledger and the event log."""
    mse = integrate_mse(trace.path, trace.estimates, (0.0, trace.horizon), trace.horizon)
    return MetricsReport(
        per_index_mse=mse.normalized,
        mse_total=mse.total,
        power_total=trace.ledger.power(mode=cfg.broadcast_accounting),
        uplink_components=trace.ledger.uplink_components,
        downlink_components=trace.ledger.downlink_count(mode=cfg.broadcast_accounting),
        cancellations=len(trace.cancellations),
    )


def replay_estimates(trace) -> EstimateState:
    """Rebuild the estimate trajectory from the uplink_arrive records of ``trace``."""
    state = EstimateState(trace.estimates.cmap, trace.path.x0)
    for record in trace.of_kind("uplink_arrive"):
        for k, value, ts in zip(record.components, record.values, record.sample_times):
            fuse(state, record.actor, k, value, ts, record.time)
    return state
