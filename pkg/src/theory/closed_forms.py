"""Closed-form expectations and probabilities for the shared and unshared components.

Formulas whose printed statement disagrees with the event timing they are
derived from are exposed in two variants: ``PRINTED`` evaluates the
statement as written, ``PROOF_CONSISTENT`` the orientation implied by the
cancellation timing.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..model.backoff import BackoffSpec, backoff_cdf
from ..model.config import ComponentMap, ScenarioConfig
from ..model.errors import MissingPEntriesError, SetupGeometryError
from .gaussian import gauss_abs_diff_prob, printed_region, proof_consistent_region, strip_probability


class FormulaVariant(str, Enum):
    PRINTED = "printed"
    PROOF_CONSISTENT = "proof_consistent"


def _side(variant: FormulaVariant) -> str:
    return "geq" if FormulaVariant(variant) is FormulaVariant.PRINTED else "lt"


def broadcast_wins(cfg: ScenarioConfig) -> float:
    """P(B >= dt_up + dt_down) as 1 - F_B: the peer's broadcast reaches a backed-off sensor in time."""
    return 1.0 - backoff_cdf(cfg.backoff, cfg.dt_up + cfg.dt_down)


def power_shared_expected_diff(
    cfg: ScenarioConfig,
    variant: FormulaVariant,
    accounting: str = "conditional",
) -> float:
    """E[R_IN - R_OUT] over a Setup I interval.

    Under ``conditional`` accounting this is (P_U - P_D)(1 - F_B)P(.). Under
    ``always`` every broadcast is charged, including the one relaying sensor
    2's report back to sensor 1, giving q(P_U + P_D) - 2 P_D.
    """
    q = broadcast_wins(cfg) * gauss_abs_diff_prob(cfg.epsilon, cfg.sigma, _side(variant))
    if accounting == "conditional":
        return (cfg.p_up - cfg.p_down) * q
    if accounting == "always":
        # broadcast term: OUT relays both uplinks (2 P_D); a cancelled uplink saves P_U and its relay P_D
        return q * (cfg.p_up + cfg.p_down) - 2.0 * cfg.p_down
    raise ValueError(f"unknown accounting mode: {accounting!r}")


def mse_shared_prob(cfg: ScenarioConfig, variant: FormulaVariant) -> float:
    """P(windowed MSE under OUT < under IN) for a Setup I interval."""
    region = printed_region if FormulaVariant(variant) is FormulaVariant.PRINTED else proof_consistent_region
    return broadcast_wins(cfg) * strip_probability(cfg.epsilon, cfg.sigma, region)


def backoff_diff_cdf(spec: BackoffSpec, s: float) -> float:
    """G(s) = P(B1 - B2 <= s) for independent B1, B2 ~ F_B."""
    if spec.kind == "zero":
        return 1.0 if s >= 0 else 0.0
    if spec.kind == "uniform":
        b = spec.b
        if s <= -b:
            return 0.0
        if s >= b:
            return 1.0
        if s <= 0:
            return (b + s) ** 2 / (2.0 * b * b)
        return 1.0 - (b - s) ** 2 / (2.0 * b * b)
    values = np.asarray(spec.values)
    return float(np.mean(values[:, None] - values[None, :] <= s))


def mse_shared_gen_prob(cfg: ScenarioConfig, pair: Tuple[int, int], variant: FormulaVariant) -> float:
    """P(MSE of sensor 1's unshared component improves under OUT) in Setup II."""
    a1, a2 = pair
    if not (a1 - 1) * cfg.T_1 < a2 * cfg.T_2 < a1 * cfg.T_1:
        raise SetupGeometryError("invalid setup-2 geometry")
    gap = a1 * cfg.T_1 - a2 * cfg.T_2
    delays = cfg.dt_up + cfg.dt_down
    p_step = 1.0 if cfg.d_low > 0 else 0.0
    p_close = gauss_abs_diff_prob(cfg.epsilon, cfg.sigma, "lt")
    if FormulaVariant(variant) is FormulaVariant.PRINTED:
        return p_step * p_close * (1.0 - backoff_diff_cdf(cfg.backoff, gap + delays))
    return p_step * p_close * backoff_diff_cdf(cfg.backoff, gap - delays)


@dataclass(frozen=True)
class GridPoint:
    sensor: int
    component: int
    time: float
    weight: float


def time_key(t: float) -> float:
    return round(t, 9)


def unshared_grid(cfg: ScenarioConfig, cmap: ComponentMap, interval: int, sensor: int) -> List[GridPoint]:
    """Trigger instants whose uplink can land in ``interval``, weighted by that probability.

    Instants in the previous interval (h = 0..H) arrive late enough with
    probability 1 - F_B(delta_t - h tau - dt_up); instants inside the interval
    (h = 1..H-1) arrive early enough with probability F_B(delta_t - h tau - dt_up).
    """
    tau, H, dt = cfg.tau(sensor), cfg.samples_per_interval(sensor), cfg.delta_t
    points = []
    for k in sorted(cmap.unshared(sensor)):
        for h in range(0, H + 1):
            weight = 1.0 - backoff_cdf(cfg.backoff, dt - h * tau - cfg.dt_up)
            points.append(GridPoint(sensor, k, time_key((interval - 1) * dt + h * tau), weight))
        for h in range(1, H):
            weight = backoff_cdf(cfg.backoff, dt - h * tau - cfg.dt_up)
            points.append(GridPoint(sensor, k, time_key(interval * dt + h * tau), weight))
    return points


@dataclass
class PTable:
    """Empirical trigger-and-transmit frequencies at grid instants."""

    interval: int
    reps: int
    p: Dict[Tuple[int, int, float], float] = field(default_factory=dict)
    stderr: Dict[Tuple[int, int, float], float] = field(default_factory=dict)

    def get(self, sensor: int, component: int, t: float) -> Optional[float]:
        return self.p.get((sensor, component, time_key(t)))


def unshared_power_expected(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    p_table: PTable,
    sensors: Iterable[int] = (1, 2),
) -> float:
    """Expected power of unshared components received during ``p_table.interval``."""
    total = 0.0
    missing = []
    for j in sensors:
        for point in unshared_grid(cfg, cmap, p_table.interval, j):
            p = p_table.get(point.sensor, point.component, point.time)
            if p is None:
                missing.append((point.sensor, point.component, point.time))
                continue
            total += point.weight * p
    if missing:
        raise MissingPEntriesError(missing)
    return cfg.p_up * total
