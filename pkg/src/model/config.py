"""Scenario configuration, component bookkeeping and architecture identifiers."""

import hashlib
import json
import logging
import math
import numbers
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from .backoff import BackoffSpec
from .errors import ConfigValidationError

logger = logging.getLogger(__name__)

ACCOUNTING_MODES = ("always", "conditional")
CHANGE_MODES = ("independent", "single")
INT_FIELDS = ("n", "seed", "max_events", "rejection_budget")
FLOAT_FIELDS = (
    "delta_t", "tau_1", "tau_2", "T_1", "T_2", "epsilon", "sigma", "d_low", "d_up",
    "p_change", "dt_up", "dt_down", "p_up", "p_down", "t_sim",
)
STR_FIELDS = ("broadcast_accounting", "change_mode")
COMPONENT_SETS = ("shared", "unshared_1", "unshared_2")


def _is_int(value: Any) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool) and math.isfinite(value)


class ArchitectureKind(str, Enum):
    IN0 = "in0"
    IN_EPS = "in_eps"
    OUT_EPS = "out_eps"

    @property
    def has_downlink(self) -> bool:
        return self is ArchitectureKind.OUT_EPS

    @classmethod
    def parse_list(cls, text: str) -> List["ArchitectureKind"]:
        return [cls(part.strip().lower()) for part in text.split(",") if part.strip()]


@dataclass(frozen=True)
class ComponentMap:
    """Partition of sensor components into shared and unshared sets."""

    shared: FrozenSet[int] = frozenset()
    unshared_1: FrozenSet[int] = frozenset()
    unshared_2: FrozenSet[int] = frozenset()
    full_index: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "shared", frozenset(self.shared))
        object.__setattr__(self, "unshared_1", frozenset(self.unshared_1))
        object.__setattr__(self, "unshared_2", frozenset(self.unshared_2))
        object.__setattr__(self, "full_index", {int(k): int(v) for k, v in self.full_index.items()})

    def __hash__(self):
        return hash((self.shared, self.unshared_1, self.unshared_2, tuple(sorted(self.full_index.items()))))

    def unshared(self, sensor: int) -> FrozenSet[int]:
        return self.unshared_1 if sensor == 1 else self.unshared_2

    def observed_by(self, sensor: int) -> Tuple[int, ...]:
        """Components sensor ``sensor`` observes, in ascending order."""
        return tuple(sorted(self.shared | self.unshared(sensor)))

    @property
    def all_unshared(self) -> FrozenSet[int]:
        return self.unshared_1 | self.unshared_2

    @property
    def components(self) -> FrozenSet[int]:
        return self.shared | self.unshared_1 | self.unshared_2

    def violations(self, n: int) -> List[str]:
        problems = []
        if self.shared & self.unshared_1:
            problems.append("shared and unshared_1 must be disjoint")
        if self.shared & self.unshared_2:
            problems.append("shared and unshared_2 must be disjoint")
        if self.unshared_1 & self.unshared_2:
            problems.append("unshared_1 and unshared_2 must be disjoint")
        missing = sorted(self.components - set(self.full_index))
        if missing:
            problems.append(f"full_index missing components {missing}")
        stray = sorted(set(self.full_index) - self.components)
        if stray:
            problems.append(f"full_index maps unknown components {stray}")
        if len(set(self.full_index.values())) != len(self.full_index):
            problems.append("full_index must be injective")
        out_of_range = sorted(i for i in self.full_index.values() if not 1 <= i <= n)
        if out_of_range:
            problems.append(f"full_index values {out_of_range} outside [1, n]")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shared": sorted(self.shared),
            "unshared_1": sorted(self.unshared_1),
            "unshared_2": sorted(self.unshared_2),
            "full_index": {str(k): v for k, v in sorted(self.full_index.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ComponentMap":
        if not isinstance(data, dict):
            raise ConfigValidationError(["components must be an object"])
        problems = [f"unknown components field: {name}" for name in sorted(set(data) - {*COMPONENT_SETS, "full_index"})]
        sets = {}
        for name in COMPONENT_SETS:
            raw = data.get(name, [])
            if not isinstance(raw, list) or not all(_is_int(k) for k in raw):
                problems.append(f"components.{name} must be a list of integers")
            else:
                sets[name] = frozenset(raw)
        full_index = {}
        raw_index = data.get("full_index", {})
        if not isinstance(raw_index, dict):
            problems.append("components.full_index must be an object")
        else:
            for key, value in raw_index.items():
                try:
                    component = int(key)
                except (TypeError, ValueError):
                    problems.append(f"components.full_index key {key!r} is not an integer")
                    continue
                if not _is_int(value):
                    problems.append(f"components.full_index[{key}] must be an integer")
                    continue
                full_index[component] = int(value)
        if problems:
            raise ConfigValidationError(problems)
        return cls(full_index=full_index, **sets)


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 3
    delta_t: float = 20.0
    tau_1: float = 20.0
    tau_2: float = 20.0
    T_1: float = 20.0
    T_2: float = 20.0
    epsilon: float = 1.0
    sigma: float = 1.0
    d_low: float = 5.0
    d_up: float = 8.0
    p_change: float = 0.3
    dt_up: float = 1.0
    dt_down: float = 1.0
    p_up: float = 2.0
    p_down: float = 1.0
    backoff: BackoffSpec = field(default_factory=lambda: BackoffSpec.uniform(10.0))
    t_sim: float = 200.0
    H: Optional[int] = None
    broadcast_accounting: str = "conditional"
    seed: int = 0
    change_mode: str = "independent"
    max_events: int = 1_000_000
    rejection_budget: int = 10_000

    def tau(self, sensor: int) -> float:
        return self.tau_1 if sensor == 1 else self.tau_2

    def period(self, sensor: int) -> float:
        return self.T_1 if sensor == 1 else self.T_2

    def verification_stride(self, sensor: int) -> int:
        """Number of samples between verification instants of ``sensor``."""
        return int(round(self.period(sensor) / self.tau(sensor)))

    def samples_per_interval(self, sensor: int) -> int:
        return int(round(self.delta_t / self.tau(sensor)))

    @property
    def n_intervals(self) -> int:
        return int(math.ceil(self.t_sim / self.delta_t - 1e-9))

    @property
    def event_triggered(self) -> bool:
        return self.verification_stride(1) == 1 and self.verification_stride(2) == 1

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["backoff"] = self.backoff.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigValidationError([f"unknown field: {name}" for name in unknown])
        values = dict(data)
        if "backoff" in values:
            try:
                values["backoff"] = BackoffSpec.from_dict(values["backoff"])
            except (ValueError, KeyError, TypeError) as e:
                raise ConfigValidationError([f"backoff: {e}"]) from e
        return cls(**values)


def type_violations(cfg: ScenarioConfig) -> List[str]:
    """Fields whose type rules out every other check."""
    problems = [f"{name} must be an integer" for name in INT_FIELDS if not _is_int(getattr(cfg, name))]
    problems.extend(f"{name} must be a finite number" for name in FLOAT_FIELDS if not _is_number(getattr(cfg, name)))
    problems.extend(f"{name} must be a string" for name in STR_FIELDS if not isinstance(getattr(cfg, name), str))
    if cfg.H is not None and not _is_int(cfg.H):
        problems.append("H must be an integer or null")
    if not isinstance(cfg.backoff, BackoffSpec):
        problems.append("backoff must be an object")
    return problems


def _is_positive_multiple(value: float, unit: float) -> bool:
    if unit <= 0 or value <= 0:
        return False
    ratio = value / unit
    return round(ratio) >= 1 and abs(ratio - round(ratio)) < 1e-9


def collect_violations(cfg: ScenarioConfig, cmap: ComponentMap) -> List[str]:
    """Every invariant of the config and component map that does not hold."""
    problems = type_violations(cfg)
    if problems:
        return problems
    if cfg.n < 1:
        problems.append("n must be at least 1")
    for j in (1, 2):
        tau, period = cfg.tau(j), cfg.period(j)
        if not tau > 0:
            problems.append(f"tau_{j} must be positive")
            continue
        if not _is_positive_multiple(period, tau):
            problems.append(f"T_{j} not a multiple of tau_{j}")
        if not _is_positive_multiple(cfg.delta_t, tau):
            problems.append(f"delta_t not a multiple of tau_{j}")
        elif cfg.H is not None and cfg.samples_per_interval(j) != cfg.H:
            problems.append(f"H must equal delta_t/tau_{j}")
    if cfg.epsilon < 0:
        problems.append("epsilon must be nonnegative")
    if cfg.sigma < 0:
        problems.append("sigma must be nonnegative")
    if not cfg.d_low > 0:
        problems.append("d_low must be positive")
    if cfg.d_up < cfg.d_low:
        problems.append("d_up must be at least d_low")
    if not 0.0 <= cfg.p_change <= 1.0:
        problems.append("p_change must lie in [0, 1]")
    if not cfg.p_down > 0:
        problems.append("P_D must be positive")
    if not cfg.p_up > cfg.p_down:
        problems.append("P_U must exceed P_D")
    if not cfg.dt_up > 0:
        problems.append("dt_up must be positive")
    if not cfg.dt_down > 0:
        problems.append("dt_down must be positive")
    if not cfg.t_sim > 0:
        problems.append("t_sim must be positive")
    if cfg.broadcast_accounting not in ACCOUNTING_MODES:
        problems.append(f"broadcast_accounting must be one of {ACCOUNTING_MODES}")
    if cfg.change_mode not in CHANGE_MODES:
        problems.append(f"change_mode must be one of {CHANGE_MODES}")
    if not 0 <= cfg.seed < 2**64:
        problems.append("seed must be an unsigned 64-bit integer")
    if cfg.max_events < 1:
        problems.append("max_events must be positive")
    if cfg.rejection_budget < 1:
        problems.append("rejection_budget must be positive")
    problems.extend(cfg.backoff.violations())
    problems.extend(cmap.violations(cfg.n))
    return problems


def validate_config(cfg: ScenarioConfig, cmap: ComponentMap) -> ScenarioConfig:
    """Return ``cfg`` unchanged if valid, otherwise raise with every violation."""
    problems = collect_violations(cfg, cmap)
    if problems:
        raise ConfigValidationError(problems)
    return cfg


def scenario_to_dict(cfg: ScenarioConfig, cmap: ComponentMap) -> Dict[str, Any]:
    data = cfg.to_dict()
    data["components"] = cmap.to_dict()
    return data


def scenario_from_dict(data: Dict[str, Any]) -> Tuple[ScenarioConfig, ComponentMap]:
    values = dict(data)
    components = values.pop("components", None)
    problems = []
    cmap = cfg = None
    if components is None:
        problems.append("components must be provided")
    else:
        try:
            cmap = ComponentMap.from_dict(components)
        except ConfigValidationError as e:
            problems.extend(e.violations)
    try:
        cfg = ScenarioConfig.from_dict(values)
    except ConfigValidationError as e:
        problems.extend(e.violations)
    if cfg is not None:
        problems.extend(type_violations(cfg))
    if problems:
        raise ConfigValidationError(problems)
    return validate_config(cfg, cmap), cmap


def load_scenario(file_path: Path) -> Tuple[ScenarioConfig, ComponentMap]:
    """Load and validate a scenario document; JSON errors propagate with their location."""
    data = json.loads(Path(file_path).read_text())
    if not isinstance(data, dict):
        raise ConfigValidationError(["scenario document must be a JSON object"])
    cfg, cmap = scenario_from_dict(data)
    logger.info("Loaded scenario from %s", file_path)
    return cfg, cmap


def config_digest(cfg: ScenarioConfig, cmap: ComponentMap) -> str:
    canonical = json.dumps(scenario_to_dict(cfg, cmap), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    return replace(cfg, **changes)
