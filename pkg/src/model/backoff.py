"""Backoff distributions: CDF, quantile and sampling."""

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

BACKOFF_KINDS = ("zero", "uniform", "empirical")


@dataclass(frozen=True)
class BackoffSpec:
    """Distribution of the delay between a trigger and its transmission.

    ``zero`` is the point mass at 0, ``uniform`` is U(0, b) and ``empirical``
    puts equal weight on each of ``values``.
    """

    kind: str = "uniform"
    b: float = 10.0
    values: Tuple[float, ...] = field(default_factory=tuple)

    @classmethod
    def zero(cls) -> "BackoffSpec":
        return cls(kind="zero", b=0.0)

    @classmethod
    def uniform(cls, b: float) -> "BackoffSpec":
        return cls(kind="uniform", b=float(b))

    @classmethod
    def empirical(cls, values) -> "BackoffSpec":
        return cls(kind="empirical", b=0.0, values=tuple(sorted(float(v) for v in values)))

    @property
    def support_max(self) -> float:
        if self.kind == "uniform":
            return self.b
        if self.kind == "empirical":
            return max(self.values)
        return 0.0

    def violations(self) -> list:
        problems = []
        if self.kind not in BACKOFF_KINDS:
            problems.append(f"backoff.kind must be one of {BACKOFF_KINDS}")
        elif self.kind == "uniform" and not self.b > 0:
            problems.append("backoff.b must be positive")
        elif self.kind == "empirical":
            if not self.values:
                problems.append("backoff.values must be nonempty")
            elif min(self.values) < 0:
                problems.append("backoff.values must be nonnegative")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "uniform":
            return {"kind": "uniform", "b": self.b}
        return {"kind": "empirical", "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BackoffSpec":
        if not isinstance(data, dict):
            raise ValueError("must be an object")
        kind = data.get("kind")
        allowed = {"zero": {"kind"}, "uniform": {"kind", "b"}, "empirical": {"kind", "values"}}
        extra = set(data) - allowed.get(kind, set(data))
        if extra:
            raise ValueError(f"unknown backoff fields: {sorted(extra)}")
        if kind == "zero":
            return cls.zero()
        if kind == "uniform":
            return cls.uniform(data["b"])
        if kind == "empirical":
            return cls.empirical(data["values"])
        raise ValueError(f"unknown backoff kind: {kind!r}")


def backoff_cdf(spec: BackoffSpec, s: float) -> float:
    """F_B(s) = P(B <= s)."""
    if s < 0:
        return 0.0
    if spec.kind == "zero":
        return 1.0
    if spec.kind == "uniform":
        return float(min(s / spec.b, 1.0))
    values = np.asarray(spec.values)
    return float(np.count_nonzero(values <= s) / values.size)


def backoff_quantile(spec: BackoffSpec, u: float) -> float:
    """Inverse CDF evaluated at a uniform draw u in [0, 1)."""
    if spec.kind == "zero":
        return 0.0
    if spec.kind == "uniform":
        return float(spec.b * u)
    n = len(spec.values)
    return float(spec.values[min(int(np.floor(u * n)), n - 1)])


def sample_backoff(spec: BackoffSpec, stream: np.random.Generator) -> float:
    """Draw one backoff duration; consumes exactly one uniform from ``stream``."""
    return backoff_quantile(spec, stream.random())
