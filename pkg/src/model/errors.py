"""Exception hierarchy for the Outformation toolkit."""

from typing import Iterable, List


class OutformationError(Exception):
    """Base class for all toolkit errors."""


class ConfigValidationError(OutformationError, ValueError):
    """Raised when a scenario config or component map violates an invariant."""

    def __init__(self, violations: Iterable[str]):
        self.violations: List[str] = list(violations)
        super().__init__("; ".join(self.violations))


class ComponentNotObservedError(OutformationError, ValueError):
    def __init__(self, sensor: int, component: int):
        self.sensor = sensor
        self.component = component
        super().__init__(f"component not observed by sensor: k={component}, j={sensor}")


class ConditioningInfeasibleError(OutformationError, RuntimeError):
    """Rejection sampling exhausted its budget."""


class SetupGeometryError(OutformationError, ValueError):
    """Verification periods admit no Setup II pair, or a scenario prerequisite fails."""


class EventQueueOverflowError(OutformationError, RuntimeError):
    pass


class MissingPEntriesError(OutformationError, KeyError):
    def __init__(self, missing: Iterable[tuple]):
        self.missing = sorted(missing)
        super().__init__(f"missing p entries: {self.missing}")

    def __str__(self) -> str:
        return self.args[0]


class CouplingError(OutformationError, RuntimeError):
    """Architectures in a paired run consumed different random primitives."""


class UnknownPresetError(OutformationError, KeyError):
    def __str__(self) -> str:
        return self.args[0]


class EmptyTraceError(OutformationError, ValueError):
    pass
