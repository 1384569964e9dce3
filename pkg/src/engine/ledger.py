"""Power ledger: uplink and downlink component charges over time."""

from dataclasses import dataclass, field
from typing import List, Optional

UPLINK = "uplink"
DOWNLINK = "downlink"
DOWNLINK_CANCEL = "downlink_cancel"


@dataclass(frozen=True)
class LedgerEntry:
    time: float
    channel: str
    components: int


@dataclass
class PowerLedger:
    """R = P_U * uplink components + P_D * charged downlink components.

    Downlink components are recorded twice: at broadcast send (``always``
    accounting) and at the arrival that cancels a pending transmission
    (``conditional`` accounting).
    """

    p_up: float
    p_down: float
    mode: str = "always"
    entries: List[LedgerEntry] = field(default_factory=list)

    def record(self, time: float, channel: str, components: int) -> None:
        if components > 0:
            self.entries.append(LedgerEntry(time, channel, components))

    def count(self, channel: str, t1: float = float("-inf"), t2: float = float("inf")) -> int:
        return sum(e.components for e in self.entries if e.channel == channel and t1 <= e.time < t2)

    def downlink_count(self, t1: float = float("-inf"), t2: float = float("inf"), mode: Optional[str] = None) -> int:
        # always: every broadcast is charged, including the relay of a shared uplink
        channel = DOWNLINK if (mode or self.mode) == "always" else DOWNLINK_CANCEL
        return self.count(channel, t1, t2)

    @property
    def uplink_components(self) -> int:
        return self.count(UPLINK)

    @property
    def downlink_components(self) -> int:
        return self.downlink_count()

    def power(self, t1: float = float("-inf"), t2: float = float("inf"), mode: Optional[str] = None) -> float:
        """Windowed R(t1:t2) over [t1, t2)."""
        return self.p_up * self.count(UPLINK, t1, t2) + self.p_down * self.downlink_count(t1, t2, mode)

    @property
    def total(self) -> float:
        return self.power()


def accumulate_power(ledger: PowerLedger, time: float, channel: str, components: int) -> PowerLedger:
    """Charge ``components`` on ``channel``; empty packets cost nothing."""
    ledger.record(time, channel, components)
    return ledger
