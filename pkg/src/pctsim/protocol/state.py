"""Participant state, records, reports, and the timing constants.

Time is a flat slot index: 144 ten-minute slots per day. The infectious
window and record retention are both 14 days; a patient diagnosed on day d
reports material from days [d-13, d], which is exactly what an honest
device still retains on day d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..crypto.group import GroupDesc, Scalar
from .spec import ProtocolSpec

SLOTS_PER_DAY = 144
SLOT_MINUTES = 10


@dataclass(frozen=True)
class TracingConfig:
    """Tunable constants. Defaults follow the usual close-contact rule:
    within 6 feet (1.83 m) for an aggregate of at least 15 minutes, with
    sessions shorter than 2 minutes ignored."""

    proximity_meters: float = 1.83
    min_session_minutes: int = 2
    exposure_minutes: int = 15
    retention_days: int = 14
    window_days: int = 14


DEFAULT_CONFIG = TracingConfig()


def slot_day(slot: int) -> int:
    return slot // SLOTS_PER_DAY


def day_slots(day: int) -> range:
    return range(day * SLOTS_PER_DAY, (day + 1) * SLOTS_PER_DAY)


def window_days(diag_day: int, cfg: TracingConfig = DEFAULT_CONFIG) -> range:
    """Days covered by a report from a patient diagnosed on diag_day."""
    return range(max(0, diag_day - cfg.window_days + 1), diag_day + 1)


@dataclass(slots=True)
class EncounterRecord:
    """One slot's worth of a qualifying reception.

    beacon is the canonical bytes of the peer's beacon for that slot;
    shared/ordered are filled for agreed-token protocols only.
    """

    slot: int
    minutes: int
    beacon: bytes
    shared: Optional[bytes] = None
    ordered: Optional[bytes] = None

    @property
    def day(self) -> int:
        return self.slot // SLOTS_PER_DAY


@dataclass
class UserState:
    user_id: int
    seed: bytes
    adopter: bool = True
    records: list[EncounterRecord] = field(default_factory=list)
    household_seeds: tuple[bytes, ...] = ()
    diagnosed_day: Optional[int] = None
    risk_minutes: int = 0
    matched_slots: list[tuple[int, int]] = field(default_factory=list)
    dropped_malformed: int = 0
    suppressed_receptions: int = 0
    ripsi_blind: Optional[Scalar] = None
    beacon_memo: dict[int, bytes] = field(default_factory=dict)

    def diagnosed_by(self, day: int) -> bool:
        return self.diagnosed_day is not None and self.diagnosed_day <= day


@dataclass(slots=True)
class ReportEntry:
    """One token of a patient report or user upload.

    slot is present whenever the token is slot-scoped; minutes carry the
    recorded session duration for risk aggregation; extra holds the second
    element of two-part tokens (randomized receipts).
    """

    payload: bytes
    slot: Optional[int] = None
    minutes: Optional[int] = None
    day: Optional[int] = None
    extra: Optional[bytes] = None

    def wire_size(self) -> int:
        size = len(self.payload) + (len(self.extra) if self.extra else 0)
        return size + 4 + 2  # slot/day index and minutes field


@dataclass
class Report:
    patient: int
    day: int
    protocol: str
    entries: tuple[ReportEntry, ...]

    def token_units(self) -> int:
        return len(self.entries)

    def wire_size(self) -> int:
        return 8 + sum(e.wire_size() for e in self.entries)


@dataclass
class Upload:
    user: int
    day: int
    entries: tuple[ReportEntry, ...] = ()
    units: Optional[int] = None  # counted units when entries are not materialized

    def token_units(self) -> int:
        return self.units if self.units is not None else len(self.entries)


@dataclass
class RateLimitConfig:
    per_patient_exposure_cap: int = 50
    per_report_size_cap: int = 4096
    per_user_device_cap: int = 30


@dataclass
class ServerState:
    spec: ProtocolSpec
    group: GroupDesc
    issue_key: bytes = b"\x00server"
    registry: dict[bytes, tuple[int, int]] = field(default_factory=dict)
    latest_uploads: dict[int, Upload] = field(default_factory=dict)
    sdh_index: dict[tuple[int, bytes], list[tuple[int, int]]] = field(default_factory=dict)
    ripsi_sent: dict[int, dict[int, bytes]] = field(default_factory=dict)
    patient_tokens: list[tuple[int, bytes, int, int, int]] = field(default_factory=list)
    rate_limits: RateLimitConfig = field(default_factory=RateLimitConfig)
    patient_report_sizes: dict[int, int] = field(default_factory=dict)
    patient_report_days: dict[int, int] = field(default_factory=dict)
    patient_victims: dict[int, set[int]] = field(default_factory=dict)
    rejected_report_tokens: int = 0
    embedding: object = None
    psi_secret: Optional[Scalar] = None

    def matching_snapshot(self) -> tuple:
        """Hashable summary of matching state, used to show that honest
        query-and-discard rounds leave the server unchanged."""
        return (
            tuple(sorted(self.latest_uploads)),
            tuple(sorted((k, tuple(v)) for k, v in self.sdh_index.items())),
            tuple(self.patient_tokens),
        )
