"""The protocol design grid: what patients report x who does the matching.

Eleven concrete designs cover the grid. Each ProtocolSpec pins down the
beacon construction, the patient report content, the optional user upload,
and the matching style; everything downstream dispatches on these fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ProtocolId(str, Enum):
    SENT_USER_BASIC = "sent-user-basic"
    SENT_USER_DAILY = "sent-user-daily"
    SENT_INTERACTIVE = "sent-interactive"
    SENT_SERVER = "sent-server"
    RECEIVED_USER_BASIC = "received-user-basic"
    RECEIVED_USER_CLEVERPARROT = "received-user-cleverparrot"
    RECEIVED_INTERACTIVE = "received-interactive"
    RECEIVED_SERVER = "received-server"
    AGREED_USER = "agreed-user"
    AGREED_INTERACTIVE = "agreed-interactive"
    AGREED_SERVER = "agreed-server-sdh"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


class ReportKind(Enum):
    SENT = "sent"
    RECEIVED = "received"
    AGREED = "agreed"


class Matcher(Enum):
    USER = "user"
    SERVER = "server"
    INTERACTIVE = "interactive"


@dataclass(frozen=True)
class ProtocolSpec:
    """One cell of the design grid plus its feature toggles.

    group_beacons: beacons are group elements g^x rather than PRF digests.
    daily_seed: beacons of one day derive from a reportable per-day seed.
    cuckoo: the published patient pool is a cuckoo filter (daily-seed only).
    query_and_discard: the server answers queries without storing them.
    server_issued_beacons: the server provisions every (user, slot) beacon
    and can therefore map beacons back to accounts.
    """

    id: ProtocolId
    report_kind: ReportKind
    matcher: Matcher
    group_beacons: bool = False
    daily_seed: bool = False
    cuckoo: bool = False
    query_and_discard: bool = False
    server_issued_beacons: bool = False

    def __post_init__(self):
        if self.daily_seed and not (
            self.report_kind is ReportKind.SENT and self.matcher is Matcher.USER
        ):
            raise ValueError("daily seeds only make sense for sent-user designs")
        if self.cuckoo and not self.daily_seed:
            raise ValueError("cuckoo matching requires daily seeds")
        if self.query_and_discard and self.matcher is not Matcher.INTERACTIVE:
            raise ValueError("query-and-discard is an interactive-matching feature")


_TABLE: dict[ProtocolId, ProtocolSpec] = {
    ProtocolId.SENT_USER_BASIC: ProtocolSpec(
        ProtocolId.SENT_USER_BASIC, ReportKind.SENT, Matcher.USER
    ),
    ProtocolId.SENT_USER_DAILY: ProtocolSpec(
        ProtocolId.SENT_USER_DAILY, ReportKind.SENT, Matcher.USER, daily_seed=True
    ),
    ProtocolId.SENT_INTERACTIVE: ProtocolSpec(
        ProtocolId.SENT_INTERACTIVE, ReportKind.SENT, Matcher.INTERACTIVE
    ),
    ProtocolId.SENT_SERVER: ProtocolSpec(
        ProtocolId.SENT_SERVER, ReportKind.SENT, Matcher.SERVER
    ),
    ProtocolId.RECEIVED_USER_BASIC: ProtocolSpec(
        ProtocolId.RECEIVED_USER_BASIC, ReportKind.RECEIVED, Matcher.USER
    ),
    ProtocolId.RECEIVED_USER_CLEVERPARROT: ProtocolSpec(
        ProtocolId.RECEIVED_USER_CLEVERPARROT,
        ReportKind.RECEIVED,
        Matcher.USER,
        group_beacons=True,
    ),
    ProtocolId.RECEIVED_INTERACTIVE: ProtocolSpec(
        ProtocolId.RECEIVED_INTERACTIVE,
        ReportKind.RECEIVED,
        Matcher.INTERACTIVE,
        group_beacons=True,
    ),
    ProtocolId.RECEIVED_SERVER: ProtocolSpec(
        ProtocolId.RECEIVED_SERVER,
        ReportKind.RECEIVED,
        Matcher.SERVER,
        server_issued_beacons=True,
    ),
    ProtocolId.AGREED_USER: ProtocolSpec(
        ProtocolId.AGREED_USER, ReportKind.AGREED, Matcher.USER, group_beacons=True
    ),
    ProtocolId.AGREED_INTERACTIVE: ProtocolSpec(
        ProtocolId.AGREED_INTERACTIVE,
        ReportKind.AGREED,
        Matcher.INTERACTIVE,
        group_beacons=True,
        query_and_discard=True,
    ),
    ProtocolId.AGREED_SERVER: ProtocolSpec(
        ProtocolId.AGREED_SERVER, ReportKind.AGREED, Matcher.SERVER, group_beacons=True
    ),
}

ALL_PROTOCOLS: tuple[ProtocolId, ...] = tuple(_TABLE)


def instantiate(protocol: ProtocolId | str) -> ProtocolSpec:
    """Look up the spec for a protocol by id or stable string name."""
    if isinstance(protocol, str):
        try:
            protocol = ProtocolId(protocol)
        except ValueError:
            raise ValueError(f"unknown protocol name {protocol!r}") from None
    return _TABLE[protocol]
