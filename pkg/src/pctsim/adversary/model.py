"""Adversary taxonomy: who they are, what they can do, what they see.

User-side adversaries range from a basic app user to one running active
surveillance hardware; server-side adversaries combine everything the
server legitimately receives with passive or active surveillance feeds.
Passive kinds only listen; active kinds also broadcast, which is what
lets them engage protocols and compute agreed tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class AdversaryKind(str, Enum):
    BASIC_USER = "basic-user"
    ADVANCED_USER = "advanced-user"
    USER_PSV = "user-psv"
    USER_ASV = "user-asv"
    SERVER_ALONE = "server-alone"
    SERVER_PSV = "server-psv"
    SERVER_ASV = "server-asv"

    @property
    def surveils(self) -> bool:
        return self in (
            AdversaryKind.USER_PSV,
            AdversaryKind.USER_ASV,
            AdversaryKind.SERVER_PSV,
            AdversaryKind.SERVER_ASV,
        )

    @property
    def active(self) -> bool:
        return self in (AdversaryKind.USER_ASV, AdversaryKind.SERVER_ASV)

    @property
    def server_side(self) -> bool:
        return self in (
            AdversaryKind.SERVER_ALONE,
            AdversaryKind.SERVER_PSV,
            AdversaryKind.SERVER_ASV,
        )


class AttackId(str, Enum):
    DRIVE_BY_EAVESDROP = "drive-by-eavesdrop"
    HIGH_POWER_BROADCAST = "high-power-broadcast"
    HIGH_POWER_DEVICE = "high-power-device"
    SAME_BEACON = "same-beacon"
    POOLING = "pooling"
    TUNNELING = "tunneling"
    FORWARDING = "forwarding"
    RESOURCE_EXHAUSTION = "resource-exhaustion"

    @property
    def super_patient(self) -> bool:
        """Attacks that concentrate false exposures on attacker-controlled
        patient accounts; the others relay benign traffic and spread the
        effect across benign patients, which server-side caps cannot
        attribute."""
        return self in (
            AttackId.DRIVE_BY_EAVESDROP,
            AttackId.HIGH_POWER_BROADCAST,
            AttackId.HIGH_POWER_DEVICE,
            AttackId.SAME_BEACON,
            AttackId.POOLING,
            AttackId.RESOURCE_EXHAUSTION,
        )


@dataclass(frozen=True)
class AdversaryConfig:
    kind: AdversaryKind
    sniffer_cells: tuple[int, ...] = ()
    colluders: tuple[int, ...] = ()
    attack: Optional[AttackId] = None

    def __post_init__(self):
        if self.kind.surveils and not self.sniffer_cells:
            raise ValueError(f"{self.kind.value} needs at least one sniffer cell")
        if not self.kind.surveils and self.sniffer_cells:
            raise ValueError(f"{self.kind.value} cannot field sniffers")


@dataclass
class AdversaryView:
    """Everything one adversary observed during a run.

    observed holds sniffed (cell, slot, beacon) triples; own_secrets the
    exponents behind active-surveillance broadcasts, keyed by (cell, slot).
    server_side is the malicious-server transcript (reports, uploads,
    queries, registry); pool/app_outcomes are what a user-side adversary's
    own device received. Passive kinds never broadcast, so their
    own_secrets stay empty by construction.
    """

    kind: AdversaryKind
    observed: tuple[tuple[int, int, bytes], ...] = ()
    own_secrets: dict[tuple[int, int], int] = field(default_factory=dict)
    own_beacons: dict[tuple[int, int], bytes] = field(default_factory=dict)
    server_side: Optional[object] = None
    pools: dict[int, tuple] = field(default_factory=dict)
    adversary_user: Optional[int] = None
    app_outcomes: tuple = ()


@dataclass
class LeakageReport:
    """Per-(protocol, adversary) leakage metrics, scored against ground truth."""

    protocol: str
    adversary: str
    trace_link_fraction: float = 0.0
    interaction_edges: dict[str, tuple[float, float]] = field(default_factory=dict)
    exposure_slots_recovered: float = 0.0
    probe_queries: int = 0
    exposure_status_match: float = 0.0
