"""Server-side and user-side rate limiting.

The server-side defense caps what one patient account can cause: either
the number of users her report exposes (visible when the server does the
matching) or the size of her report (meaningful when reports carry one
token per encounter, i.e. received and agreed designs). Sent-report
designs with user or interactive matching expose neither signal, so the
defense is structurally unavailable there and the finding says so.

The user-side defense caps how many distinct beacon streams a device will
accept per slot; the engine enforces it when a scenario sets
user_device_cap, and suppression counts surface on the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..protocol.spec import Matcher, ProtocolId, ReportKind
from ..protocol.state import SLOTS_PER_DAY, RateLimitConfig, ServerState, window_days


@dataclass
class RateLimitFinding:
    applicable: bool
    reason: str
    flagged: set[int] = field(default_factory=set)
    oversize: set[int] = field(default_factory=set)
    exposure_counts: dict[int, int] = field(default_factory=dict)


def server_rate_limit(server: ServerState, caps: RateLimitConfig | None = None) -> RateLimitFinding:
    """Evaluate the caps against every patient report the server ingested."""
    spec = server.spec
    caps = caps or server.rate_limits
    size_observable = spec.report_kind in (ReportKind.RECEIVED, ReportKind.AGREED)
    count_observable = spec.matcher is Matcher.SERVER or spec.id is ProtocolId.AGREED_INTERACTIVE

    finding = RateLimitFinding(
        applicable=size_observable or count_observable,
        reason=(
            "per-encounter report tokens or server-side match counts available"
            if size_observable or count_observable
            else "sent-beacon reports are fixed-size and matching is invisible to the server"
        ),
    )
    finding.exposure_counts = {
        patient: len(victims) for patient, victims in server.patient_victims.items()
    }

    for patient, size in server.patient_report_sizes.items():
        if spec.report_kind is ReportKind.SENT:
            # Sent reports have a structural size (the beacon window, or one
            # seed per day); anything beyond it is junk the server rejects.
            days = len(window_days(server.patient_report_days.get(patient, 0)))
            expected = days if spec.daily_seed else days * SLOTS_PER_DAY
            if size > expected:
                finding.oversize.add(patient)
        elif size > caps.per_report_size_cap:
            finding.oversize.add(patient)
            if size_observable:
                finding.flagged.add(patient)
    if count_observable:
        for patient, count in finding.exposure_counts.items():
            if count > caps.per_patient_exposure_cap:
                finding.flagged.add(patient)
    return finding


def user_rate_limit_applies(result, cap: int) -> dict[int, int]:
    """Suppression events per user from a run with the device cap enabled."""
    return {
        uid: user.suppressed_receptions
        for uid, user in result.users.items()
        if user.suppressed_receptions
    }
