"""The per-phase behavior every protocol shares: beacons, reception,
reports, periodic uploads, and record retention.

Beacon shapes follow the design grid. PRF protocols broadcast H(seed, t),
with the seed swapped for a derived daily seed when that feature is on.
Group protocols broadcast g^x with x = H(seed, t). The server-issued
variant takes its beacons from a registry keyed by (user, slot).
"""

from __future__ import annotations

import random

from ..crypto.prf import prf, encode_u32
from ..crypto.group import (
    GroupDesc,
    GroupError,
    derive_scalar,
    dh_shared,
    generator_exp,
)
from ..crypto.tokens import ordered_token, randomized_receipt
from .spec import ProtocolSpec, ReportKind, Matcher, ProtocolId
from .state import (
    SLOTS_PER_DAY,
    TracingConfig,
    DEFAULT_CONFIG,
    EncounterRecord,
    Report,
    ReportEntry,
    ServerState,
    Upload,
    UserState,
    day_slots,
    slot_day,
    window_days,
)

_DAY_SEED_DOMAIN = b"day-seed"


def daily_seed(seed: bytes, day: int) -> bytes:
    """Per-day seed from which the whole day's beacons derive."""
    return prf(seed, _DAY_SEED_DOMAIN + encode_u32(day))


def _prf_beacon(seed: bytes, slot: int) -> bytes:
    return prf(seed, encode_u32(slot))


def beacon_bytes_for(
    spec: ProtocolSpec,
    seed: bytes,
    slot: int,
    group: GroupDesc,
    server: ServerState | None = None,
    user_id: int | None = None,
) -> bytes:
    """Canonical bytes of the beacon a seed produces at a slot."""
    if spec.server_issued_beacons:
        if server is None or user_id is None:
            raise ValueError("server-issued beacons need the issuing server")
        return server_issued_beacon(server, user_id, slot)
    if spec.group_beacons:
        return generator_exp(group, derive_scalar(seed, slot, group)).to_bytes()
    if spec.daily_seed:
        return _prf_beacon(daily_seed(seed, slot_day(slot)), slot)
    return _prf_beacon(seed, slot)


def beacon_for_slot(
    spec: ProtocolSpec,
    user: UserState,
    slot: int,
    group: GroupDesc,
    server: ServerState | None = None,
) -> bytes:
    return beacon_bytes_for(spec, user.seed, slot, group, server, user.user_id)


def server_issued_beacon(server: ServerState, user_id: int, slot: int) -> bytes:
    """Beacon the server provisioned for (user, slot); registry records it."""
    beacon = prf(server.issue_key, encode_u32(user_id) + encode_u32(slot))
    if beacon not in server.registry:
        server.registry[beacon] = (user_id, slot)
    return beacon


def record_reception(
    spec: ProtocolSpec,
    user: UserState,
    beacon: bytes,
    slot: int,
    distance_m: float,
    minutes: int,
    session_minutes: int,
    group: GroupDesc,
    cfg: TracingConfig = DEFAULT_CONFIG,
    ignore_constraints: bool = False,
) -> bool:
    """Store one slot's reception if the encounter qualifies.

    Receptions are dropped when outside the proximity threshold, when the
    whole session stays under the minimum duration, or when the beacon is
    recognizably a household peer's. Malformed wire values are dropped and
    counted. ignore_constraints models a device that skips the distance and
    duration checks on purpose.
    """
    if not ignore_constraints:
        if distance_m > cfg.proximity_meters:
            return False
        if session_minutes < cfg.min_session_minutes:
            return False
    for hh_seed in user.household_seeds:
        if beacon == beacon_bytes_for(spec, hh_seed, slot, group):
            return False

    shared_b = ordered_b = None
    if spec.group_beacons:
        try:
            their = group.decode(beacon)
        except GroupError:
            user.dropped_malformed += 1
            return False
        if spec.report_kind is ReportKind.AGREED:
            mine_scalar = derive_scalar(user.seed, slot, group)
            mine = generator_exp(group, mine_scalar)
            if mine == their:
                user.dropped_malformed += 1
                return False
            shared = dh_shared(mine_scalar, their)
            shared_b = shared.to_bytes()
            ordered_b = ordered_token(shared, mine, their)

    user.records.append(
        EncounterRecord(slot=slot, minutes=minutes, beacon=beacon, shared=shared_b, ordered=ordered_b)
    )
    return True


def prune_expired_records(user: UserState, today: int, cfg: TracingConfig = DEFAULT_CONFIG) -> None:
    """Retention pass: forget records older than the retention window."""
    cutoff = today - cfg.retention_days + 1
    if any(r.day < cutoff for r in user.records):
        user.records = [r for r in user.records if r.day >= cutoff]


def aggregate_exposure(
    matched: list[tuple[int, int]], cfg: TracingConfig = DEFAULT_CONFIG
) -> tuple[int, bool]:
    """Total risk over matched (slot, minutes) pairs and the exposed flag.

    Aggregation spans beacon rotations and intermittent sessions: every
    qualifying matched record contributes its minutes, and the threshold
    applies to the sum.
    """
    risk = sum(m for _, m in matched)
    return risk, risk >= cfg.exposure_minutes


def patient_report(
    spec: ProtocolSpec,
    user: UserState,
    diag_day: int,
    group: GroupDesc,
    rng: random.Random,
    cfg: TracingConfig = DEFAULT_CONFIG,
    server: ServerState | None = None,
    pad_to: int = 0,
) -> Report:
    """Build the diagnosis-day report for the infectious window.

    Sent kinds report the patient's own beacons (or daily seeds); received
    kinds report stored peer material, randomized for the re-blinding
    variant; agreed kinds report the raw shared elements. pad_to appends
    junk entries, used only by the resource-exhaustion attack.
    """
    days = window_days(diag_day, cfg)
    entries: list[ReportEntry] = []

    if spec.report_kind is ReportKind.SENT:
        if spec.daily_seed:
            for d in days:
                entries.append(ReportEntry(payload=daily_seed(user.seed, d), day=d))
        else:
            for d in days:
                for slot in day_slots(d):
                    entries.append(
                        ReportEntry(
                            payload=beacon_for_slot(spec, user, slot, group, server)
                        )
                    )
    else:
        in_window = [r for r in user.records if r.day in days]
        for rec in in_window:
            if spec.report_kind is ReportKind.AGREED:
                entries.append(ReportEntry(payload=rec.shared, slot=rec.slot, minutes=rec.minutes))
            elif spec.id is ProtocolId.RECEIVED_USER_CLEVERPARROT:
                u, v = randomized_receipt(group.decode(rec.beacon), rng)
                entries.append(
                    ReportEntry(payload=u.to_bytes(), extra=v.to_bytes(), slot=rec.slot, minutes=rec.minutes)
                )
            else:
                entries.append(ReportEntry(payload=rec.beacon, slot=rec.slot, minutes=rec.minutes))

    while len(entries) < pad_to:
        junk = prf(user.seed, b"junk" + encode_u32(len(entries)))
        entries.append(ReportEntry(payload=junk, slot=0, minutes=0, day=0))

    return Report(patient=user.user_id, day=diag_day, protocol=spec.id.value, entries=tuple(entries))


def user_periodic_upload(
    spec: ProtocolSpec,
    user: UserState,
    day: int,
    group: GroupDesc,
    cfg: TracingConfig = DEFAULT_CONFIG,
) -> Upload | None:
    """Daily upload for server-matching designs; None elsewhere.

    Conventions, chosen to make the cost ledger line up with the per-day
    accounting: the sent-server design re-uploads the retained window of
    received beacons each day; the server-issued design re-syncs the
    beacon window (counted, not materialized, since the server already
    holds the registry); the agreed-server design uploads only tokens that
    are new today.
    """
    if spec.matcher is not Matcher.SERVER:
        return None
    if spec.id is ProtocolId.SENT_SERVER:
        entries = tuple(
            ReportEntry(payload=r.beacon, slot=r.slot, minutes=r.minutes)
            for r in user.records
        )
        return Upload(user=user.user_id, day=day, entries=entries)
    if spec.id is ProtocolId.RECEIVED_SERVER:
        return Upload(user=user.user_id, day=day, units=cfg.window_days * SLOTS_PER_DAY)
    if spec.id is ProtocolId.AGREED_SERVER:
        entries = tuple(
            ReportEntry(payload=r.ordered, slot=r.slot, minutes=r.minutes)
            for r in user.records
            if r.day == day
        )
        return Upload(user=user.user_id, day=day, entries=entries)
    raise ValueError(f"no upload rule for {spec.id}")
