"""Exposure discovery: pool publication, local matching, server matching,
and the interactive rounds, dispatched per protocol.

Each day the engine ingests the day's patient reports and calls
match_round once. User-matching designs publish a merged pool and let every
device match locally; server-matching designs match reports against stored
uploads and push back a bare risk number; interactive designs run their
sub-protocol per user. Matched risk accumulates per user across days, and
the exposure flag is the aggregate threshold.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..crypto.prf import prf, encode_u32
from ..crypto.group import (
    GroupDesc,
    GroupError,
    Scalar,
    derive_scalar,
    group_exp,
)
from ..crypto.tokens import ordered_token_pair
from ..crypto.cuckoo import cuckoo_build
from .spec import ProtocolSpec, ProtocolId, Matcher
from .state import (
    SLOT_MINUTES,
    Report,
    ServerState,
    TracingConfig,
    UserState,
    day_slots,
)
from .phases import beacon_bytes_for
from .interactive import PsiCaServer, RipsiBatch, psi_ca_round, ri_psi_round


@dataclass(slots=True)
class UserMatchOutcome:
    """What a locally-matching device learns: risk plus which stored
    records matched, hence their slots."""

    risk_minutes: int
    matched: tuple[tuple[int, int], ...]


@dataclass(slots=True)
class ServerRiskNotice:
    """What a server-matching design shows the user: one number."""

    risk_minutes: int


@dataclass(slots=True)
class CardinalityOutcome:
    """The cardinality-protocol client learns only the match count, which
    with minute-granular items is the matched minutes."""

    risk_minutes: int


@dataclass(slots=True)
class DesireOutcome:
    risk_minutes: int


@dataclass(slots=True)
class RipsiOutcome:
    risk_minutes: int
    patient_count: int
    batch_sizes: tuple[int, ...]


@dataclass
class CostCounters:
    """Token-unit and comparison-op tallies, bucketed per day."""

    per_day: dict[int, dict[str, int]] = field(default_factory=dict)
    active_users: dict[int, int] = field(default_factory=dict)
    match_users: dict[int, int] = field(default_factory=dict)
    patient_units: list[tuple[int, int, int]] = field(default_factory=list)

    def add(self, day: int, key: str, units: int) -> None:
        bucket = self.per_day.setdefault(day, {})
        bucket[key] = bucket.get(key, 0) + units

    def day_value(self, day: int, key: str) -> int:
        return self.per_day.get(day, {}).get(key, 0)


def minute_items(beacon: bytes, minutes: int) -> list[bytes]:
    """Minute-granular item digests for cardinality matching: one item per
    minute of the slot, so an intersection count is a minute count."""
    return [beacon + bytes([i]) for i in range(min(minutes, SLOT_MINUTES))]


# ---------------------------------------------------------------------------
# Published pools for user-matching designs


def publish_pool(spec: ProtocolSpec, reports: list[Report], group: GroupDesc) -> tuple:
    """Merge the day's patient reports into the downloadable pool.

    The pool is sorted, which both fixes the bytes for determinism and
    destroys per-patient grouping (the mixing countermeasure). For the
    received-basic design, identical tokens reported by several patients
    are collapsed with their minutes summed, so the published set never
    contains a duplicate; sent beacons and agreed tokens are patient- or
    pair-scoped and need no merging.
    """
    if spec.daily_seed:
        seeds = sorted((e.day, e.payload) for r in reports for e in r.entries)
        expanded = set()
        for d, seed in seeds:
            for slot in day_slots(d):
                expanded.add(prf(seed, encode_u32(slot)))
        if spec.cuckoo:
            return ("cuckoo", tuple(seeds), cuckoo_build(expanded))
        return ("seeds", tuple(seeds), frozenset(expanded))
    if spec.id is ProtocolId.SENT_USER_BASIC:
        beacons = tuple(sorted({e.payload for r in reports for e in r.entries}))
        return ("beacons", beacons, frozenset(beacons))
    if spec.id is ProtocolId.RECEIVED_USER_BASIC:
        merged: dict[bytes, int] = {}
        slots: dict[bytes, int] = {}
        for r in reports:
            for e in r.entries:
                merged[e.payload] = merged.get(e.payload, 0) + (e.minutes or 0)
                slots[e.payload] = e.slot
        return ("received", tuple((slots[b], b, m) for b, m in sorted(merged.items())))
    if spec.id is ProtocolId.RECEIVED_USER_CLEVERPARROT:
        entries = sorted(
            (e.slot, e.payload, e.extra, e.minutes) for r in reports for e in r.entries
        )
        return ("receipts", tuple(entries))
    if spec.id is ProtocolId.AGREED_USER:
        entries = tuple(sorted((e.slot, e.payload, e.minutes) for r in reports for e in r.entries))
        return ("agreed", entries, frozenset((slot, payload) for slot, payload, _m in entries))
    raise ValueError(f"no pool for {spec.id}")


def pool_units(pool: tuple) -> int:
    return len(pool[1])


def _match_local(
    spec: ProtocolSpec,
    user: UserState,
    pool: tuple,
    group: GroupDesc,
    counters: CostCounters,
    day: int,
) -> UserMatchOutcome:
    matched: list[tuple[int, int]] = []
    kind = pool[0]
    if kind == "beacons":
        pool_set = pool[2]
        for rec in user.records:
            if rec.beacon in pool_set:
                matched.append((rec.slot, rec.minutes))
        counters.add(day, "user_comp", len(user.records) * len(pool[1]))
    elif kind in ("seeds", "cuckoo"):
        members = pool[2]
        for rec in user.records:
            if rec.beacon in members:
                matched.append((rec.slot, rec.minutes))
        counters.add(day, "user_comp", len(user.records) * len(pool[1]) * 144)
    elif kind == "received":
        # Look up each pool token against the user's own beacon for its
        # slot; beacons are memoized since they are pure in (seed, slot).
        memo = user.beacon_memo
        for slot, payload, minutes in pool[1]:
            mine = memo.get(slot)
            if mine is None:
                mine = memo[slot] = beacon_bytes_for(spec, user.seed, slot, group)
            if mine == payload:
                matched.append((slot, minutes))
        counters.add(day, "user_comp", len(pool[1]) * 144 * 14)
    elif kind == "receipts":
        for slot, u_b, v_b, minutes in pool[1]:
            if u_b is None or v_b is None:
                continue
            try:
                u_elem = group.decode(u_b)
            except GroupError:
                continue
            x = derive_scalar(user.seed, slot, group)
            if group_exp(u_elem, x).to_bytes() == v_b:
                matched.append((slot, minutes))
        counters.add(day, "user_comp", len(pool[1]) * 144 * 14)
    elif kind == "agreed":
        pool_set = pool[2]
        for rec in user.records:
            if (rec.slot, rec.shared) in pool_set:
                matched.append((rec.slot, rec.minutes))
        counters.add(day, "user_comp", len(user.records) * len(pool[1]))
    else:
        raise ValueError(kind)
    risk = sum(m for _, m in matched)
    return UserMatchOutcome(risk_minutes=risk, matched=tuple(matched))


# ---------------------------------------------------------------------------
# Server matching


def _match_sent_server(
    server: ServerState,
    reports: list[Report],
    users: list[UserState],
    counters: CostCounters,
    day: int,
) -> dict[int, int]:
    risks: dict[int, int] = {}
    for report in reports:
        pool = {e.payload for e in report.entries}
        for user in users:
            upload = server.latest_uploads.get(user.user_id)
            if upload is None:
                continue
            gained = sum(e.minutes for e in upload.entries if e.payload in pool)
            counters.add(day, "server_comp", len(upload.entries) * len(pool))
            if gained:
                risks[user.user_id] = risks.get(user.user_id, 0) + gained
                server.patient_victims.setdefault(report.patient, set()).add(user.user_id)
    return risks


def _match_received_server(
    server: ServerState,
    reports: list[Report],
    counters: CostCounters,
    day: int,
) -> dict[int, int]:
    risks: dict[int, int] = {}
    for report in reports:
        for e in report.entries:
            hit = server.registry.get(e.payload)
            if hit is None:
                continue
            uid, _slot = hit
            if uid == report.patient:
                continue
            risks[uid] = risks.get(uid, 0) + (e.minutes or 0)
            server.patient_victims.setdefault(report.patient, set()).add(uid)
        counters.add(day, "server_comp", len(report.entries) * 144 * 14)
    return risks


def sdh_match(
    server: ServerState,
    report: Report,
    counters: CostCounters | None = None,
    day: int = 0,
) -> dict[int, int]:
    """Match one agreed-token patient report against stored user tokens.

    The server recomputes both ordered digests from each reported shared
    element, so matching works whichever side of the lexicographic order
    the storing user was on. The patient's own stored token is excluded by
    account, so a report never exposes its own author. Malformed report
    tokens are rejected and counted.
    """
    risks: dict[int, int] = {}
    for e in report.entries:
        try:
            shared = server.group.decode(e.payload)
        except GroupError:
            server.rejected_report_tokens += 1
            continue
        for digest in ordered_token_pair(shared):
            for uid, minutes in server.sdh_index.get((e.slot, digest), ()):
                if uid == report.patient:
                    continue
                risks[uid] = risks.get(uid, 0) + minutes
                server.patient_victims.setdefault(report.patient, set()).add(uid)
        if counters is not None:
            counters.add(day, "server_comp", 2 * max(1, len(server.sdh_index)))
    return risks


def desire_day_index(server: ServerState, day: int) -> dict[tuple[int, bytes], list[int]]:
    """Index the day's new patient tokens by every digest they can match."""
    index: dict[tuple[int, bytes], list[int]] = {}
    for slot, shared_b, _minutes, patient, report_day in server.patient_tokens:
        if report_day != day:
            continue
        try:
            shared = server.group.decode(shared_b)
        except GroupError:
            server.rejected_report_tokens += 1
            continue
        for digest in ordered_token_pair(shared):
            index.setdefault((slot, digest), []).append(patient)
    return index


def desire_query(
    server: ServerState,
    user: UserState,
    day: int,
    counters: CostCounters | None = None,
    day_index: dict[tuple[int, bytes], list[int]] | None = None,
) -> DesireOutcome:
    """Answer one query against the day's new patient tokens.

    The query re-sends every retained token. With the store policy set to
    discard, answering leaves the server's matching state untouched
    (matching_snapshot pins this in tests); only the returned aggregate
    risk crosses back to the user.
    """
    if day_index is None:
        day_index = desire_day_index(server, day)
    risk = 0
    for rec in user.records:
        if rec.ordered is None:
            continue
        patients = [
            p for p in day_index.get((rec.slot, rec.ordered), ()) if p != user.user_id
        ]
        if patients:
            risk += rec.minutes
            for patient in patients:
                server.patient_victims.setdefault(patient, set()).add(user.user_id)
    if counters is not None:
        counters.add(day, "user_upload_match", len(user.records))
        counters.add(day, "server_comp", len(user.records))
    return DesireOutcome(risk_minutes=risk)


# ---------------------------------------------------------------------------
# Round dispatch


def match_round(
    spec: ProtocolSpec,
    server: ServerState,
    users: list[UserState],
    reports: list[Report],
    day: int,
    group: GroupDesc,
    cfg: TracingConfig,
    rng: random.Random,
    counters: CostCounters,
    runlog=None,
) -> dict[int, object]:
    """Run one day's exposure discovery for every active user.

    users must already exclude non-adopters and diagnosed accounts. The
    result maps user id to the protocol-shaped outcome; honest-setting
    risks accumulate to exactly what the ground-truth oracle derives.
    """
    outcomes: dict[int, object] = {}

    if spec.matcher is Matcher.USER:
        if not reports:
            return outcomes
        pool = publish_pool(spec, reports, group)
        if runlog is not None:
            runlog.pools[day] = pool
        units = pool_units(pool)
        for user in users:
            counters.add(day, "user_download", units)
            outcomes[user.user_id] = _match_local(spec, user, pool, group, counters, day)
        return outcomes

    if spec.matcher is Matcher.SERVER:
        if spec.id is ProtocolId.SENT_SERVER:
            risks = _match_sent_server(server, reports, users, counters, day)
        elif spec.id is ProtocolId.RECEIVED_SERVER:
            risks = _match_received_server(server, reports, counters, day)
        else:
            risks = {}
            for report in reports:
                for uid, gained in sdh_match(server, report, counters, day).items():
                    risks[uid] = risks.get(uid, 0) + gained
        active = {u.user_id for u in users}
        for uid in sorted(risks):
            if uid in active:
                outcomes[uid] = ServerRiskNotice(risk_minutes=risks[uid])
        return outcomes

    if spec.id is ProtocolId.SENT_INTERACTIVE:
        if not reports:
            return outcomes
        items = []
        for report in reports:
            for e in report.entries:
                for item in minute_items(e.payload, SLOT_MINUTES):
                    items.append(server.embedding.embed(item))
        psi_server = PsiCaServer(group, items, server.psi_secret)
        counters.add(day, "server_comp", len(items))
        for user in users:
            user_items = [
                server.embedding.embed(item)
                for rec in user.records
                for item in minute_items(rec.beacon, rec.minutes)
            ]
            round_rng = random.Random(rng.randrange(2**63))
            count = psi_ca_round(psi_server, user_items, round_rng)
            counters.add(day, "user_upload_match", len(user_items))
            counters.add(day, "user_download", len(items) + len(user_items))
            counters.add(day, "user_comp", 2 * len(user_items))
            if runlog is not None:
                runlog.psi_queries.append((user.user_id, day, len(user_items)))
            outcomes[user.user_id] = CardinalityOutcome(risk_minutes=count)
        return outcomes

    if spec.id is ProtocolId.RECEIVED_INTERACTIVE:
        round_secret = Scalar(
            int.from_bytes(prf(server.issue_key, b"round" + encode_u32(day)), "big")
            % (group.q - 1)
            + 1,
            group,
        )
        batches: list[RipsiBatch] = []
        for report in reports:
            items = []
            for e in report.entries:
                try:
                    elem = group.decode(e.payload)
                except GroupError:
                    server.rejected_report_tokens += 1
                    continue
                items.append((e.slot, group_exp(elem, round_secret).to_bytes(), e.minutes))
            batches.append(RipsiBatch(patient=report.patient, items=items))
        counters.add(day, "server_comp", sum(len(b.items) for b in batches))
        for user in users:
            stored = server.ripsi_sent.get(user.user_id, {})
            round_rng = random.Random(rng.randrange(2**63))
            risk, n_patients, sizes, _matched = ri_psi_round(
                group, batches, user.ripsi_blind, stored, round_secret, round_rng
            )
            counters.add(day, "user_upload_match", sum(sizes))
            counters.add(day, "user_download", sum(sizes))
            counters.add(day, "user_comp", sum(sizes))
            outcomes[user.user_id] = RipsiOutcome(
                risk_minutes=risk, patient_count=n_patients, batch_sizes=tuple(sizes)
            )
        return outcomes

    if spec.id is ProtocolId.AGREED_INTERACTIVE:
        day_index = desire_day_index(server, day)
        before = server.matching_snapshot()
        for user in users:
            outcome = desire_query(server, user, day, counters, day_index)
            if runlog is not None:
                runlog.queries.append(
                    (
                        user.user_id,
                        day,
                        tuple((r.slot, r.ordered, r.minutes) for r in user.records),
                    )
                )
            outcomes[user.user_id] = outcome
        assert server.matching_snapshot() == before
        return outcomes

    raise ValueError(f"no matcher for {spec.id}")
