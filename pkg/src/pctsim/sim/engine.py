"""The deterministic simulation engine.

One run advances day by day: encounter sessions turn into per-slot beacon
receptions (gated by adoption and per-direction loss), records are pruned
to the retention window, server-matching designs ingest daily uploads,
diagnosis-day reports are filed, and the day's match round distributes
exposure results. Surveillance adversaries collect beacon observations
along the way, and an optional attack plan injects malicious behavior.

Everything is a pure function of (scenario, world, attack plan): rng
streams are derived from the scenario seed per concern, so re-runs are
byte-identical and loss/adoption draws do not depend on the protocol
under test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..crypto.prf import prf, encode_u32
from ..crypto.group import (
    GroupEmbedding,
    Scalar,
    derive_scalar,
    generator_exp,
    group_exp,
    group_for_kind,
)
from ..protocol.spec import Matcher, ProtocolId, instantiate
from ..protocol.state import (
    SLOT_MINUTES,
    SLOTS_PER_DAY,
    Report,
    ServerState,
    Upload,
    UserState,
    day_slots,
)
from ..protocol.phases import (
    beacon_for_slot,
    patient_report,
    prune_expired_records,
    record_reception,
    user_periodic_upload,
)
from ..protocol.matching import CostCounters, match_round
from .scenario import Scenario
from .world import Encounter, WorldTrace, generate_world, ground_truth_oracle


@dataclass
class RunLog:
    """Raw server-side and published material, kept for adversary views."""

    reports: list[Report] = field(default_factory=list)
    uploads: list[Upload] = field(default_factory=list)
    queries: list[tuple[int, int, tuple]] = field(default_factory=list)
    pools: dict[int, tuple] = field(default_factory=dict)
    psi_queries: list[tuple[int, int, int]] = field(default_factory=list)


@dataclass
class SimulationResult:
    scenario: Scenario
    protocol: ProtocolId
    world: WorldTrace
    risks: dict[int, int]
    exposed: frozenset[int]
    outcomes: dict[int, list[tuple[int, object]]]
    counters: CostCounters
    server: ServerState
    runlog: RunLog
    sniffs: tuple[tuple[int, int, bytes, int], ...]
    presence: dict[tuple[int, int], int]
    asv_secrets: dict[tuple[int, int], int]
    asv_beacons: dict[tuple[int, int], bytes]
    users: dict[int, UserState]
    failed_days: list[int]
    oracle: object = None

    def detected_exposed(self) -> frozenset[int]:
        return self.exposed


def _master_key(seed: int) -> bytes:
    return prf(b"pctsim-master", encode_u32(seed & 0xFFFFFFFF))


def _plan_from_adversaries(scenario: Scenario):
    """Build an attack plan from the scenario's adversary list, if any
    adversary declares an attack. Colluders become the malicious accounts
    and sniffer cells the attack footprint; for the one-way relay the
    first cell is the source and the rest the targets."""
    from ..adversary.attacks import AttackPlan
    from ..adversary.model import AttackId

    for adv in scenario.adversaries:
        if adv.attack is None:
            continue
        cells = tuple(adv.sniffer_cells)
        plan = AttackPlan(
            attack=adv.attack,
            attacker_ids=tuple(adv.colluders),
            cells=cells,
            src_cells=cells[:1],
            dst_cells=cells[1:],
            pad_reports=1000 if adv.attack is AttackId.RESOURCE_EXHAUSTION else 0,
        )
        return plan
    return None


def _granules(enc: Encounter) -> list[tuple[int, int]]:
    """Split a session into (slot, minutes-in-slot) pieces, slot-aligned."""
    out = []
    remaining = enc.minutes
    slot = enc.slot
    while remaining > 0:
        take = min(SLOT_MINUTES, remaining)
        out.append((slot, take))
        remaining -= take
        slot += 1
    return out


def run(
    scenario: Scenario,
    world: WorldTrace | None = None,
    attack=None,
) -> SimulationResult:
    """Execute one scenario. attack is an AttackPlan or None."""
    spec = instantiate(scenario.protocol)
    group = group_for_kind(scenario.group_kind)
    cfg = scenario.config
    if world is None:
        world = generate_world(scenario)

    master = _master_key(scenario.rng_seed)
    adopt_rng = random.Random(int.from_bytes(prf(master, b"adopt"), "big"))
    loss_rng = random.Random(int.from_bytes(prf(master, b"loss"), "big"))
    proto_rng = random.Random(int.from_bytes(prf(master, b"proto"), "big"))

    users: dict[int, UserState] = {}
    for uid in range(scenario.num_users):
        seed = prf(master, b"user" + encode_u32(uid))
        adopter = adopt_rng.random() < scenario.adoption_rate
        users[uid] = UserState(user_id=uid, seed=seed, adopter=adopter)
        users[uid].ripsi_blind = Scalar(
            int.from_bytes(prf(seed, b"ripsi-blind"), "big") % (group.q - 1) + 1, group
        )
    for a, b in scenario.household_pairs:
        users[a].household_seeds = users[a].household_seeds + (users[b].seed,)
        users[b].household_seeds = users[b].household_seeds + (users[a].seed,)

    server = ServerState(
        spec=spec,
        group=group,
        issue_key=prf(master, b"issue"),
        embedding=GroupEmbedding(group),
        psi_secret=Scalar(
            int.from_bytes(prf(master, b"epione"), "big") % (group.q - 1) + 1, group
        ),
    )

    if attack is None:
        attack = _plan_from_adversaries(scenario)
    runtime = None
    if attack is not None:
        from ..adversary.attacks import AttackRuntime

        runtime = AttackRuntime(attack, spec, group, cfg, users, server)
        for uid in runtime.forced_adopters():
            users[uid].adopter = True

    # Per-direction, per-session loss draws, fixed by world order so every
    # protocol sees the same loss pattern.
    keep: dict[int, tuple[bool, bool]] = {}
    for idx, _enc in enumerate(world.encounters):
        keep[idx] = (
            loss_rng.random() >= scenario.loss_prob,
            loss_rng.random() >= scenario.loss_prob,
        )
    enc_index = {id(enc): idx for idx, enc in enumerate(world.encounters)}

    diag_by_day: dict[int, list[int]] = {}
    for uid, day in world.diagnoses:
        diag_by_day.setdefault(day, []).append(uid)

    counters = CostCounters()
    runlog = RunLog()
    runlog_outcomes: dict[int, list[tuple[int, object]]] = {}
    sniffs: list[tuple[int, int, bytes, int]] = []
    presence: dict[tuple[int, int], int] = {}
    asv_secrets: dict[tuple[int, int], int] = {}
    asv_beacons: dict[tuple[int, int], bytes] = {}
    failed_days: list[int] = []
    beacon_cache: dict[tuple[int, int], bytes] = {}
    surveil_cells = set()
    asv_cells = set()
    for adv in scenario.adversaries:
        if adv.kind.surveils:
            surveil_cells.update(adv.sniffer_cells)
        if adv.kind.active:
            asv_cells.update(adv.sniffer_cells)

    def beacon_of(uid: int, slot: int) -> bytes:
        key = (uid, slot)
        b = beacon_cache.get(key)
        if b is None:
            b = beacon_for_slot(spec, users[uid], slot, group, server)
            beacon_cache[key] = b
        return b

    stream_counts: dict[tuple[int, int], set[bytes]] = {}

    def deliver(
        uid: int,
        beacon: bytes,
        slot: int,
        distance: float,
        minutes: int,
        session_minutes: int,
        ignore_constraints: bool = False,
    ) -> None:
        user = users[uid]
        if scenario.user_device_cap is not None:
            seen = stream_counts.setdefault((uid, slot), set())
            if beacon not in seen and len(seen) >= scenario.user_device_cap:
                user.suppressed_receptions += 1
                return
            seen.add(beacon)
        record_reception(
            spec, user, beacon, slot, distance, minutes, session_minutes, group, cfg,
            ignore_constraints=ignore_constraints,
        )

    by_day = world.by_day()
    for day in range(scenario.num_days):
        stream_counts.clear()
        broadcasts: dict[int, dict[int, tuple[int, bytes]]] = {}
        presence_day: dict[int, list[tuple[int, int]]] = {}

        for enc in by_day.get(day, []):
            gran = _granules(enc)
            keep_ab, keep_ba = keep[enc_index[id(enc)]]
            for slot, minutes in gran:
                for uid in (enc.a, enc.b):
                    if (uid, slot) not in presence:
                        presence[(uid, slot)] = enc.cell
                        presence_day.setdefault(slot, []).append((enc.cell, uid))
                    if users[uid].adopter and not users[uid].diagnosed_by(day - 1):
                        slot_b = broadcasts.setdefault(slot, {})
                        if uid not in slot_b:
                            slot_b[uid] = (enc.cell, beacon_of(uid, slot))
            a_live = users[enc.a].adopter and not users[enc.a].diagnosed_by(day - 1)
            b_live = users[enc.b].adopter and not users[enc.b].diagnosed_by(day - 1)
            if a_live and b_live:
                if keep_ab:  # a's beacons reach b
                    for slot, minutes in gran:
                        deliver(enc.b, beacon_of(enc.a, slot), slot, enc.distance, minutes, enc.minutes)
                if keep_ba:
                    for slot, minutes in gran:
                        deliver(enc.a, beacon_of(enc.b, slot), slot, enc.distance, minutes, enc.minutes)

        # Active surveillance: devices in covered cells broadcast every slot
        # someone is present and hear everything broadcast there.
        if asv_cells:
            for slot, plist in sorted(presence_day.items()):
                for cell, uid in plist:
                    if cell not in asv_cells:
                        continue
                    user = users[uid]
                    if not user.adopter or user.diagnosed_by(day - 1):
                        continue
                    key = (cell, slot)
                    if key not in asv_beacons:
                        if spec.group_beacons:
                            exp = derive_scalar(prf(master, b"asv"), slot * 4096 + cell, group)
                            asv_secrets[key] = exp.value
                            asv_beacons[key] = generator_exp(group, exp).to_bytes()
                        else:
                            asv_beacons[key] = prf(master, b"asv" + encode_u32(cell) + encode_u32(slot))
                    deliver(uid, asv_beacons[key], slot, 0.5, SLOT_MINUTES, SLOT_MINUTES)

        if runtime is not None:
            runtime.inject_day(
                day, broadcasts, presence_day, deliver, beacon_of, by_day.get(day, [])
            )

        if surveil_cells:
            for slot in sorted(broadcasts):
                for uid, (cell, beacon) in sorted(broadcasts[slot].items()):
                    if cell in surveil_cells:
                        sniffs.append((cell, slot, beacon, uid))

        active = [
            u
            for u in users.values()
            if u.adopter and not u.diagnosed_by(day)
        ]
        counters.active_users[day] = len(active)

        for user in active:
            prune_expired_records(user, day, cfg)

        # Daily uploads for the server-matching designs.
        if spec.matcher is Matcher.SERVER:
            for user in active:
                upload = user_periodic_upload(spec, user, day, group, cfg)
                if upload is None:
                    continue
                counters.add(day, "user_upload", upload.token_units())
                runlog.uploads.append(upload)
                if spec.id is ProtocolId.SENT_SERVER:
                    server.latest_uploads[user.user_id] = upload
                elif spec.id is ProtocolId.AGREED_SERVER:
                    for e in upload.entries:
                        server.sdh_index.setdefault((e.slot, e.payload), []).append(
                            (user.user_id, e.minutes)
                        )
                elif spec.id is ProtocolId.RECEIVED_SERVER:
                    for slot in day_slots(day):
                        beacon_of(user.user_id, slot)  # populates the registry
        elif spec.id is ProtocolId.RECEIVED_INTERACTIVE:
            for user in active:
                sent = server.ripsi_sent.setdefault(user.user_id, {})
                for slot in day_slots(day):
                    elem = generator_exp(group, derive_scalar(user.seed, slot, group))
                    sent[slot] = group_exp(elem, user.ripsi_blind).to_bytes()
                counters.add(day, "user_upload", SLOTS_PER_DAY)

        # Diagnosis-day reports.
        reports_today: list[Report] = []
        for uid in sorted(diag_by_day.get(day, [])):
            user = users[uid]
            user.diagnosed_day = day
            if not user.adopter:
                continue
            records_override = None
            pad_to = 0
            if runtime is not None:
                records_override = runtime.records_for_report(uid)
                pad_to = runtime.report_pad(uid)
            if records_override is not None:
                original = user.records
                user.records = records_override
            report = patient_report(spec, user, day, group, proto_rng, cfg, server, pad_to=pad_to)
            if records_override is not None:
                user.records = original
            reports_today.append(report)
            runlog.reports.append(report)
            counters.add(day, "patient_report", report.token_units())
            counters.patient_units.append((uid, day, report.token_units()))
            server.patient_report_sizes[uid] = report.token_units()
            server.patient_report_days[uid] = day
            if spec.id is ProtocolId.AGREED_INTERACTIVE:
                for e in report.entries:
                    server.patient_tokens.append((e.slot, e.payload, e.minutes, uid, day))

        # Same-day-diagnosed users still take part in the day's round (their
        # device was running all day); their results are moot for exposure
        # since diagnosed accounts drop out of the exposed set.
        counters.match_users[day] = len(active)
        try:
            outcomes = match_round(
                spec, server, active, reports_today, day, group, cfg, proto_rng, counters, runlog
            )
        except (ValueError, ArithmeticError):  # round aborted, state kept
            failed_days.append(day)
            outcomes = {}
        for uid in sorted(outcomes):
            outcome = outcomes[uid]
            users[uid].risk_minutes += outcome.risk_minutes
            users[uid].matched_slots.extend(getattr(outcome, "matched", ()))
            runlog_outcomes.setdefault(uid, []).append((day, outcome))

    risks = {uid: u.risk_minutes for uid, u in users.items()}
    exposed = frozenset(
        uid
        for uid, u in users.items()
        if u.diagnosed_day is None and u.risk_minutes >= cfg.exposure_minutes
    )
    oracle = ground_truth_oracle(world, cfg)
    return SimulationResult(
        scenario=scenario,
        protocol=spec.id,
        world=world,
        risks=risks,
        exposed=exposed,
        outcomes=runlog_outcomes,
        counters=counters,
        server=server,
        runlog=runlog,
        sniffs=tuple(sniffs),
        presence=presence,
        asv_secrets=asv_secrets,
        asv_beacons=asv_beacons,
        users=users,
        failed_days=failed_days,
        oracle=oracle,
    )
