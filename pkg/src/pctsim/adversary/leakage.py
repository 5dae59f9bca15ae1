"""Leakage oracles: concrete procedures an adversary runs over its view.

Every oracle here works from an AdversaryView (what was observed) and is
scored against the world's ground truth. Nothing peeks at hidden state:
if a procedure links a user to a place, it does so from sniffed beacons,
registry contents, uploads, queries, or published pools, exactly the way
the corresponding adversary would.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..crypto.prf import prf, encode_u32
from ..crypto.group import GroupError, group_exp
from ..crypto.tokens import ordered_token_pair
from ..protocol.spec import Matcher, ProtocolId, ProtocolSpec, ReportKind
from ..protocol.state import SLOTS_PER_DAY, window_days
from ..protocol.matching import minute_items
from ..protocol.interactive import PsiCaServer, psi_ca_round
from .model import AdversaryConfig, AdversaryView


@dataclass
class ServerSnapshot:
    """Everything a malicious server can have recorded."""

    reports: tuple = ()
    uploads: tuple = ()
    queries: tuple = ()
    registry: dict = field(default_factory=dict)
    psi_queries: tuple = ()


def build_view(result, adversary: AdversaryConfig, adversary_user: int | None = None) -> AdversaryView:
    """Project a run onto one adversary's capabilities."""
    kind = adversary.kind
    cells = set(adversary.sniffer_cells)
    observed = tuple(
        (cell, slot, beacon)
        for cell, slot, beacon, _sender in result.sniffs
        if kind.surveils and cell in cells
    )
    own_secrets = {}
    own_beacons = {}
    if kind.active:
        own_secrets = {k: v for k, v in result.asv_secrets.items() if k[0] in cells}
        own_beacons = {k: v for k, v in result.asv_beacons.items() if k[0] in cells}
    server_side = None
    if kind.server_side:
        server_side = ServerSnapshot(
            reports=tuple(result.runlog.reports),
            uploads=tuple(result.runlog.uploads),
            queries=tuple(result.runlog.queries),
            registry=dict(result.server.registry),
            psi_queries=tuple(result.runlog.psi_queries),
        )
    pools = {}
    app_outcomes = ()
    if not kind.server_side:
        pools = dict(result.runlog.pools)
        if adversary_user is not None:
            app_outcomes = tuple(result.outcomes.get(adversary_user, ()))
    return AdversaryView(
        kind=kind,
        observed=observed,
        own_secrets=own_secrets,
        own_beacons=own_beacons,
        server_side=server_side,
        pools=pools,
        adversary_user=adversary_user,
        app_outcomes=app_outcomes,
    )


def _presence_points(result, users: set[int], cells: set[int]) -> set[tuple[int, int]]:
    return {
        (uid, slot)
        for (uid, slot), cell in result.presence.items()
        if uid in users and cell in cells and result.users[uid].adopter
    }


# ---------------------------------------------------------------------------
# Movement traces of all users (server-side adversary)


def leak_movement_traces(result, view: AdversaryView, spec: ProtocolSpec) -> float:
    """Fraction of users' presence points the adversary links correctly.

    Implemented channels: the sent-server upload of received beacons
    cross-matched with sniffed broadcasts; the server-issued beacon
    registry against sniffed broadcasts; and for agreed-token designs
    under active surveillance, tokens recomputed from the adversary's own
    broadcast secrets matched against uploads or queries.
    """
    if view.server_side is None or not view.observed:
        return 0.0
    cells = {cell for cell, _slot, _b in view.observed}
    claims: set[tuple[int, int, int]] = set()  # (user, slot, cell)

    if spec.id is ProtocolId.SENT_SERVER:
        sniffed_at: dict[tuple[int, bytes], int] = {}
        for cell, slot, beacon in view.observed:
            sniffed_at[(slot, beacon)] = cell
        for upload in view.server_side.uploads:
            for e in upload.entries:
                cell = sniffed_at.get((e.slot, e.payload))
                if cell is not None:
                    claims.add((upload.user, e.slot, cell))

    elif spec.server_issued_beacons:
        for cell, slot, beacon in view.observed:
            hit = view.server_side.registry.get(beacon)
            if hit is not None:
                claims.add((hit[0], slot, cell))

    elif spec.report_kind is ReportKind.AGREED and view.own_secrets:
        token_owner: dict[tuple[int, bytes], set[int]] = {}
        for upload in view.server_side.uploads:
            for e in upload.entries:
                token_owner.setdefault((e.slot, e.payload), set()).add(upload.user)
        for user, _day, entries in view.server_side.queries:
            for slot, ordered, _minutes in entries:
                token_owner.setdefault((slot, ordered), set()).add(user)
        if not token_owner:
            return 0.0
        group = result.server.group
        for cell, slot, beacon in view.observed:
            secret = view.own_secrets.get((cell, slot))
            if secret is None:
                continue
            try:
                elem = group.decode(beacon)
            except GroupError:
                continue
            shared = group_exp(elem, secret)
            for digest in ordered_token_pair(shared):
                for uid in token_owner.get((slot, digest), ()):
                    claims.add((uid, slot, cell))

    if not claims:
        return 0.0
    all_users = set(result.users)
    denom = _presence_points(result, all_users, cells)
    correct = {
        (uid, slot)
        for uid, slot, cell in claims
        if result.presence.get((uid, slot)) == cell
    }
    return len(correct & denom) / len(denom) if denom else 0.0


# ---------------------------------------------------------------------------
# Movement traces of patients (user-side surveillance over the pool)


def leak_patient_traces_user_psv(result, view: AdversaryView, spec: ProtocolSpec) -> float:
    """Chain a patient's sniffed beacons through the published pool.

    Only the daily-seed design gives the pool linkable structure: every
    beacon regenerated from one reported seed belongs to one patient's
    day. Flat beacon pools, randomized receipts, and agreed tokens leave
    nothing to group, so the chained fraction is zero there.
    """
    if not view.observed or not view.pools:
        return 0.0
    if not spec.daily_seed:
        return 0.0
    chain_of: dict[bytes, tuple[int, bytes]] = {}
    for _day, pool in sorted(view.pools.items()):
        for d, seed in pool[1]:
            for slot in range(d * SLOTS_PER_DAY, (d + 1) * SLOTS_PER_DAY):
                chain_of[prf(seed, encode_u32(slot))] = (d, seed)
    chains: dict[tuple[int, bytes], list[tuple[int, int, bytes]]] = {}
    for cell, slot, beacon in view.observed:
        chain = chain_of.get(beacon)
        if chain is not None:
            chains.setdefault(chain, []).append((cell, slot, beacon))

    diag = result.world.diagnosis_day()
    cells = {cell for cell, _s, _b in view.observed}
    linked: set[tuple[int, int]] = set()
    sender_of = {(slot, beacon): sender for cell, slot, beacon, sender in result.sniffs}
    for chain, points in chains.items():
        if len(points) < 2:
            continue
        owners = {sender_of.get((slot, beacon)) for _c, slot, beacon in points}
        if len(owners) != 1:
            continue  # impure chain: linked to the wrong device somewhere
        owner = owners.pop()
        if owner is None or owner not in diag:
            continue
        for _cell, slot, _beacon in points:
            linked.add((owner, slot))

    denom = set()
    for patient, day in result.world.diagnoses:
        days = window_days(day, result.scenario.config)
        for (uid, slot) in _presence_points(result, {patient}, cells):
            if slot // SLOTS_PER_DAY in days:
                denom.add((uid, slot))
    return len(linked & denom) / len(denom) if denom else 0.0


def patient_trace_via_received_reports(result, view: AdversaryView, spec: ProtocolSpec) -> float:
    """Server+Psv channel on plaintext received-beacon reports: each
    reported beacon was sniffed where its sender stood, which is where the
    reporting patient stood too."""
    if view.server_side is None or not view.observed:
        return 0.0
    if spec.report_kind is not ReportKind.RECEIVED or spec.id is ProtocolId.RECEIVED_USER_CLEVERPARROT:
        return 0.0
    sniffed_at: dict[tuple[int, bytes], int] = {}
    for cell, slot, beacon in view.observed:
        sniffed_at[(slot, beacon)] = cell
    claims: set[tuple[int, int]] = set()
    for report in view.server_side.reports:
        for e in report.entries:
            if e.slot is None:
                continue
            cell = sniffed_at.get((e.slot, e.payload))
            if cell is not None and result.presence.get((report.patient, e.slot)) == cell:
                claims.add((report.patient, e.slot))
    cells = {cell for cell, _s, _b in view.observed}
    denom = set()
    for patient, day in result.world.diagnoses:
        days = window_days(day, result.scenario.config)
        for (uid, slot) in _presence_points(result, {patient}, cells):
            if slot // SLOTS_PER_DAY in days:
                denom.add((uid, slot))
    return len(claims & denom) / len(denom) if denom else 0.0


# ---------------------------------------------------------------------------
# Interaction relationships (server-side, no surveillance)


def interaction_ground_truth(result) -> dict[str, set[tuple[int, int]]]:
    """Co-presence pair sets per relationship category."""
    diag = result.world.diagnosis_day()
    cfg = result.scenario.config
    by_point: dict[tuple[int, int], list[int]] = {}
    for (uid, slot), cell in result.presence.items():
        if result.users[uid].adopter:
            by_point.setdefault((cell, slot), []).append(uid)
    truth = {"pp": set(), "pu": set(), "uu_exposed": set(), "uu_noexp": set()}
    for (cell, slot), users in by_point.items():
        day = slot // SLOTS_PER_DAY
        users = sorted(users)
        in_window_patients = [
            u for u in users if u in diag and day in window_days(diag[u], cfg)
        ]
        for i, u in enumerate(users):
            for v in users[i + 1 :]:
                u_pat = u in diag and day in window_days(diag[u], cfg)
                v_pat = v in diag and day in window_days(diag[v], cfg)
                if u_pat and v_pat:
                    truth["pp"].add((u, v))
                elif u_pat or v_pat:
                    if u in diag and v in diag:
                        continue  # one side is a patient outside her window
                    truth["pu"].add((u, v) if u_pat else (v, u))
                elif u not in diag and v not in diag:
                    others = [p for p in in_window_patients if p not in (u, v)]
                    if others:
                        truth["uu_exposed"].add((u, v))
                    else:
                        truth["uu_noexp"].add((u, v))
    return truth


def leak_interactions(result, view: AdversaryView, spec: ProtocolSpec) -> dict[str, tuple[float, float]]:
    """Infer co-location edges from server-side data; score per category.

    Channels: upload-set intersection (sent-server); registry resolution
    of reported received beacons (received-server); duplicate report
    tokens across patients (plaintext received and agreed reports); and
    ordered-token matches between reports and stored uploads or queries
    (agreed server and query designs). Returns category -> (precision,
    recall) where precision is scored against all true co-presence pairs.
    """
    snap = view.server_side
    if snap is None:
        return {}
    diag = result.world.diagnosis_day()
    inferred: dict[str, set[tuple[int, int]]] = {
        "pp": set(),
        "pu": set(),
        "uu_any": set(),
    }

    # Duplicate tokens across two patients' reports place them together.
    seen: dict[tuple[int, bytes], set[int]] = {}
    for report in snap.reports:
        for e in report.entries:
            if e.slot is None or e.extra is not None:
                continue
            seen.setdefault((e.slot, e.payload), set()).add(report.patient)
    for (_slot, _payload), patients in seen.items():
        patients = sorted(patients)
        for i, p in enumerate(patients):
            for q in patients[i + 1 :]:
                inferred["pp"].add((p, q))

    if spec.id is ProtocolId.SENT_SERVER:
        by_user: dict[int, set[tuple[int, bytes]]] = {}
        for upload in snap.uploads:
            tokens = by_user.setdefault(upload.user, set())
            for e in upload.entries:
                tokens.add((e.slot, e.payload))
        users = sorted(by_user)
        for i, u in enumerate(users):
            for v in users[i + 1 :]:
                if by_user[u] & by_user[v]:
                    a, b = sorted((u, v))
                    u_pat, v_pat = a in diag, b in diag
                    if u_pat and v_pat:
                        inferred["pp"].add((a, b))
                    elif u_pat or v_pat:
                        inferred["pu"].add((a, b) if u_pat else (b, a))
                    else:
                        inferred["uu_any"].add((a, b))

    if spec.server_issued_beacons:
        for report in snap.reports:
            present: dict[int, set[int]] = {}
            for e in report.entries:
                hit = snap.registry.get(e.payload)
                if hit is None:
                    continue
                uid, _slot = hit
                present.setdefault(e.slot, set()).add(uid)
            for slot, users in present.items():
                for u in sorted(users):
                    pair = tuple(sorted((report.patient, u)))
                    if u in diag:
                        inferred["pp"].add(pair)
                    else:
                        inferred["pu"].add((report.patient, u))
                users = sorted(users)
                for i, u in enumerate(users):
                    for v in users[i + 1 :]:
                        if u not in diag and v not in diag:
                            inferred["uu_any"].add((u, v))

    if spec.report_kind is ReportKind.AGREED and spec.matcher in (
        Matcher.SERVER,
        Matcher.INTERACTIVE,
    ):
        token_owner: dict[tuple[int, bytes], set[int]] = {}
        for upload in snap.uploads:
            for e in upload.entries:
                token_owner.setdefault((e.slot, e.payload), set()).add(upload.user)
        for user, _day, entries in snap.queries:
            for slot, ordered, _minutes in entries:
                token_owner.setdefault((slot, ordered), set()).add(user)
        # Duplicate stored tokens would place their owners together; the
        # per-side indicator byte is exactly what keeps this channel shut.
        for owners in token_owner.values():
            for u in sorted(owners):
                for v in sorted(owners):
                    if u >= v:
                        continue
                    if u in diag and v in diag:
                        inferred["pp"].add((u, v))
                    elif u in diag or v in diag:
                        inferred["pu"].add((u, v) if u in diag else (v, u))
                    else:
                        inferred["uu_any"].add((u, v))
        group = result.server.group
        for report in snap.reports:
            for e in report.entries:
                try:
                    shared = group.decode(e.payload)
                except GroupError:
                    continue
                for digest in ordered_token_pair(shared):
                    for uid in token_owner.get((e.slot, digest), ()):
                        if uid == report.patient:
                            continue
                        if uid in diag:
                            inferred["pp"].add(tuple(sorted((report.patient, uid))))
                        else:
                            inferred["pu"].add((report.patient, uid))

    truth = interaction_ground_truth(result)
    all_true_pairs = set()
    for pairs in truth.values():
        all_true_pairs |= pairs
    all_true_unordered = {tuple(sorted(p)) for p in all_true_pairs}

    out: dict[str, tuple[float, float]] = {}
    for key, true_set in truth.items():
        if key == "pp":
            got = inferred["pp"]
            true_cmp = {tuple(sorted(p)) for p in true_set}
        elif key == "pu":
            got = inferred["pu"]
            true_cmp = set(true_set)
        else:
            got = inferred["uu_any"]
            true_cmp = {tuple(sorted(p)) for p in true_set}
        if not true_cmp:
            out[key] = (0.0, 0.0)
            continue
        hits = got & true_cmp
        # Precision over everything inferred in this shape that is truly
        # co-present in any category; an inference channel is only "real"
        # if it never fabricates contact.
        if got:
            correct = {
                p for p in got if tuple(sorted(p)) in all_true_unordered
            }
            precision = len(correct) / len(got)
        else:
            precision = 0.0
        out[key] = (precision, len(hits) / len(true_cmp))
    return out


# ---------------------------------------------------------------------------
# Exposure time (user-side) and exposure status (server-side)


def true_exposure_slots(result, uid: int) -> set[int]:
    diag = result.world.diagnosis_day()
    cfg = result.scenario.config
    slots = set()
    for enc in result.world.encounters:
        if uid not in (enc.a, enc.b):
            continue
        peer = enc.b if enc.a == uid else enc.a
        if peer not in diag or uid in diag:
            continue
        if enc.distance > cfg.proximity_meters or enc.minutes < cfg.min_session_minutes:
            continue
        if enc.day not in window_days(diag[peer], cfg):
            continue
        remaining, slot = enc.minutes, enc.slot
        while remaining > 0:
            slots.add(slot)
            remaining -= min(10, remaining)
            slot += 1
    return slots


def leak_exposure_time(result, view: AdversaryView, spec: ProtocolSpec) -> tuple[float, int]:
    """(fraction of true exposure slots recovered, probe queries spent).

    Local matching hands the adversary her matched records outright.
    Query-style interactive matching admits an adaptive subset probe:
    split the query set, re-query, recurse into halves that still match.
    Store-based interactive matching and server matching expose no
    per-token feedback, so nothing is recoverable.
    """
    uid = view.adversary_user
    if uid is None:
        return 0.0, 0
    truth = true_exposure_slots(result, uid)
    if not truth:
        return 0.0, 0

    if spec.matcher is Matcher.USER:
        recovered = {slot for _day, outcome in view.app_outcomes for slot, _m in outcome.matched}
        return len(recovered & truth) / len(truth), 0

    if spec.id is ProtocolId.AGREED_INTERACTIVE:
        tokens = [
            (rec.slot, rec.ordered, rec.minutes)
            for rec in result.users[uid].records
            if rec.ordered is not None
        ]
        if not tokens:
            return 0.0, 0
        index = _desire_full_index(result)

        def query(subset) -> int:
            return sum(m for slot, ordered, m in subset if (slot, ordered) in index)

        recovered, queries = _subset_probe(tokens, query)
        slots = {tokens[i][0] for i in recovered}
        return len(slots & truth) / len(truth), queries

    if spec.id is ProtocolId.SENT_INTERACTIVE:
        server = result.server
        items: list[tuple[int, list]] = []
        for rec in result.users[uid].records:
            elems = [server.embedding.embed(it) for it in minute_items(rec.beacon, rec.minutes)]
            items.append((rec.slot, elems))
        pool = [server.embedding.embed(it) for r in result.runlog.reports for e in r.entries
                for it in minute_items(e.payload, 10)]
        if not pool:
            return 0.0, 0
        psi = PsiCaServer(server.group, pool, server.psi_secret)
        rng = random.Random(99)

        def query(subset) -> int:
            flat = [e for _slot, elems in subset for e in elems]
            return psi_ca_round(psi, flat, rng)

        recovered, queries = _subset_probe(items, query)
        slots = {items[i][0] for i in recovered}
        return len(slots & truth) / len(truth), queries

    return 0.0, 0


def _desire_full_index(result) -> set[tuple[int, bytes]]:
    index = set()
    group = result.server.group
    for slot, shared_b, _minutes, _patient, _day in result.server.patient_tokens:
        try:
            shared = group.decode(shared_b)
        except GroupError:
            continue
        for digest in ordered_token_pair(shared):
            index.add((slot, digest))
    return index


def _subset_probe(items: list, query) -> tuple[list[int], int]:
    """Adaptive group testing: find the indices that contribute matches.

    Query count is 1 + the internal splits; for k items with at least one
    positive this is at least log2(k) queries, the cost bound asserted by
    the partial-leak classification.
    """
    queries = 0

    def q(lo, hi):
        nonlocal queries
        queries += 1
        return query(items[lo:hi])

    positives: list[int] = []

    def recurse(lo, hi, total):
        if total <= 0:
            return
        if hi - lo == 1:
            positives.append(lo)
            return
        mid = (lo + hi) // 2
        left = q(lo, mid)
        recurse(lo, mid, left)
        recurse(mid, hi, total - left)

    total = q(0, len(items))
    recurse(0, len(items), total)
    return positives, queries


def leak_exposure_status(result, view: AdversaryView, spec: ProtocolSpec) -> float:
    """Fraction of at-risk users whose aggregate risk the server learned.

    Server matching computes the risks itself; the query and
    blind-permute-match designs hand the server per-user totals as their
    output. The cardinality design's client-side intersection and all
    local matching reveal nothing server-side.
    """
    if view.server_side is None:
        return 0.0
    server_learns = spec.matcher is Matcher.SERVER or spec.id in (
        ProtocolId.AGREED_INTERACTIVE,
        ProtocolId.RECEIVED_INTERACTIVE,
    )
    if not server_learns:
        return 0.0
    at_risk = {uid for uid, risk in result.risks.items() if risk > 0 and uid not in result.world.diagnosis_day()}
    if not at_risk:
        return 0.0
    known = 0
    for uid in at_risk:
        total = sum(o.risk_minutes for _day, o in result.outcomes.get(uid, ()))
        if total == result.risks[uid]:
            known += 1
    return known / len(at_risk)
