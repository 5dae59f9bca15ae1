"""Protocol phase behavior: beacons, reception filters, reports, uploads."""

import random

import pytest

from pctsim.crypto import TOY_GROUP, prf, encode_u32
from pctsim.protocol import (
    ALL_PROTOCOLS,
    DEFAULT_CONFIG,
    ProtocolId,
    ReportKind,
    Matcher,
    ServerState,
    UserState,
    aggregate_exposure,
    beacon_for_slot,
    instantiate,
    patient_report,
    prune_expired_records,
    record_reception,
    user_periodic_upload,
    window_days,
)
from pctsim.protocol.phases import daily_seed


GROUP = TOY_GROUP


def make_user(uid=0, seed=b"seed-0"):
    return UserState(user_id=uid, seed=seed)


def test_instantiate_covers_the_grid():
    assert len(ALL_PROTOCOLS) == 11
    spec = instantiate("agreed-server-sdh")
    assert spec.report_kind is ReportKind.AGREED and spec.matcher is Matcher.SERVER
    assert instantiate(ProtocolId.SENT_USER_DAILY).daily_seed
    assert instantiate("received-server").server_issued_beacons
    with pytest.raises(ValueError):
        instantiate("no-such-protocol")


def test_beacons_deterministic_and_rotating():
    spec = instantiate(ProtocolId.SENT_USER_BASIC)
    user = make_user()
    b1 = beacon_for_slot(spec, user, 5, GROUP)
    assert b1 == beacon_for_slot(spec, user, 5, GROUP)
    assert b1 != beacon_for_slot(spec, user, 6, GROUP)
    assert b1 == prf(user.seed, encode_u32(5))


def test_daily_seed_beacons_derive_from_reported_seed():
    spec = instantiate(ProtocolId.SENT_USER_DAILY)
    user = make_user()
    s_d = daily_seed(user.seed, 2)
    for slot in range(2 * 144, 3 * 144):
        assert beacon_for_slot(spec, user, slot, GROUP) == prf(s_d, encode_u32(slot))


def test_server_issued_beacons_fill_registry():
    spec = instantiate(ProtocolId.RECEIVED_SERVER)
    server = ServerState(spec=spec, group=GROUP)
    user = make_user(uid=3)
    b = beacon_for_slot(spec, user, 7, GROUP, server)
    assert server.registry[b] == (3, 7)


def test_reception_filters():
    spec = instantiate(ProtocolId.SENT_USER_BASIC)
    user = make_user()
    peer = make_user(uid=1, seed=b"seed-1")
    beacon = beacon_for_slot(spec, peer, 10, GROUP)
    # Too far away: no record.
    assert not record_reception(spec, user, beacon, 10, 10.0, 10, 20, GROUP)
    # Too short a session: no record.
    assert not record_reception(spec, user, beacon, 10, 1.0, 1, 1, GROUP)
    # Qualifying: recorded.
    assert record_reception(spec, user, beacon, 10, 1.0, 10, 20, GROUP)
    assert len(user.records) == 1


def test_household_beacons_dropped():
    spec = instantiate(ProtocolId.SENT_USER_BASIC)
    user = make_user()
    user.household_seeds = (b"seed-hh",)
    hh_beacon = prf(b"seed-hh", encode_u32(4))
    assert not record_reception(spec, user, hh_beacon, 4, 1.0, 10, 10, GROUP)
    stranger = prf(b"seed-s", encode_u32(4))
    assert record_reception(spec, user, stranger, 4, 1.0, 10, 10, GROUP)


def test_malformed_group_beacon_dropped_and_counted():
    spec = instantiate(ProtocolId.AGREED_SERVER)
    user = make_user()
    bad = b"\xff" * GROUP.elem_width
    assert not record_reception(spec, user, bad, 3, 1.0, 10, 10, GROUP)
    assert user.dropped_malformed == 1


def test_agreed_reception_stores_shared_and_ordered():
    spec = instantiate(ProtocolId.AGREED_SERVER)
    a, b = make_user(0, b"seed-a"), make_user(1, b"seed-b")
    beacon_b = beacon_for_slot(spec, b, 9, GROUP)
    beacon_a = beacon_for_slot(spec, a, 9, GROUP)
    assert record_reception(spec, a, beacon_b, 9, 1.0, 10, 10, GROUP)
    assert record_reception(spec, b, beacon_a, 9, 1.0, 10, 10, GROUP)
    ra, rb = a.records[0], b.records[0]
    assert ra.shared == rb.shared
    assert ra.ordered != rb.ordered


def test_retention_pass_drops_old_records():
    spec = instantiate(ProtocolId.SENT_USER_BASIC)
    user = make_user()
    record_reception(spec, user, b"x" * 32, 0, 1.0, 10, 10, GROUP)  # day 0
    record_reception(spec, user, b"y" * 32, 15 * 144, 1.0, 10, 10, GROUP)  # day 15
    prune_expired_records(user, 15)
    assert [r.day for r in user.records] == [15]


def test_short_sessions_recorded_separately_then_aggregated():
    # Two 2-minute sessions with the same peer produce two records whose
    # minutes aggregate toward the exposure threshold later.
    spec = instantiate(ProtocolId.SENT_USER_BASIC)
    user = make_user()
    peer = make_user(uid=1, seed=b"seed-p")
    for slot in (30, 90):
        beacon = beacon_for_slot(spec, peer, slot, GROUP)
        assert record_reception(spec, user, beacon, slot, 1.0, 2, 2, GROUP)
    assert len(user.records) == 2
    risk, exposed = aggregate_exposure([(r.slot, r.minutes) for r in user.records])
    assert risk == 4 and not exposed


def test_aggregate_exposure_threshold():
    assert aggregate_exposure([(1, 8), (2, 8)]) == (16, True)
    assert aggregate_exposure([]) == (0, False)
    assert aggregate_exposure([(1, 6), (40, 6), (80, 6)]) == (18, True)
    assert aggregate_exposure([(1, 14)]) == (14, False)


def test_patient_report_contents_by_kind():
    rng = random.Random(1)
    diag_day = 15
    for pid in ALL_PROTOCOLS:
        spec = instantiate(pid)
        server = ServerState(spec=spec, group=GROUP)
        user = make_user()
        peer = make_user(uid=1, seed=b"seed-p")
        # One in-window record and one stale record.
        beacon_in = beacon_for_slot(spec, peer, diag_day * 144, GROUP, server)
        beacon_out = beacon_for_slot(spec, peer, 0, GROUP, server)
        record_reception(spec, user, beacon_in, diag_day * 144, 1.0, 10, 10, GROUP)
        record_reception(spec, user, beacon_out, 0, 1.0, 10, 10, GROUP)
        report = patient_report(spec, user, diag_day, GROUP, rng, server=server)
        if spec.report_kind is ReportKind.SENT:
            expected = 14 if spec.daily_seed else 14 * 144
            assert report.token_units() == expected
        else:
            # Only the in-window record is reported.
            assert report.token_units() == 1
            entry = report.entries[0]
            assert entry.slot == diag_day * 144
            if spec.report_kind is ReportKind.AGREED:
                assert entry.payload == user.records[0].shared
            elif pid is ProtocolId.RECEIVED_USER_CLEVERPARROT:
                assert entry.extra is not None
            else:
                assert entry.payload == beacon_in


def test_report_minimality_window():
    # Reports never carry material outside the declared window.
    rng = random.Random(2)
    spec = instantiate(ProtocolId.AGREED_USER)
    user = make_user()
    peer = make_user(uid=1, seed=b"seed-p")
    for day in (0, 10, 19):
        beacon = beacon_for_slot(spec, peer, day * 144, GROUP)
        record_reception(spec, user, beacon, day * 144, 1.0, 10, 10, GROUP)
    report = patient_report(spec, user, 19, GROUP, rng)
    days = window_days(19)
    assert all(e.slot // 144 in days for e in report.entries)
    assert report.token_units() == 2  # days 10 and 19; day 0 excluded


def test_agreed_empty_report_with_no_encounters():
    rng = random.Random(3)
    spec = instantiate(ProtocolId.AGREED_USER)
    report = patient_report(spec, make_user(), 5, GROUP, rng)
    assert report.token_units() == 0


def test_wire_sizes_count_entry_bytes():
    rng = random.Random(4)
    spec = instantiate(ProtocolId.AGREED_USER)
    user = make_user()
    peer = make_user(uid=1, seed=b"seed-p")
    beacon = beacon_for_slot(spec, peer, 100, GROUP)
    record_reception(spec, user, beacon, 100, 1.0, 10, 10, GROUP)
    report = patient_report(spec, user, 0, GROUP, rng)
    entry = report.entries[0]
    assert entry.wire_size() == len(entry.payload) + 6
    assert report.wire_size() == 8 + sum(e.wire_size() for e in report.entries)


def test_group_for_kind_rejects_unknown():
    from pctsim.crypto import group_for_kind
    from pctsim.crypto.group import GroupError

    with pytest.raises(GroupError):
        group_for_kind("medium")


def test_upload_conventions():
    user = make_user()
    peer = make_user(uid=1, seed=b"seed-p")
    sdh = instantiate(ProtocolId.AGREED_SERVER)
    beacon = beacon_for_slot(sdh, peer, 3 * 144, GROUP)
    record_reception(sdh, user, beacon, 3 * 144, 1.0, 10, 10, GROUP)
    old = beacon_for_slot(sdh, peer, 2 * 144, GROUP)
    record_reception(sdh, user, old, 2 * 144, 1.0, 10, 10, GROUP)
    up = user_periodic_upload(sdh, user, 3, GROUP)
    assert up.token_units() == 1  # only today's token

    ss = instantiate(ProtocolId.SENT_SERVER)
    up2 = user_periodic_upload(ss, user, 3, GROUP)
    assert up2.token_units() == 2  # whole retained window, re-sent daily

    rs = instantiate(ProtocolId.RECEIVED_SERVER)
    up3 = user_periodic_upload(rs, user, 3, GROUP)
    assert up3.token_units() == 14 * 144

    for pid in (ProtocolId.SENT_USER_BASIC, ProtocolId.AGREED_INTERACTIVE):
        assert user_periodic_upload(instantiate(pid), user, 3, GROUP) is None
