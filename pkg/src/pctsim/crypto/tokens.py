"""Token constructions layered on the group: ordered tokens and receipts.

An ordered token is the per-party upload form of an agreed secret: a hash
of the shared element plus one indicator byte that says which side of the
encounter is uploading. The two parties produce different digests, and a
server holding the raw shared element can recompute both.

A randomized receipt re-blinds a received beacon so that only its original
sender can recognize it.
"""

from __future__ import annotations

import hashlib
import random

from .group import GroupElement, Scalar, GroupError, generator_exp, group_exp, random_scalar

_ORDERED_DOMAIN = b"ordered-token-v1"


class DegenerateEncounterError(ValueError):
    """Both sides presented the same beacon; the indicator bit is undefined."""


def _ordered_digest(shared: GroupElement, indicator: int) -> bytes:
    h = hashlib.sha256()
    h.update(_ORDERED_DOMAIN)
    h.update(shared.to_bytes())
    h.update(bytes([indicator]))
    return h.digest()


def ordered_token(shared: GroupElement, mine: GroupElement, theirs: GroupElement) -> bytes:
    """Digest of (shared || indicator), indicator 0 iff my beacon sorts first.

    The order is lexicographic over the canonical fixed-width encoding; any
    total order would do, this one is fixed so token bytes are reproducible.
    """
    mine_b, theirs_b = mine.to_bytes(), theirs.to_bytes()
    if mine_b == theirs_b:
        raise DegenerateEncounterError("identical beacons on both sides")
    indicator = 0 if mine_b < theirs_b else 1
    return _ordered_digest(shared, indicator)


def ordered_token_pair(shared: GroupElement) -> tuple[bytes, bytes]:
    """Both possible digests, recomputable from the shared element alone."""
    return _ordered_digest(shared, 0), _ordered_digest(shared, 1)


def randomized_receipt(
    received_beacon: GroupElement, rng: random.Random
) -> tuple[GroupElement, GroupElement]:
    """Blind a received beacon with a fresh exponent y: (g^y, beacon^y).

    Unlinkable to the beacon for anyone who does not know its secret
    exponent (DDH); the sender can verify with receipt_matches.
    """
    if received_beacon.is_identity():
        raise GroupError("identity beacon rejected")
    y = random_scalar(received_beacon.group, rng)
    return generator_exp(received_beacon.group, y), group_exp(received_beacon, y)


def receipt_matches(receipt: tuple[GroupElement, GroupElement], secret: Scalar) -> bool:
    """True iff the receipt re-blinds the beacon g^secret."""
    base, blinded = receipt
    return group_exp(base, secret) == blinded
