"""Interactive matching sub-protocols.

psi_ca_round is a shuffle-based Diffie-Hellman private set intersection
cardinality: the server publishes its items raised to a long-term secret,
the client sends her items under a fresh blinding, the server applies its
secret and returns the double-blinded set shuffled, and the client strips
her blinding and intersects. The shuffle is what stops the client from
mapping a matched element back to a specific item of hers, so she learns
the cardinality and nothing else; the server learns only her set size.

ri_psi_round is the received-interactive flow: the client keeps blinded
versions of her sent beacons on the server, downloads the day's patient
tokens blinded by a per-round server secret, applies her own blinding,
permutes within each patient's batch, and returns them; the server strips
its blinding and matches against her stored tokens. The server ends up
knowing only how much exposure she has; she ends up knowing the number of
patients and each patient's token count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..crypto.group import (
    GroupDesc,
    GroupElement,
    Scalar,
    group_exp,
    random_scalar,
    scalar_inverse,
)


@dataclass
class PsiCaTranscript:
    """Wire messages of one cardinality round, for leakage assertions."""

    client_sent: list[bytes] = field(default_factory=list)
    server_returned: list[bytes] = field(default_factory=list)
    published: list[bytes] = field(default_factory=list)


class PsiCaServer:
    """Server side: holds blinded items, answers blind-and-shuffle queries."""

    def __init__(self, group: GroupDesc, items: list[GroupElement], secret: Scalar):
        self.group = group
        self.secret = secret
        self.published = {group_exp(e, secret).to_bytes() for e in items}

    def answer(self, blinded: list[GroupElement], rng: random.Random) -> list[GroupElement]:
        out = [group_exp(e, self.secret) for e in blinded]
        rng.shuffle(out)
        return out


def psi_ca_round(
    server: PsiCaServer,
    client_items: list[GroupElement],
    rng: random.Random,
    transcript: PsiCaTranscript | None = None,
) -> int:
    """Run one round; returns the intersection cardinality the client learns."""
    distinct: dict[bytes, GroupElement] = {e.to_bytes(): e for e in client_items}
    r = random_scalar(server.group, rng)
    blinded = [group_exp(e, r) for e in distinct.values()]
    returned = server.answer(blinded, rng)
    if len(returned) != len(blinded):
        raise ValueError("cardinality mismatch in server response")
    rinv = scalar_inverse(r)
    unblinded = {group_exp(e, rinv).to_bytes() for e in returned}
    if transcript is not None:
        transcript.client_sent = sorted(e.to_bytes() for e in blinded)
        transcript.server_returned = sorted(e.to_bytes() for e in returned)
        transcript.published = sorted(server.published)
    return len(unblinded & server.published)


@dataclass
class RipsiBatch:
    """One patient's tokens, blinded by the server's round secret."""

    patient: int
    items: list[tuple[int, bytes, int]]  # (slot, blinded element bytes, minutes)


def ri_psi_round(
    group: GroupDesc,
    batches: list[RipsiBatch],
    client_blind: Scalar,
    stored_sent: dict[int, bytes],
    round_secret: Scalar,
    rng: random.Random,
) -> tuple[int, int, list[int], list[tuple[int, int]]]:
    """One user's round over the day's patient batches.

    Returns (risk_minutes, patient_count, batch_sizes, matched) where
    matched lists (slot, minutes) pairs the server accumulated for this
    user. The client-side permutation keeps the server from learning which
    token within a batch matched; batch boundaries themselves are visible,
    which is how the client learns per-patient token counts.
    """
    risk = 0
    matched: list[tuple[int, int]] = []
    inv = scalar_inverse(round_secret)
    for batch in batches:
        processed = []
        for slot, blinded_b, minutes in batch.items:
            elem = GroupElement(int.from_bytes(blinded_b, "big"), group)
            processed.append((slot, group_exp(elem, client_blind).to_bytes(), minutes))
        rng.shuffle(processed)
        if len(processed) != len(batch.items):
            raise ValueError("cardinality mismatch in re-upload")
        for slot, double_b, minutes in processed:
            elem = GroupElement(int.from_bytes(double_b, "big"), group)
            candidate = group_exp(elem, inv).to_bytes()
            if stored_sent.get(slot) == candidate:
                risk += minutes
                matched.append((slot, minutes))
    return risk, len(batches), [len(b.items) for b in batches], matched
