"""Prime-order group abstraction over modular exponentiation.

Two instantiations sit behind one interface:

* a strong group: the 2048-bit MODP safe prime from RFC 3526, working in
  the prime-order-q subgroup of quadratic residues (q = (p-1)/2), and
* a toy group: a safe-prime subgroup with q just under 2^20, small enough
  that discrete logs can be recovered exhaustively, which is what lets the
  test suite brute-force every claim the protocols rely on.

Elements are canonically encoded as fixed-width big-endian bytes of the
representative in [1, p-1]; orderings and hashes are defined over that
encoding.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .prf import prf, encode_u32


class GroupError(ValueError):
    """Bad group arithmetic: mismatched groups, non-members, zero scalars."""


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for the sizes used here."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupDesc:
    """Description of a cyclic subgroup of Z_p^* with prime order q."""

    name: str
    p: int
    q: int
    g: int
    kind: str  # "toy" or "strong"

    @property
    def elem_width(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def encode(self, value: int) -> bytes:
        return value.to_bytes(self.elem_width, "big")

    def decode(self, data: bytes) -> "GroupElement":
        if len(data) != self.elem_width:
            raise GroupError("wrong element encoding width")
        value = int.from_bytes(data, "big")
        elem = GroupElement(value, self)
        assert_member(elem)
        return elem


@dataclass(frozen=True, slots=True)
class GroupElement:
    value: int
    group: GroupDesc

    def to_bytes(self) -> bytes:
        return self.group.encode(self.value)

    def is_identity(self) -> bool:
        return self.value == 1


@dataclass(frozen=True, slots=True)
class Scalar:
    """Exponent in [1, q-1]; zero is excluded so every scalar is invertible."""

    value: int
    group: GroupDesc

    def __post_init__(self):
        if not 1 <= self.value < self.group.q:
            raise GroupError("scalar out of range [1, q-1]")


def make_group(name: str, p: int, q: int, g: int, kind: str) -> GroupDesc:
    """Validate and build a group description.

    Checks: p and q prime, q divides p-1, g generates a subgroup of exact
    order q. Toy groups must keep q under 2^20 so exhaustive discrete-log
    search stays feasible; strong groups must have q of at least 250 bits.
    """
    if kind not in ("toy", "strong"):
        raise GroupError("kind must be 'toy' or 'strong'")
    if not _is_prime(q):
        raise GroupError("q is not prime")
    if (p - 1) % q != 0:
        raise GroupError("q does not divide p-1")
    if kind == "toy":
        if q >= 2**20:
            raise GroupError("toy group order must stay below 2^20")
        if not _is_prime(p):
            raise GroupError("p is not prime")
    else:
        if q < 2**250:
            raise GroupError("strong group order must be at least 2^250")
    if g in (0, 1) or pow(g, q, p) != 1:
        raise GroupError("g does not have order q")
    return GroupDesc(name=name, p=p, q=q, g=g, kind=kind)


# RFC 3526, 2048-bit MODP group. p is a safe prime; 4 = 2^2 generates the
# order-q subgroup of quadratic residues.
_RFC3526_2048_P = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)

STRONG_GROUP = make_group(
    "modp2048", _RFC3526_2048_P, (_RFC3526_2048_P - 1) // 2, 4, "strong"
)

# Largest safe-prime pair with q < 2^20: q = 1048571, p = 2q+1 = 2097143.
TOY_GROUP = make_group("toy20", 2097143, 1048571, 4, "toy")

# Hand-sized group for worked examples: p = 23, q = 11, g = 2 (2^11 = 1 mod 23).
MINI_TOY_GROUP = make_group("toy23", 23, 11, 2, "toy")


def group_for_kind(kind: str) -> GroupDesc:
    if kind == "toy":
        return TOY_GROUP
    if kind == "strong":
        return STRONG_GROUP
    raise GroupError(f"unknown group kind {kind!r}")


def assert_member(elem: GroupElement) -> None:
    """Reject wire values outside the subgroup (exhaustive check via order)."""
    g = elem.group
    if not 1 <= elem.value < g.p:
        raise GroupError("element outside Z_p^*")
    if pow(elem.value, g.q, g.p) != 1:
        raise GroupError("element not in the order-q subgroup")


def derive_scalar(seed: bytes, slot: int, group: GroupDesc) -> Scalar:
    """Per-slot secret exponent: PRF output folded into [1, q-1].

    Deterministic in (seed, slot); the fold is value mod (q-1) + 1 so zero
    never occurs and every derived scalar is invertible.
    """
    digest = prf(seed, encode_u32(slot))
    value = int.from_bytes(digest, "big") % (group.q - 1) + 1
    return Scalar(value, group)


def generator_exp(group: GroupDesc, e: Scalar | int) -> GroupElement:
    exp = e.value if isinstance(e, Scalar) else e
    return GroupElement(pow(group.g, exp, group.p), group)


def group_exp(base: GroupElement, e: Scalar | int) -> GroupElement:
    if isinstance(e, Scalar) and e.group is not base.group:
        raise GroupError("scalar and base belong to different groups")
    exp = e.value if isinstance(e, Scalar) else e
    return GroupElement(pow(base.value, exp, base.group.p), base.group)


def dh_shared(my_secret: Scalar, their_beacon: GroupElement) -> GroupElement:
    """Both ends of an encounter compute the same g^(x*x').

    Identity-element beacons are rejected: a degenerate shared secret is
    trivially linkable, so a wire value of 1 is dropped at reception.
    """
    if their_beacon.is_identity():
        raise GroupError("identity beacon rejected")
    return group_exp(their_beacon, my_secret)


def blind_pow(elem: GroupElement, secret: Scalar) -> GroupElement:
    return group_exp(elem, secret)


def unblind_pow(elem: GroupElement, secret: Scalar) -> GroupElement:
    inv = scalar_inverse(secret)
    return group_exp(elem, inv)


def scalar_inverse(s: Scalar) -> Scalar:
    return Scalar(pow(s.value, -1, s.group.q), s.group)


def random_scalar(group: GroupDesc, rng: random.Random) -> Scalar:
    return Scalar(rng.randrange(1, group.q), group)


_DLOG_TABLES: dict[tuple[int, int, int], dict[int, int]] = {}


def _dlog_table(group: GroupDesc) -> dict[int, int]:
    key = (group.p, group.q, group.g)
    table = _DLOG_TABLES.get(key)
    if table is None:
        table = {}
        acc = 1
        for e in range(group.q):
            table[acc] = e
            acc = acc * group.g % group.p
        _DLOG_TABLES[key] = table
    return table


def discrete_log(elem: GroupElement) -> int:
    """Exhaustive discrete log, available in toy groups only.

    Backed by a one-time full enumeration of the subgroup; afterwards each
    lookup is O(1). Used by tests as an oracle and by toy-group fast paths
    whose results are identical to the generic exponentiation check.
    """
    if elem.group.kind != "toy":
        raise GroupError("exhaustive discrete log only supported in toy groups")
    table = _dlog_table(elem.group)
    try:
        return table[elem.value]
    except KeyError:
        raise GroupError("element not in subgroup") from None


class GroupEmbedding:
    """Maps opaque item digests into the group for exponent-blinding PSI.

    In the strong group this is ordinary hash-to-group (g raised to a
    hash-derived exponent); collisions are negligible at that size. The toy
    group is far too small for that, so there the embedding plays the ideal
    random oracle directly: each distinct item is interned to a fresh
    exponent through a fixed bijection of [1, q-1]. One embedding instance
    is shared by the parties of a simulation run, which is exactly the
    random-oracle idealization the matching analysis assumes.
    """

    def __init__(self, group: GroupDesc):
        self.group = group
        self._intern: dict[bytes, GroupElement] = {}
        self._counter = 0
        # Stride must be coprime to q-1 for the interning walk to be bijective.
        self._stride = 48271
        while self.group.q - 1 > 1 and _gcd(self._stride, self.group.q - 1) != 1:
            self._stride += 2

    def embed(self, item: bytes) -> GroupElement:
        if self.group.kind == "strong":
            exp = int.from_bytes(prf(b"hash-to-group", item), "big") % (self.group.q - 1) + 1
            return generator_exp(self.group, exp)
        elem = self._intern.get(item)
        if elem is None:
            if self._counter >= self.group.q - 1:
                raise GroupError("toy embedding exhausted the subgroup")
            exp = self._counter * self._stride % (self.group.q - 1) + 1
            self._counter += 1
            elem = generator_exp(self.group, exp)
            self._intern[item] = elem
        return elem


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a
