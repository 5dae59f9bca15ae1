"""Keyed pseudo-random function and canonical byte encodings.

The PRF is HMAC-SHA256: deterministic, 32-byte output, collision resistance
inherited from the underlying hash. Everything that needs a beacon, a daily
seed, or a token digest goes through here so byte-level outputs are
reproducible across runs and platforms.
"""

from __future__ import annotations

import hmac
import hashlib

DIGEST_LEN = 32

# Alias for readability: a Digest is always exactly 32 bytes.
Digest = bytes


def prf(key: bytes, message: bytes) -> Digest:
    """Evaluate the keyed PRF.

    Raises ValueError on an empty key; an empty key would collapse the
    keyed-function guarantee into a plain hash.
    """
    if not key:
        raise ValueError("prf key must be non-empty")
    return hmac.new(key, message, hashlib.sha256).digest()


def encode_u32(value: int) -> bytes:
    """Fixed-width big-endian encoding for slot and day indices."""
    if value < 0:
        raise ValueError("cannot encode negative index")
    return value.to_bytes(4, "big")


def encode_u64(value: int) -> bytes:
    if value < 0:
        raise ValueError("cannot encode negative index")
    return value.to_bytes(8, "big")
