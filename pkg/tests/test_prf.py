"""Keyed PRF basics."""

import hashlib
import hmac as hmac_mod

import pytest

from pctsim.crypto import prf, encode_u32


def test_deterministic():
    assert prf(b"k", b"m") == prf(b"k", b"m")


def test_distinct_inputs_distinct_outputs():
    assert prf(b"k", b"m") != prf(b"k", b"m\x00")
    assert prf(b"k", b"m") != prf(b"k2", b"m")


def test_empty_key_rejected():
    with pytest.raises(ValueError):
        prf(b"", b"m")


def test_output_is_32_bytes():
    assert len(prf(b"seed", b"message")) == 32


def test_matches_standard_keyed_hash():
    # The beacon construction is plain HMAC-SHA256 over the slot encoding.
    seed, slot = b"user-seed", 77
    assert prf(seed, encode_u32(slot)) == hmac_mod.new(
        seed, slot.to_bytes(4, "big"), hashlib.sha256
    ).digest()


def test_encode_u32_fixed_width_big_endian():
    assert encode_u32(1) == b"\x00\x00\x00\x01"
    with pytest.raises(ValueError):
        encode_u32(-1)
