"""Cuckoo filter: compact approximate set membership with no false negatives.

Partial-key cuckoo hashing after Fan et al.: four-slot buckets, the
alternate bucket index is i xor hash(fingerprint), bounded eviction on
insert. Fingerprint width is sized from the requested false-positive rate
(fpr <= 2 * bucket_size / 2^bits), defaulting to 16 bits.
"""

from __future__ import annotations

import hashlib
import math
import random


class CuckooCapacityError(RuntimeError):
    """Insertion failed after the eviction bound; the filter is overloaded."""


BUCKET_SIZE = 4
MAX_KICKS = 500
MAX_LOAD = 0.95


def _hash64(data: bytes, domain: bytes) -> int:
    return int.from_bytes(hashlib.sha256(domain + data).digest()[:8], "big")


class CuckooFilter:
    def __init__(self, capacity: int, fp_target: float = 2.0**-13):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        if not 0 < fp_target < 1:
            raise ValueError("fp_target must be in (0, 1)")
        # fpr bound ~ 2b / 2^f  =>  f = ceil(log2(2b / target))
        self.fingerprint_bits = max(8, math.ceil(math.log2(2 * BUCKET_SIZE / fp_target)))
        self.fp_target = fp_target
        self.capacity = capacity
        n = max(1, math.ceil(capacity / (BUCKET_SIZE * MAX_LOAD)))
        self.num_buckets = 1 << (n - 1).bit_length()
        self.buckets: list[list[int]] = [[] for _ in range(self.num_buckets)]
        self.count = 0
        # Eviction choices come from a filter-local rng so builds from the
        # same insertion sequence are identical.
        self._rng = random.Random(0x5EED)

    def _fingerprint(self, item: bytes) -> int:
        fp = _hash64(item, b"fp") % (1 << self.fingerprint_bits)
        return fp if fp != 0 else 1

    def _index(self, item: bytes) -> int:
        return _hash64(item, b"ix") % self.num_buckets

    def _alt_index(self, index: int, fp: int) -> int:
        return (index ^ _hash64(fp.to_bytes(8, "big"), b"alt")) % self.num_buckets

    def insert(self, item: bytes) -> None:
        if self.count >= self.capacity:
            raise CuckooCapacityError("filter at declared capacity")
        fp = self._fingerprint(item)
        i1 = self._index(item)
        i2 = self._alt_index(i1, fp)
        for i in (i1, i2):
            if len(self.buckets[i]) < BUCKET_SIZE:
                self.buckets[i].append(fp)
                self.count += 1
                return
        i = self._rng.choice((i1, i2))
        for _ in range(MAX_KICKS):
            j = self._rng.randrange(len(self.buckets[i]))
            self.buckets[i][j], fp = fp, self.buckets[i][j]
            i = self._alt_index(i, fp)
            if len(self.buckets[i]) < BUCKET_SIZE:
                self.buckets[i].append(fp)
                self.count += 1
                return
        raise CuckooCapacityError("eviction bound exceeded")

    def __contains__(self, item: bytes) -> bool:
        fp = self._fingerprint(item)
        i1 = self._index(item)
        i2 = self._alt_index(i1, fp)
        return fp in self.buckets[i1] or fp in self.buckets[i2]

    def serialized_size(self) -> int:
        """Size in bytes of the packed fingerprint array plus a small header."""
        return 16 + (self.num_buckets * BUCKET_SIZE * self.fingerprint_bits + 7) // 8


def cuckoo_build(items: set[bytes] | list[bytes], fp_target: float = 2.0**-13) -> CuckooFilter:
    """Build a filter over the item set; fails cleanly on overload."""
    items = sorted(set(items))
    filt = CuckooFilter(capacity=max(1, len(items)), fp_target=fp_target)
    for item in items:
        filt.insert(item)
    return filt


def cuckoo_query(filt: CuckooFilter, item: bytes) -> bool:
    return item in filt
