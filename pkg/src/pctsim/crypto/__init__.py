from .prf import Digest, prf, encode_u32, encode_u64
from .group import (
    GroupDesc,
    GroupElement,
    Scalar,
    GroupError,
    TOY_GROUP,
    MINI_TOY_GROUP,
    STRONG_GROUP,
    make_group,
    group_for_kind,
    derive_scalar,
    group_exp,
    generator_exp,
    dh_shared,
    blind_pow,
    unblind_pow,
    random_scalar,
    scalar_inverse,
    discrete_log,
    GroupEmbedding,
)
from .tokens import (
    ordered_token,
    ordered_token_pair,
    randomized_receipt,
    receipt_matches,
    DegenerateEncounterError,
)
from .cuckoo import CuckooFilter, CuckooCapacityError, cuckoo_build, cuckoo_query

__all__ = [
    "Digest",
    "prf",
    "encode_u32",
    "encode_u64",
    "GroupDesc",
    "GroupElement",
    "Scalar",
    "GroupError",
    "TOY_GROUP",
    "MINI_TOY_GROUP",
    "STRONG_GROUP",
    "make_group",
    "group_for_kind",
    "derive_scalar",
    "group_exp",
    "generator_exp",
    "dh_shared",
    "blind_pow",
    "unblind_pow",
    "random_scalar",
    "scalar_inverse",
    "discrete_log",
    "GroupEmbedding",
    "ordered_token",
    "ordered_token_pair",
    "randomized_receipt",
    "receipt_matches",
    "DegenerateEncounterError",
    "CuckooFilter",
    "CuckooCapacityError",
    "cuckoo_build",
    "cuckoo_query",
]
