"""Minimal perfect hashing through overloaded binary cuckoo tables.

Leaves of up to 64 keys are solved by retrying hash seeds until the keys
form a pseudoforest on an equally sized table; a splitting tree over
buckets scales that to arbitrarily many keys, and a banded GF(2)
retrieval structure stores one choice bit per key.
"""

from ._kernels import BACKEND_NAME, HAS_COMPILED, get_backend
from .errors import (
    ConstructionFailureError,
    ContractViolationError,
    DuplicateKeyError,
    FormatError,
    HashCollisionError,
    InvalidParameterError,
    ShockHashError,
    UnsupportedLeafSizeError,
)
from .keys import HashedKey, Seed, master_hash, synthetic_keys
from .pseudoforest import UnionFindPF, count_orientations, is_pseudoforest, orient
from .recsplit import MphfDescriptor, build, build_hashed, plan
from .retrieval import RibbonSystem, retrieval_build, retrieval_query
from .shockhash import (
    MODE_PLAIN,
    MODE_ROTATE,
    MODE_ROTATE_CACHED,
    CellMask,
    LeafSolution,
    SearchStats,
    build_mask,
    query_leaf,
    search_plain,
    search_rotate,
    search_rotate_cached,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "HAS_COMPILED",
    "get_backend",
    "ShockHashError",
    "InvalidParameterError",
    "UnsupportedLeafSizeError",
    "ConstructionFailureError",
    "ContractViolationError",
    "DuplicateKeyError",
    "HashCollisionError",
    "FormatError",
    "HashedKey",
    "Seed",
    "master_hash",
    "synthetic_keys",
    "UnionFindPF",
    "is_pseudoforest",
    "orient",
    "count_orientations",
    "CellMask",
    "LeafSolution",
    "SearchStats",
    "build_mask",
    "search_plain",
    "search_rotate",
    "search_rotate_cached",
    "query_leaf",
    "MODE_PLAIN",
    "MODE_ROTATE",
    "MODE_ROTATE_CACHED",
    "RibbonSystem",
    "retrieval_build",
    "retrieval_query",
    "MphfDescriptor",
    "build",
    "build_hashed",
    "plan",
]
