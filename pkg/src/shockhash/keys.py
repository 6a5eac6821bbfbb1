"""Master hashing and derived hash functions.

Every input key is reduced once to a 128-bit master hash code; all later
hashing (leaf candidate cells, splitting hashes, bucket assignment, the
retrieval rows) derives from that code and a seed in constant time. The
master hash function is identified by MASTER_HASH_ID in the serialized
descriptor header so descriptors are portable.
"""

import hashlib
import struct
from typing import NamedTuple

import numpy as np

from ._kernels import kernels as K
from ._kernels import _pure
from .errors import InvalidParameterError

# blake2b truncated to 128 bits, keyed by the salt.
MASTER_HASH_ID = 1

MASK64 = _pure.MASK64


class HashedKey(NamedTuple):
    """128-bit master hash code of an input key."""

    hi: int
    lo: int


class Seed(NamedTuple):
    """Hash-function seed; searches try 0, 1, 2, ... and keep the minimum."""

    value: int


def master_hash(key: bytes, salt: int = 0) -> HashedKey:
    """Hash an arbitrary byte string to its 128-bit master code."""
    digest = hashlib.blake2b(key, digest_size=16, salt=struct.pack("<QQ", salt & MASK64, 0)).digest()
    hi, lo = struct.unpack("<QQ", digest)
    return HashedKey(hi, lo)


def master_hash_many(keys, salt: int = 0):
    """Master-hash a sequence of byte strings into (hi, lo) uint64 arrays."""
    n = len(keys)
    hi = np.zeros(n, dtype=np.uint64)
    lo = np.zeros(n, dtype=np.uint64)
    salt_bytes = struct.pack("<QQ", salt & MASK64, 0)
    blake2b = hashlib.blake2b
    unpack = struct.unpack
    for i, key in enumerate(keys):
        h, l = unpack("<QQ", blake2b(key, digest_size=16, salt=salt_bytes).digest())
        hi[i] = h
        lo[i] = l
    return hi, lo


def leaf_hash(k: HashedKey, s, which: int, n: int) -> int:
    """Candidate cell of a key in a leaf of n cells, for hash function 0 or 1."""
    if not 1 <= n <= 64:
        raise InvalidParameterError(f"leaf size must be in 1..64, got {n}")
    if which not in (0, 1):
        raise InvalidParameterError(f"which must be 0 or 1, got {which}")
    seed = s.value if isinstance(s, Seed) else int(s)
    h0, h1 = K.leaf_pair(int(k.hi), int(k.lo), seed, n)
    return h1 if which else h0


def split_hash(k: HashedKey, s, part_sizes) -> int:
    """Part index under a splitting hash with the prescribed part sizes."""
    sizes = list(part_sizes)
    if not sizes:
        raise InvalidParameterError("part sizes must be non-empty")
    if any(x <= 0 for x in sizes):
        raise InvalidParameterError("part sizes must be positive")
    m = sum(sizes)
    seed = s.value if isinstance(s, Seed) else int(s)
    r = K.hash_range(K.remix(int(k.hi), int(k.lo), seed, _pure.TAG_SPLIT), m)
    acc = 0
    for part, size in enumerate(sizes):
        acc += size
        if r < acc:
            return part
    raise AssertionError("unreachable")


def bucket_of(hi: int, lo: int, nbuckets: int) -> int:
    """Bucket assignment used by the outer framework."""
    return K.hash_range(K.remix(hi, lo, 0, _pure.TAG_BUCKET), nbuckets)


def synthetic_keys(count: int, gen_seed: int = 0):
    """Counter-based synthetic byte-string keys (distinct by construction)."""
    base = _pure.mix64(gen_seed)
    mix = _pure.mix64
    return [b"%016x" % mix((base + i) & MASK64) for i in range(count)]


def synthetic_hashed(count: int, gen_seed: int = 0):
    """Counter-based synthetic HashedKey arrays, skipping string materialization.

    Distinct by construction: the first word already is a bijection of the
    counter. Used by the experiment suite for random leaves.
    """
    base = np.uint64(_pure.mix64(gen_seed) ^ 0x5851F42D4C957F2D)
    idx = np.arange(count, dtype=np.uint64)
    hi = _pure.mix64_batch(base + np.uint64(2) * idx)
    lo = _pure.mix64_batch(base + np.uint64(2) * idx + np.uint64(1))
    return hi, lo
