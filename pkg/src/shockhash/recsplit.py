"""Outer minimal-perfect-hash framework.

Keys are hashed once, assigned to buckets of expected size b, and every
bucket is recursively split by retried splitting hashes until the pieces
are small enough for the leaf seed search. Only hash seeds are stored,
Golomb-Rice coded in preorder; the tree shape itself is a pure function
of the bucket size and is replayed at query time. Per-key choice bits go
into one global 1-bit retrieval structure built after all leaves.
"""

import math
import struct
import time
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import retrieval as retrieval_mod
from . import shockhash as leaf_mod
from ._kernels import kernels as K
from ._kernels import _pure
from .errors import (
    ConstructionFailureError,
    DuplicateKeyError,
    FormatError,
    HashCollisionError,
    InvalidParameterError,
)
from .keys import MASTER_HASH_ID, HashedKey, master_hash, master_hash_many

MAGIC = b"SHKH"
VERSION = 1
SALT_RETRY_CAP = 16

LOG2_E_HALF = math.log2(math.e / 2.0)
LOG2_E = math.log2(math.e)
HALF_LOG2_PI = 0.5 * math.log2(math.pi)


# ---------------------------------------------------------------------------
# Split tree plans


def plan(m: int, n: int):
    """Shape of one tree node: ("leaf", m) or ("split", part sizes).

    Pure in (m, n) so queries replay the tree from sizes alone. Small
    leaves use a binary tree aligned to n-key units; larger leaves get a
    fanout-4 level of exact-n parts, a fanout-3 level of 4n parts, and
    binary splits aligned to 12n above that.
    """
    if m < 0:
        raise InvalidParameterError(f"node size must be >= 0, got {m}")
    if m <= n:
        return ("leaf", m)
    if n <= 24:
        unit = n
    else:
        if m <= 4 * n:
            return ("split", _exact_parts(m, n))
        if m <= 12 * n:
            return ("split", _exact_parts(m, 4 * n))
        unit = 12 * n
    left = unit * ((m + 2 * unit - 1) // (2 * unit))
    left = min(max(left, 1), m - 1)
    return ("split", (left, m - left))


def _exact_parts(m: int, part: int) -> Tuple[int, ...]:
    full, rem = divmod(m, part)
    return tuple([part] * full + ([rem] if rem else []))


@lru_cache(maxsize=None)
def _plan_nodes(m: int, n: int):
    """Preorder node list [(kind, m, sizes, subtree_count)] for one size."""
    node = plan(m, n)
    if node[0] == "leaf":
        return (("leaf", m, (), 1),)
    sizes = node[1]
    out = []
    total = 1
    children = []
    for part in sizes:
        sub = _plan_nodes(part, n)
        children.append(sub)
        total += sub[0][3]
    out.append(("split", m, sizes, total))
    for sub in children:
        out.extend(sub)
    return tuple(out)


def flatten_plan(m: int, n: int, leaf_g):
    """Numpy plan arrays consumed by the kernel query loop."""
    nodes = _plan_nodes(m, n)
    count = len(nodes)
    kind = np.zeros(count, dtype=np.int64)
    g = np.zeros(count, dtype=np.int64)
    fanout = np.zeros(count, dtype=np.int64)
    sizes_off = np.zeros(count, dtype=np.int64)
    subtree = np.zeros(count, dtype=np.int64)
    m_node = np.zeros(count, dtype=np.int64)
    flat: List[int] = []
    for i, (k, mn, sizes, sub) in enumerate(nodes):
        m_node[i] = mn
        subtree[i] = sub
        if k == "leaf":
            kind[i] = 1
            g[i] = leaf_g[mn]
        else:
            kind[i] = 0
            g[i] = split_rice_param(mn, sizes)
            fanout[i] = len(sizes)
            sizes_off[i] = len(flat)
            flat.extend(sizes)
    sizes_flat = np.asarray(flat or [0], dtype=np.int64)
    return kind, g, fanout, sizes_off, sizes_flat, subtree, m_node


# ---------------------------------------------------------------------------
# Rice coding


class BitWriter:
    """Append-only bit stream, LSB-first within little-endian 64-bit words."""

    def __init__(self):
        self.words: List[int] = []
        self.bit_len = 0

    def append(self, value: int, nbits: int) -> None:
        if nbits < 0 or value < 0 or (nbits < value.bit_length()):
            raise InvalidParameterError(f"cannot append {value} in {nbits} bits")
        pos = self.bit_len
        self.bit_len += nbits
        while (self.bit_len + 63) // 64 > len(self.words):
            self.words.append(0)
        i = pos >> 6
        sh = pos & 63
        self.words[i] |= (value << sh) & _pure.MASK64
        if sh + nbits > 64:
            self.words[i + 1] |= value >> (64 - sh)

    def append_unary(self, q: int) -> None:
        # q ones, then a terminating zero
        while q >= 63:
            self.append((1 << 63) - 1, 63)
            q -= 63
        self.append((1 << q) - 1, q + 1)

    def rice(self, x: int, g: int) -> None:
        if x < 0 or g < 0:
            raise InvalidParameterError(f"rice({x}, {g}) out of domain")
        self.append_unary(x >> g)
        if g:
            self.append(x & ((1 << g) - 1), g)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.words, dtype=np.uint64)


def rice_encode(writer: BitWriter, x: int, g: int) -> None:
    writer.rice(x, g)


def rice_decode(words, bit_len: int, pos: int, g: int) -> Tuple[int, int]:
    """Decode one value; returns (value, next bit position)."""
    return _pure.rice_decode_stream(words, bit_len, pos, g)


def leaf_rice_param(m: int) -> int:
    """Rice parameter for leaf seeds of size m.

    Model: expected 1-based seed about (e/2)^m * e / sqrt(pi * m); the
    sqrt(m) divisor tracks the measured trial counts, which beat the
    analytical bound by roughly that factor. One model covers plain and
    rotation modes since the encoded rotation seed spans base * m values.
    """
    if m <= 1:
        return 0
    t = m * LOG2_E_HALF + LOG2_E - HALF_LOG2_PI - 0.5 * math.log2(m)
    return max(0, int(t))


@lru_cache(maxsize=None)
def split_rice_param(m: int, sizes: Tuple[int, ...]) -> int:
    """Rice parameter for a splitting seed: floor(log2 expected trials).

    The success probability is the exact multinomial mass of hitting the
    prescribed part sizes.
    """
    logp = math.lgamma(m + 1)
    for s in sizes:
        logp -= math.lgamma(s + 1)
        logp += s * (math.log(s) - math.log(m))
    g = -logp / math.log(2.0)
    return max(0, int(g))


# ---------------------------------------------------------------------------
# Descriptor


class MphfDescriptor:
    """Finished minimal perfect hash function."""

    def __init__(
        self,
        n_keys: int,
        b: int,
        n: int,
        mode: int,
        cache_k: int,
        salt: int,
        leaf_g: np.ndarray,
        key_prefix: np.ndarray,
        bit_offsets: np.ndarray,
        stream_words: np.ndarray,
        stream_bit_len: int,
        ribbon: Optional[retrieval_mod.RibbonSystem],
    ):
        self.n_keys = n_keys
        self.b = b
        self.n = n
        self.mode = mode
        self.cache_k = cache_k
        self.salt = salt
        self.leaf_g = leaf_g
        self.key_prefix = key_prefix
        self.bit_offsets = bit_offsets
        self.stream_words = stream_words
        self.stream_bit_len = stream_bit_len
        self.ribbon = ribbon
        self._plans: Dict[int, tuple] = {}
        self.build_stats: Optional[dict] = None
        self.debug_placements = None

    @property
    def nbuckets(self) -> int:
        return len(self.key_prefix) - 1

    def _plans_for(self, sizes) -> Dict[int, tuple]:
        for s in sizes:
            s = int(s)
            if s > 0 and s not in self._plans:
                self._plans[s] = flatten_plan(s, self.n, self.leaf_g)
        return self._plans

    def query_hashed_many(self, hi, lo) -> np.ndarray:
        hi = np.asarray(hi, dtype=np.uint64)
        lo = np.asarray(lo, dtype=np.uint64)
        plans = self._plans_for(np.unique(np.diff(self.key_prefix)))
        if self.ribbon is not None:
            rib_seed, rib_m, rib_words = self.ribbon.seed, self.ribbon.m, self.ribbon.words
        else:
            rib_seed, rib_m, rib_words = 0, 0, np.zeros(1, dtype=np.uint64)
        out = K.query_stream(
            hi,
            lo,
            self.nbuckets,
            self.key_prefix,
            self.bit_offsets,
            self.stream_words,
            self.stream_bit_len,
            plans,
            self.mode,
            self.cache_k if self.mode == leaf_mod.MODE_ROTATE_CACHED else 0,
            rib_seed,
            rib_m,
            rib_words,
        )
        # Keys landing in an empty trailing bucket would map to n_keys.
        return np.minimum(out, np.uint64(max(self.n_keys - 1, 0)))

    def query_hashed(self, k: HashedKey) -> int:
        return int(self.query_hashed_many([int(k.hi)], [int(k.lo)])[0])

    def query(self, key: bytes) -> int:
        return self.query_hashed(master_hash(key, self.salt))

    def query_many(self, keys) -> np.ndarray:
        hi, lo = master_hash_many(keys, self.salt)
        return self.query_hashed_many(hi, lo)

    # -- serialization ------------------------------------------------------

    @property
    def offset_width(self) -> int:
        """Packed width of each offset field; 32 when every prefix sum and
        bit offset fits, else 64. Declared in the header."""
        return 32 if self.n_keys < 2**32 and self.stream_bit_len < 2**32 else 64

    def serialize(self) -> bytes:
        width = self.offset_width
        out = bytearray()
        out += MAGIC
        out += struct.pack("<HBQIBBBBQ", VERSION, MASTER_HASH_ID, self.n_keys, self.b, self.n, self.mode, self.cache_k, width, self.salt)
        out += struct.pack("<B", len(self.leaf_g) - 1)
        out += bytes(int(x) for x in self.leaf_g[1:])
        fmt = "<II" if width == 32 else "<QQ"
        for i in range(self.nbuckets + 1):
            out += struct.pack(fmt, int(self.key_prefix[i]), int(self.bit_offsets[i]))
        out += struct.pack("<Q", self.stream_bit_len)
        out += self.stream_words.tobytes()
        out += self.ribbon.serialize()
        return bytes(out)

    @classmethod
    def deserialize(cls, buf: bytes) -> "MphfDescriptor":
        if buf[:4] != MAGIC:
            raise FormatError("bad magic")
        off = 4
        try:
            version, hash_id, n_keys, b, n, mode, cache_k, offset_width, salt = struct.unpack_from("<HBQIBBBBQ", buf, off)
        except struct.error as e:
            raise FormatError("truncated header") from e
        off += struct.calcsize("<HBQIBBBBQ")
        if version != VERSION:
            raise FormatError(f"unsupported version {version}")
        if hash_id != MASTER_HASH_ID:
            raise FormatError(f"unsupported master hash id {hash_id}")
        if offset_width not in (32, 64):
            raise FormatError(f"unsupported offset width {offset_width}")
        if not 1 <= n <= 64 or mode not in leaf_mod.MODE_NAMES:
            raise FormatError("invalid parameters in header")
        (gcount,) = struct.unpack_from("<B", buf, off)
        off += 1
        if gcount != n or len(buf) < off + gcount:
            raise FormatError("bad rice parameter table")
        leaf_g = np.zeros(n + 1, dtype=np.int64)
        leaf_g[1:] = np.frombuffer(buf[off : off + gcount], dtype=np.uint8)
        off += gcount
        nbuckets = (n_keys + b - 1) // b if n_keys else 1
        need = (nbuckets + 1) * 2 * (offset_width // 8)
        if len(buf) < off + need:
            raise FormatError("truncated bucket offsets")
        dtype = "<u4" if offset_width == 32 else "<u8"
        pairs = np.frombuffer(buf[off : off + need], dtype=dtype).reshape(nbuckets + 1, 2)
        key_prefix = pairs[:, 0].astype(np.uint64)
        bit_offsets = pairs[:, 1].astype(np.uint64)
        off += need
        if len(buf) < off + 8:
            raise FormatError("truncated seed stream length")
        (bit_len,) = struct.unpack_from("<Q", buf, off)
        off += 8
        nwords = (bit_len + 63) // 64
        if len(buf) < off + nwords * 8:
            raise FormatError("truncated seed stream")
        words = np.frombuffer(buf[off : off + nwords * 8], dtype="<u8").copy()
        off += nwords * 8
        ribbon, off = retrieval_mod.RibbonSystem.deserialize(buf, off)
        if off != len(buf):
            raise FormatError("trailing bytes after descriptor")
        if int(key_prefix[0]) != 0 or int(key_prefix[-1]) != n_keys:
            raise FormatError("inconsistent bucket prefix sums")
        return cls(n_keys, b, n, mode, cache_k, salt, leaf_g, key_prefix, bit_offsets, words, bit_len, ribbon)

    # -- reporting ----------------------------------------------------------

    def stats(self) -> dict:
        total = len(self.serialize()) * 8
        offset_bits = (self.nbuckets + 1) * 2 * self.offset_width
        stream_bits = len(self.stream_words) * 64
        retrieval_bits = ((self.ribbon.m + 63) // 64) * 64
        # Everything that is not one of the three payload arrays counts as
        # header, so the decomposition sums to the serialized size exactly.
        header_bits = total - offset_bits - stream_bits - retrieval_bits
        report = {
            "n_keys": self.n_keys,
            "total_bits": total,
            "bits_per_key": total / self.n_keys if self.n_keys else float("nan"),
            "seed_stream_bits": stream_bits,
            "bucket_offset_bits": offset_bits,
            "retrieval_bits": retrieval_bits,
            "header_bits": header_bits,
        }
        if self.build_stats:
            report.update(self.build_stats)
        return report

    def verify(self, keys) -> Tuple[bool, Optional[bytes]]:
        """Check that the key set maps exactly onto {0, ..., N-1}."""
        out = self.query_many(keys)
        if len(out) != self.n_keys:
            return False, None
        seen = np.zeros(self.n_keys, dtype=bool)
        for i, v in enumerate(out):
            v = int(v)
            if v >= self.n_keys or seen[v]:
                return False, keys[i]
            seen[v] = True
        return True, None


# ---------------------------------------------------------------------------
# Construction


def _find_duplicates(keys) -> List[int]:
    seen: Dict[bytes, int] = {}
    lines = []
    for i, k in enumerate(keys):
        if k in seen:
            lines.append(i)
        else:
            seen[k] = i
    return lines


def build(
    keys,
    b: int,
    n: int,
    mode: int = leaf_mod.MODE_ROTATE,
    cache_k: int = leaf_mod.DEFAULT_CACHE_K,
    epsilon: float = retrieval_mod.DEFAULT_EPSILON,
    record_placements: bool = False,
) -> MphfDescriptor:
    """Build a minimal perfect hash function over distinct byte-string keys."""
    n_keys = len(keys)
    if n_keys == 0:
        raise InvalidParameterError("key set must be non-empty")
    if not 1 <= n <= 64:
        raise InvalidParameterError(f"leaf size must be in 1..64, got {n}")
    if b < n:
        raise InvalidParameterError(f"bucket size {b} must be >= leaf size {n}")
    if mode not in leaf_mod.MODE_NAMES:
        raise InvalidParameterError(f"unknown mode {mode}")

    t_start = time.perf_counter()
    for salt in range(SALT_RETRY_CAP):
        hi, lo = master_hash_many(keys, salt)
        order = np.lexsort((lo, hi))
        shi = hi[order]
        slo = lo[order]
        dup = (shi[1:] == shi[:-1]) & (slo[1:] == slo[:-1])
        if not dup.any():
            break
        # Same 128-bit code: either duplicate inputs or a hash collision.
        lines = _find_duplicates(keys)
        if lines:
            raise DuplicateKeyError(f"{len(lines)} duplicate key(s), first at line {lines[0] + 1}", lines)
    else:
        raise HashCollisionError(f"master hash collisions persist after {SALT_RETRY_CAP} salts")

    return _build_hashed(hi, lo, n_keys, b, n, mode, cache_k, epsilon, salt, t_start, record_placements)


def build_hashed(
    hi,
    lo,
    b: int,
    n: int,
    mode: int = leaf_mod.MODE_ROTATE,
    cache_k: int = leaf_mod.DEFAULT_CACHE_K,
    epsilon: float = retrieval_mod.DEFAULT_EPSILON,
    record_placements: bool = False,
) -> MphfDescriptor:
    """Build directly from 128-bit codes (must be distinct); used for
    synthetic corpora where string materialization is pointless."""
    hi = np.asarray(hi, dtype=np.uint64)
    lo = np.asarray(lo, dtype=np.uint64)
    if not 1 <= n <= 64:
        raise InvalidParameterError(f"leaf size must be in 1..64, got {n}")
    if b < n:
        raise InvalidParameterError(f"bucket size {b} must be >= leaf size {n}")
    if mode not in leaf_mod.MODE_NAMES:
        raise InvalidParameterError(f"unknown mode {mode}")
    return _build_hashed(hi, lo, len(hi), b, n, mode, cache_k, epsilon, 0, time.perf_counter(), record_placements)


def _build_hashed(hi, lo, n_keys, b, n, mode, cache_k, epsilon, salt, t_start, record_placements):
    nbuckets = (n_keys + b - 1) // b
    bucket = K.hash_range_batch(K.remix_batch(hi, lo, 0, _pure.TAG_BUCKET), nbuckets).astype(np.int64)
    order = np.lexsort((lo, hi, bucket))
    shi = hi[order]
    slo = lo[order]
    sbucket = bucket[order]
    counts = np.bincount(sbucket, minlength=nbuckets)
    key_prefix = np.zeros(nbuckets + 1, dtype=np.uint64)
    key_prefix[1:] = np.cumsum(counts)

    leaf_g = np.zeros(n + 1, dtype=np.int64)
    for m in range(1, n + 1):
        leaf_g[m] = leaf_rice_param(m)

    ck = cache_k if mode == leaf_mod.MODE_ROTATE_CACHED else 0
    writer = BitWriter()
    bit_offsets = np.zeros(nbuckets + 1, dtype=np.uint64)
    choice_bits = np.zeros(n_keys, dtype=np.uint8)
    placements = np.zeros(n_keys, dtype=np.int64) if record_placements else None
    agg = leaf_mod.SearchStats()
    split_seed_bits = 0
    leaf_seed_bits = 0
    n_leaves = 0

    for bu in range(nbuckets):
        bit_offsets[bu] = writer.bit_len
        start = int(key_prefix[bu])
        end = int(key_prefix[bu + 1])
        if end == start:
            continue
        stack = [(start, end)]
        # Explicit preorder walk; left-to-right children.
        while stack:
            s0, s1 = stack.pop()
            m = s1 - s0
            node = plan(m, n)
            if node[0] == "leaf":
                before = writer.bit_len
                _build_leaf(shi, slo, s0, s1, n, mode, ck, writer, leaf_g, choice_bits, placements, start, agg)
                leaf_seed_bits += writer.bit_len - before
                n_leaves += 1
            else:
                sizes = node[1]
                before = writer.bit_len
                _build_split(shi, slo, s0, s1, sizes, writer, stack)
                split_seed_bits += writer.bit_len - before
    bit_offsets[nbuckets] = writer.bit_len

    ribbon = retrieval_mod.retrieval_build_arrays(shi, slo, choice_bits, epsilon)

    desc = MphfDescriptor(
        n_keys,
        b,
        n,
        mode,
        cache_k,
        salt,
        leaf_g,
        key_prefix,
        bit_offsets,
        writer.to_array(),
        writer.bit_len,
        ribbon,
    )
    desc.build_stats = {
        "build_seconds": time.perf_counter() - t_start,
        "hash_evals": agg.hash_evals,
        "filter_passes": agg.filter_passes,
        "exact_checks": agg.exact_checks,
        "leaf_count": n_leaves,
        "leaf_seed_bits": leaf_seed_bits,
        "split_seed_bits": split_seed_bits,
    }
    if record_placements:
        desc.debug_placements = (shi.copy(), slo.copy(), placements)
    return desc


def _build_split(shi, slo, s0, s1, sizes, writer, stack):
    seed, evals = K.split_seed_search(shi[s0:s1], slo[s0:s1], list(sizes), leaf_mod.MAX_SEED)
    if seed < 0:
        raise ConstructionFailureError("split seed search exhausted")
    writer.rice(seed, split_rice_param(s1 - s0, tuple(sizes)))
    parts = K.split_parts(shi[s0:s1], slo[s0:s1], seed, list(sizes))
    order = np.argsort(parts, kind="stable")
    shi[s0:s1] = shi[s0:s1][order]
    slo[s0:s1] = slo[s0:s1][order]
    # Push right-to-left so the left child is processed first.
    bounds = [s0]
    for sz in sizes:
        bounds.append(bounds[-1] + sz)
    for i in range(len(sizes) - 1, -1, -1):
        stack.append((bounds[i], bounds[i + 1]))


def _build_leaf(shi, slo, s0, s1, n, mode, ck, writer, leaf_g, choice_bits, placements, bucket_start, agg):
    m = s1 - s0
    khi = [int(x) for x in shi[s0:s1]]
    klo = [int(x) for x in slo[s0:s1]]
    if mode == leaf_mod.MODE_PLAIN:
        q, evals, passes, checks, a_evals = K.search_plain(khi, klo, m, leaf_mod.MAX_SEED)
    else:
        q, evals, passes, checks, a_evals = K.search_rotate(khi, klo, m, ck if m > leaf_mod.CACHE_MIN_LEAF else 0, leaf_mod.MAX_SEED)
    if q < 0:
        raise ConstructionFailureError(f"leaf seed search exhausted (m={m})")
    agg.merge(leaf_mod.SearchStats(evals, passes, checks, a_evals))
    writer.rice(q, int(leaf_g[m]))
    hk = [HashedKey(a, b_) for a, b_ in zip(khi, klo)]
    if mode == leaf_mod.MODE_PLAIN:
        edges = leaf_mod._edges_plain(hk, q, m)
    else:
        edges = leaf_mod._edges_rotate(hk, q, m, ck if m > leaf_mod.CACHE_MIN_LEAF else 0)
    from . import pseudoforest

    ori = pseudoforest.orient(edges, m)
    for i in range(m):
        choice_bits[s0 + i] = ori[i]
        if placements is not None:
            u, v = edges[i]
            placements[s0 + i] = (s0 - bucket_start) + (v if ori[i] else u) + bucket_start
