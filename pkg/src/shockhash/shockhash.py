"""Leaf seed search: overloaded binary cuckoo tables by retry.

A leaf holds n keys and n cells. For each seed, every key gets two
candidate cells; the seed is usable iff the induced multigraph is a
pseudoforest. A word-wide bit mask (all cells hit by some candidate)
filters out most seeds before the exact union-find check. Rotation
fitting squeezes roughly n seed candidates out of each batch of hash
evaluations by cyclically rotating one half of the mask.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import pseudoforest
from ._kernels import kernels as K
from .errors import (
    ConstructionFailureError,
    InvalidParameterError,
    UnsupportedLeafSizeError,
)
from .keys import HashedKey, Seed, leaf_hash

MODE_PLAIN = 0
MODE_ROTATE = 1
MODE_ROTATE_CACHED = 2

MODE_NAMES = {MODE_PLAIN: "plain", MODE_ROTATE: "rotate", MODE_ROTATE_CACHED: "rotate-cached"}
MODE_IDS = {v: k for k, v in MODE_NAMES.items()}

DEFAULT_CACHE_K = 8
# Below this leaf size the k-aligned hash caching is skipped entirely.
CACHE_MIN_LEAF = 32

# Seed search cutoff; hit only on broken inputs, not by bad luck.
MAX_SEED = 1 << 40


@dataclass
class SearchStats:
    """Instrumentation counters for one seed search."""

    hash_evals: int = 0
    filter_passes: int = 0
    exact_checks: int = 0
    a_evals: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.hash_evals += other.hash_evals
        self.filter_passes += other.filter_passes
        self.exact_checks += other.exact_checks
        self.a_evals += other.a_evals


@dataclass
class CellMask:
    """Occupancy mask of candidate cells; bit j set iff cell j is hit."""

    bits: int
    n: int

    @property
    def full(self) -> bool:
        return self.bits == (1 << self.n) - 1


@dataclass
class LeafSolution:
    """Successful leaf seed plus the per-key choice bits it implies."""

    encoded_seed: int
    choices: List[Tuple[HashedKey, int]]
    stats: SearchStats = field(default_factory=SearchStats)


def _check_leaf(keys, n):
    if not 1 <= n <= 64:
        raise UnsupportedLeafSizeError(f"leaf size must be in 1..64, got {n}")
    if len(keys) != n:
        raise InvalidParameterError(f"expected {n} keys, got {len(keys)}")


def build_mask(keys, s, n: int) -> CellMask:
    """OR of both candidate-cell bits of every key."""
    if n > 64:
        raise UnsupportedLeafSizeError(f"leaf size must be <= 64, got {n}")
    seed = s.value if isinstance(s, Seed) else int(s)
    bits = 0
    for k in keys:
        h0, h1 = K.leaf_pair(int(k.hi), int(k.lo), seed, n)
        bits |= (1 << h0) | (1 << h1)
    return CellMask(bits, n)


def _edges_plain(keys, seed, n):
    return [K.leaf_pair(int(k.hi), int(k.lo), seed, n) for k in keys]


def _edges_rotate(keys, q, n, cache_k):
    """Reconstruct the per-key candidate cells for an encoded rotate seed."""
    base = q // n
    r = q % n
    sa = base - (base % cache_k) if cache_k else base
    edges = []
    for k in keys:
        hi = int(k.hi)
        lo = int(k.lo)
        if K.split_bit(hi, lo, sa) == 0:
            edges.append(K.leaf_pair(hi, lo, sa, n))
        else:
            h0, h1 = K.leaf_pair(hi, lo, base, n)
            edges.append(((h0 + r) % n, (h1 + r) % n))
    return edges


def _finish(keys, q, edges, n, stats) -> LeafSolution:
    ori = pseudoforest.orient(edges, n)
    choices = [(k, ori[i]) for i, k in enumerate(keys)]
    return LeafSolution(q, choices, stats)


def search_plain(keys, n: int, max_seed: int = MAX_SEED) -> LeafSolution:
    """Minimum plain seed whose induced graph is a pseudoforest."""
    _check_leaf(keys, n)
    hi = [int(k.hi) for k in keys]
    lo = [int(k.lo) for k in keys]
    q, evals, passes, checks, a_evals = K.search_plain(hi, lo, n, max_seed)
    stats = SearchStats(evals, passes, checks, a_evals)
    if q < 0:
        raise ConstructionFailureError(f"no pseudoforest seed below {max_seed} for n={n}")
    return _finish(keys, q, _edges_plain(keys, q, n), n, stats)


def search_rotate(keys, n: int, max_seed: int = MAX_SEED) -> LeafSolution:
    """Rotation-fitting search; encoded_seed = base * n + rotation."""
    _check_leaf(keys, n)
    hi = [int(k.hi) for k in keys]
    lo = [int(k.lo) for k in keys]
    q, evals, passes, checks, a_evals = K.search_rotate(hi, lo, n, 0, max_seed)
    stats = SearchStats(evals, passes, checks, a_evals)
    if q < 0:
        raise ConstructionFailureError(f"no rotate seed below {max_seed} for n={n}")
    return _finish(keys, q, _edges_rotate(keys, q, n, 0), n, stats)


def search_rotate_cached(keys, n: int, k: int = DEFAULT_CACHE_K, max_seed: int = MAX_SEED) -> LeafSolution:
    """Rotation fitting with the first set's hashes cached across k base seeds.

    Caching only engages for n > 32; below that the plain rotate search is
    already hash-bound on the second set and the aligned seed would just
    cost extra misses at query time.
    """
    _check_leaf(keys, n)
    if k < 1:
        raise InvalidParameterError(f"caching period must be >= 1, got {k}")
    cache_k = k if n > CACHE_MIN_LEAF else 0
    hi = [int(kk.hi) for kk in keys]
    lo = [int(kk.lo) for kk in keys]
    q, evals, passes, checks, a_evals = K.search_rotate(hi, lo, n, cache_k, max_seed)
    stats = SearchStats(evals, passes, checks, a_evals)
    if q < 0:
        raise ConstructionFailureError(f"no rotate seed below {max_seed} for n={n}")
    return _finish(keys, q, _edges_rotate(keys, q, n, cache_k), n, stats)


def search(keys, n: int, mode: int, cache_k: int = DEFAULT_CACHE_K, max_seed: int = MAX_SEED) -> LeafSolution:
    """Mode-dispatching front end used by the outer framework."""
    if mode == MODE_PLAIN:
        return search_plain(keys, n, max_seed)
    if mode == MODE_ROTATE:
        return search_rotate(keys, n, max_seed)
    if mode == MODE_ROTATE_CACHED:
        return search_rotate_cached(keys, n, cache_k, max_seed)
    raise InvalidParameterError(f"unknown mode {mode}")


def query_leaf(k: HashedKey, encoded_seed: int, n: int, mode: int, choice: int, cache_k: int = DEFAULT_CACHE_K) -> int:
    """Cell of one key given its externally stored choice bit."""
    if mode not in MODE_NAMES:
        raise InvalidParameterError(f"unknown mode {mode}")
    ck = cache_k if mode == MODE_ROTATE_CACHED else 0
    return K.leaf_cell(int(k.hi), int(k.lo), encoded_seed, n, mode, ck, choice)


def verify_solution(keys, sol: LeafSolution, n: int, mode: int, cache_k: int = DEFAULT_CACHE_K) -> bool:
    """True iff querying every key with its stored choice bit is a bijection."""
    cells = [query_leaf(k, sol.encoded_seed, n, mode, bit, cache_k) for k, bit in sol.choices]
    return sorted(cells) == list(range(n))
