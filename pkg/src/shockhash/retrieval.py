"""Global 1-bit static function storage.

Each (key, bit) pair becomes one row of a banded GF(2) system: a start
column derived from the key, a 128-bit pattern with the low bit forced to
one, and the stored bit as right-hand side. Solving the system once gives
a bit vector; a query reads back the parity of (pattern AND solution
window). Linearly dependent rows occasionally make the system unsolvable,
in which case the whole structure is rebuilt with the next seed.
"""

import struct
from typing import List, Optional, Tuple

import numpy as np

from ._kernels import kernels as K
from ._kernels import _pure
from .errors import ConstructionFailureError, FormatError, InvalidParameterError
from .keys import HashedKey

BAND_WIDTH = _pure.RIBBON_W
DEFAULT_EPSILON = 0.05
RETRY_CAP = 64

# Fixed-point scale for serializing epsilon.
_EPS_SCALE = 1 << 16


def _columns(n: int, epsilon: float) -> int:
    # The band must fit even for tiny inputs.
    return max(BAND_WIDTH, int(np.ceil((1.0 + epsilon) * n)))


class RibbonSystem:
    """Solved banded system answering 1-bit queries for the stored keys."""

    def __init__(self, epsilon: float, seed: int, m: int, words: np.ndarray):
        self.epsilon = epsilon
        self.seed = seed
        self.m = m
        self.words = words

    def query(self, k: HashedKey) -> int:
        hi = int(k.hi)
        lo = int(k.lo)
        s = K.hash_range(K.remix(hi, lo, self.seed, _pure.TAG_RSTART), self.m - BAND_WIDTH + 1)
        p = (K.remix(hi, lo, self.seed, _pure.TAG_RPAT0) | 1) | (K.remix(hi, lo, self.seed, _pure.TAG_RPAT1) << 64)
        return bin(_pure._sol_window(self.words, s) & p).count("1") & 1

    def query_many(self, hi, lo) -> np.ndarray:
        hi = np.asarray(hi, dtype=np.uint64)
        lo = np.asarray(lo, dtype=np.uint64)
        starts, pat0, pat1 = K.ribbon_rows(hi, lo, self.seed, self.m)
        return K.ribbon_query_many(starts, pat0, pat1, self.words, self.m)

    @property
    def size_bits(self) -> int:
        """Payload bits: the solution vector only (parameters are header)."""
        return self.m

    def serialize(self) -> bytes:
        out = bytearray()
        out += struct.pack("<IQQ", int(round(self.epsilon * _EPS_SCALE)), self.seed, self.m)
        out += self.words.tobytes()
        return bytes(out)

    @classmethod
    def deserialize(cls, buf: bytes, offset: int = 0) -> Tuple["RibbonSystem", int]:
        if len(buf) - offset < 20:
            raise FormatError("truncated retrieval block")
        eps_fp, seed, m = struct.unpack_from("<IQQ", buf, offset)
        offset += 20
        nwords = (m + 63) // 64
        nbytes = nwords * 8
        if len(buf) - offset < nbytes:
            raise FormatError("truncated retrieval solution vector")
        words = np.frombuffer(buf[offset : offset + nbytes], dtype="<u8").copy()
        return cls(eps_fp / _EPS_SCALE, seed, m, words), offset + nbytes


def retrieval_build(pairs: List[Tuple[HashedKey, int]], epsilon: float = DEFAULT_EPSILON) -> RibbonSystem:
    """Build a solved system from distinct keys and their bits."""
    if epsilon <= 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    n = len(pairs)
    m = _columns(n, epsilon)
    hi = np.fromiter((int(k.hi) for k, _ in pairs), dtype=np.uint64, count=n)
    lo = np.fromiter((int(k.lo) for k, _ in pairs), dtype=np.uint64, count=n)
    rhs = np.fromiter((b & 1 for _, b in pairs), dtype=np.uint8, count=n)
    return retrieval_build_arrays(hi, lo, rhs, epsilon)


def retrieval_build_arrays(hi, lo, rhs, epsilon: float = DEFAULT_EPSILON) -> RibbonSystem:
    """Array-based build used by the outer framework (no tuple boxing)."""
    if epsilon <= 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    hi = np.asarray(hi, dtype=np.uint64)
    lo = np.asarray(lo, dtype=np.uint64)
    rhs = np.asarray(rhs, dtype=np.uint8)
    m = _columns(len(hi), epsilon)
    for seed in range(RETRY_CAP):
        starts, pat0, pat1 = K.ribbon_rows(hi, lo, seed, m)
        words = K.ribbon_solve(starts, pat0, pat1, rhs, m)
        if words is not None:
            return RibbonSystem(epsilon, seed, m, np.asarray(words, dtype=np.uint64))
    raise ConstructionFailureError(f"retrieval system unsolvable after {RETRY_CAP} seeds (n={len(hi)}, m={m})")


def retrieval_query(sys: RibbonSystem, k: HashedKey) -> int:
    return sys.query(k)
