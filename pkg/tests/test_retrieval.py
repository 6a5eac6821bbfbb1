import numpy as np
import pytest

from shockhash import errors, retrieval
from shockhash.keys import HashedKey, synthetic_hashed


def random_pairs(n, gen_seed):
    hi, lo = synthetic_hashed(n, gen_seed)
    bits = (hi & np.uint64(1)).astype(np.uint8)
    return [(HashedKey(int(a), int(b)), int(c)) for a, b, c in zip(hi, lo, bits)]


@pytest.mark.parametrize("n", [1, 2, 100, 5000])
def test_readback(n):
    pairs = random_pairs(n, n)
    sys = retrieval.retrieval_build(pairs)
    for k, bit in pairs:
        assert retrieval.retrieval_query(sys, k) == bit


def test_query_many_matches_scalar():
    pairs = random_pairs(2000, 9)
    sys = retrieval.retrieval_build(pairs)
    hi = np.array([k.hi for k, _ in pairs], dtype=np.uint64)
    lo = np.array([k.lo for k, _ in pairs], dtype=np.uint64)
    out = sys.query_many(hi, lo)
    for i, (k, bit) in enumerate(pairs):
        assert int(out[i]) == bit == sys.query(k)


def test_size_bound():
    # columns = max(band width, ceil((1+eps) n)); payload is one bit per column
    for n in (10, 1000, 100000):
        pairs = random_pairs(n, n + 3)
        sys = retrieval.retrieval_build(pairs)
        assert sys.size_bits == max(retrieval.BAND_WIDTH, int(np.ceil(1.05 * n)))
        if n >= 100000:
            assert sys.size_bits / n <= 1.06


def test_serialization_roundtrip():
    pairs = random_pairs(3000, 5)
    sys = retrieval.retrieval_build(pairs)
    blob = sys.serialize()
    sys2, off = retrieval.RibbonSystem.deserialize(blob)
    assert off == len(blob)
    assert sys2.m == sys.m and sys2.seed == sys.seed
    assert (sys2.words == sys.words).all()
    for k, bit in pairs[:100]:
        assert sys2.query(k) == bit


def test_deserialize_truncation():
    pairs = random_pairs(100, 1)
    blob = retrieval.retrieval_build(pairs).serialize()
    with pytest.raises(errors.FormatError):
        retrieval.RibbonSystem.deserialize(blob[:10])
    with pytest.raises(errors.FormatError):
        retrieval.RibbonSystem.deserialize(blob[:-8])


def test_invalid_epsilon():
    with pytest.raises(errors.InvalidParameterError):
        retrieval.retrieval_build(random_pairs(10, 0), epsilon=0.0)


def test_empty_system():
    sys = retrieval.retrieval_build([])
    assert sys.m == retrieval.BAND_WIDTH
    # queries on an empty system are arbitrary but in range
    assert sys.query(HashedKey(1, 2)) in (0, 1)


def test_arrays_entry_point():
    hi, lo = synthetic_hashed(500, 77)
    rhs = ((hi >> np.uint64(5)) & np.uint64(1)).astype(np.uint8)
    sys = retrieval.retrieval_build_arrays(hi, lo, rhs)
    assert (sys.query_many(hi, lo) == rhs).all()
