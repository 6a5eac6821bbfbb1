import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shockhash import errors, recsplit
from shockhash.keys import synthetic_hashed, synthetic_keys
from shockhash.shockhash import MODE_PLAIN, MODE_ROTATE, MODE_ROTATE_CACHED


# ---------------------------------------------------------------------------
# Split tree plans


def test_plan_leaf_cases():
    assert recsplit.plan(0, 30) == ("leaf", 0)
    assert recsplit.plan(30, 30) == ("leaf", 30)
    assert recsplit.plan(16, 16) == ("leaf", 16)


def test_plan_small_leaf_binary():
    kind, sizes = recsplit.plan(100, 16)
    assert kind == "split" and len(sizes) == 2
    # left part aligned to 16-key units
    assert sizes[0] % 16 == 0 and sum(sizes) == 100


def test_plan_large_leaf_fanouts():
    assert recsplit.plan(120, 30) == ("split", (30, 30, 30, 30))
    assert recsplit.plan(100, 30) == ("split", (30, 30, 30, 10))
    kind, sizes = recsplit.plan(360, 30)
    assert kind == "split" and sizes == (120, 120, 120)
    kind, sizes = recsplit.plan(2000, 30)
    assert kind == "split" and len(sizes) == 2
    assert sizes[0] % 360 == 0


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 5000), st.integers(1, 64))
def test_plan_partition_invariants(m, n):
    node = recsplit.plan(m, n)
    if node[0] == "leaf":
        assert m <= n and node[1] == m
    else:
        sizes = node[1]
        assert sum(sizes) == m
        assert all(1 <= s < m for s in sizes)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3000), st.integers(1, 64))
def test_plan_terminates_and_covers(m, n):
    # recursive replay reaches only leaves of size <= n
    stack = [m]
    seen = 0
    while stack:
        cur = stack.pop()
        node = recsplit.plan(cur, n)
        if node[0] == "leaf":
            seen += node[1]
        else:
            stack.extend(node[1])
    assert seen == m


def test_flatten_plan_consistent_with_plan():
    leaf_g = np.arange(65, dtype=np.int64)
    kind, g, fanout, sizes_off, sizes_flat, subtree, m_node = recsplit.flatten_plan(2000, 30, leaf_g)
    assert m_node[0] == 2000
    assert subtree[0] == len(kind)
    # preorder: each split node is followed by its children's subtrees
    idx = 0

    def walk(i, m):
        node = recsplit.plan(m, 30)
        if node[0] == "leaf":
            assert kind[i] == 1 and m_node[i] == m
            return i + 1
        assert kind[i] == 0 and fanout[i] == len(node[1])
        off = int(sizes_off[i])
        assert tuple(sizes_flat[off : off + len(node[1])]) == node[1]
        j = i + 1
        for s in node[1]:
            j = walk(j, s)
        return j

    assert walk(0, 2000) == len(kind)


# ---------------------------------------------------------------------------
# Rice coding


def test_rice_trivial_examples():
    w = recsplit.BitWriter()
    w.rice(0, 0)
    assert w.bit_len == 1 and int(w.to_array()[0]) & 1 == 0
    w2 = recsplit.BitWriter()
    w2.rice(5, 2)
    # quotient 1 -> "10", remainder 1 -> bits 01 LSB-first
    assert w2.bit_len == 4
    assert int(w2.to_array()[0]) & 0xF == 0b0101


@settings(max_examples=500, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10**6), st.integers(0, 16)), min_size=1, max_size=50))
def test_rice_roundtrip_stream(items):
    w = recsplit.BitWriter()
    for x, g in items:
        w.rice(x, g)
    words = w.to_array()
    pos = 0
    for x, g in items:
        v, pos = recsplit.rice_decode(words, w.bit_len, pos, g)
        assert v == x
    assert pos == w.bit_len


def test_rice_truncation_raises():
    w = recsplit.BitWriter()
    w.rice(1000, 0)
    with pytest.raises(errors.FormatError):
        recsplit.rice_decode(w.to_array(), w.bit_len - 5, 0, 0)


def test_bitwriter_validation():
    w = recsplit.BitWriter()
    with pytest.raises(errors.InvalidParameterError):
        w.append(4, 2)
    with pytest.raises(errors.InvalidParameterError):
        w.rice(-1, 0)


def test_leaf_rice_param_model():
    assert recsplit.leaf_rice_param(0) == 0
    assert recsplit.leaf_rice_param(1) == 0
    # monotone growth roughly log2(e/2) per key
    gs = [recsplit.leaf_rice_param(m) for m in range(2, 65)]
    assert all(b >= a for a, b in zip(gs, gs[1:]))
    assert gs[-1] > 20


def test_split_rice_param_binary_even():
    # even split of 2m keys: success probability ~ sqrt(2/(pi m)), so the
    # parameter grows like 0.5 log2 m
    g1 = recsplit.split_rice_param(100, (50, 50))
    g2 = recsplit.split_rice_param(400, (200, 200))
    assert g2 - g1 in (0, 1, 2)
    assert 2 <= g1 <= 5


# ---------------------------------------------------------------------------
# Build and query


@pytest.mark.parametrize("mode", [MODE_PLAIN, MODE_ROTATE, MODE_ROTATE_CACHED])
def test_build_minimal_perfection_modes(mode):
    keys = synthetic_keys(3000, mode + 1)
    desc = recsplit.build(keys, 300, 20, mode)
    out = desc.query_many(keys)
    assert sorted(map(int, out)) == list(range(3000))


def test_single_key():
    desc = recsplit.build([b"only"], 100, 16)
    assert desc.query(b"only") == 0


def test_tiny_and_edge_sizes():
    for n_keys in (1, 2, 3, 17):
        keys = synthetic_keys(n_keys, n_keys)
        desc = recsplit.build(keys, 16, 8)
        assert sorted(desc.query_many(keys).tolist()) == list(range(n_keys))


def test_duplicate_keys_rejected():
    keys = synthetic_keys(100, 0)
    keys[50] = keys[10]
    with pytest.raises(errors.DuplicateKeyError) as ei:
        recsplit.build(keys, 50, 16)
    assert 50 in ei.value.lines


def test_build_validation():
    with pytest.raises(errors.InvalidParameterError):
        recsplit.build([], 100, 16)
    with pytest.raises(errors.InvalidParameterError):
        recsplit.build([b"a"], 100, 65)
    with pytest.raises(errors.InvalidParameterError):
        recsplit.build([b"a"], 8, 16)
    with pytest.raises(errors.InvalidParameterError):
        recsplit.build([b"a"], 100, 16, mode=7)


def test_non_member_queries_in_range():
    keys = synthetic_keys(2000, 3)
    desc = recsplit.build(keys, 500, 16)
    others = synthetic_keys(500, 999)
    out = desc.query_many(others)
    assert (out < 2000).all()


def test_placement_oracle():
    # construction-time placements must agree with query-time results
    hi, lo = synthetic_hashed(20000, 11)
    desc = recsplit.build_hashed(hi, lo, 1000, 24, MODE_ROTATE, record_placements=True)
    shi, slo, placements = desc.debug_placements
    out = desc.query_hashed_many(shi, slo)
    # leaf cell placements are bucket-global key indices
    assert (np.asarray(out, dtype=np.int64) == placements).all()


def test_serialization_roundtrip_query_identical():
    keys = synthetic_keys(5000, 21)
    desc = recsplit.build(keys, 500, 24)
    blob = desc.serialize()
    desc2 = recsplit.MphfDescriptor.deserialize(blob)
    assert (desc.query_many(keys) == desc2.query_many(keys)).all()
    assert desc2.serialize() == blob


def test_deserialize_rejects_corruption():
    keys = synthetic_keys(1000, 2)
    blob = bytearray(recsplit.build(keys, 100, 16).serialize())
    with pytest.raises(errors.FormatError):
        recsplit.MphfDescriptor.deserialize(b"XXXX" + bytes(blob[4:]))
    with pytest.raises(errors.FormatError):
        recsplit.MphfDescriptor.deserialize(bytes(blob[:30]))
    with pytest.raises(errors.FormatError):
        recsplit.MphfDescriptor.deserialize(bytes(blob) + b"\x00")
    bad = bytearray(blob)
    bad[4] = 99  # version
    with pytest.raises(errors.FormatError):
        recsplit.MphfDescriptor.deserialize(bytes(bad))


def test_stats_decomposition_sums():
    keys = synthetic_keys(4000, 5)
    desc = recsplit.build(keys, 400, 20)
    st = desc.stats()
    parts = st["seed_stream_bits"] + st["bucket_offset_bits"] + st["retrieval_bits"] + st["header_bits"]
    assert parts == st["total_bits"]
    assert st["bits_per_key"] == st["total_bits"] / 4000


def test_determinism():
    keys = synthetic_keys(3000, 9)
    a = recsplit.build(keys, 300, 20).serialize()
    b = recsplit.build(keys, 300, 20).serialize()
    assert a == b
    # input order must not matter: same key set, different order
    c = recsplit.build(list(reversed(keys)), 300, 20).serialize()
    assert a == c


def test_verify_detects_mismatched_keys():
    keys = synthetic_keys(1000, 14)
    desc = recsplit.build(keys, 100, 16)
    ok, offender = desc.verify(keys)
    assert ok and offender is None
    wrong = list(keys)
    wrong[3] = b"not-a-member"
    ok, offender = desc.verify(wrong)
    assert not ok


def test_offset_width_packs():
    keys = synthetic_keys(500, 4)
    desc = recsplit.build(keys, 100, 16)
    assert desc.offset_width == 32
