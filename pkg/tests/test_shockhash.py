import pytest
from hypothesis import given, settings, strategies as st

from shockhash import errors, pseudoforest
from shockhash import shockhash as sh
from shockhash._kernels import kernels as K
from conftest import hashed_leaf


def naive_min_seed(keys, n, max_seed):
    """Oracle: first seed whose edges form a pseudoforest, with no bit-mask
    filtering and an independent pseudoforest decision."""
    for s in range(max_seed):
        edges = [K.leaf_pair(int(k.hi), int(k.lo), s, n) for k in keys]
        if pseudoforest.count_orientations(edges, n) > 0:
            return s
    return -1


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
def test_search_plain_matches_naive_scan(n):
    for rep in range(40):
        keys = hashed_leaf(n, 1000 * n + rep)
        sol = sh.search_plain(keys, n)
        assert sol.encoded_seed == naive_min_seed(keys, n, 10**6)
        assert sh.verify_solution(keys, sol, n, sh.MODE_PLAIN)


def test_search_plain_n1():
    keys = hashed_leaf(1, 0)
    sol = sh.search_plain(keys, 1)
    assert sol.encoded_seed == 0
    assert sh.query_leaf(keys[0], 0, 1, sh.MODE_PLAIN, sol.choices[0][1]) == 0


@pytest.mark.parametrize("n", [2, 6, 10, 16, 20])
def test_search_rotate_solutions_verify(n):
    for rep in range(30):
        keys = hashed_leaf(n, 2000 * n + rep)
        sol = sh.search_rotate(keys, n)
        assert sh.verify_solution(keys, sol, n, sh.MODE_ROTATE)
        # encoded seed splits into base hash seed and rotation amount
        assert 0 <= sol.encoded_seed % n < n


@pytest.mark.parametrize("n", [20, 33, 40])
def test_search_rotate_cached_solutions_verify(n):
    for rep in range(15):
        keys = hashed_leaf(n, 3000 * n + rep)
        sol = sh.search_rotate_cached(keys, n)
        assert sh.verify_solution(keys, sol, n, sh.MODE_ROTATE_CACHED)


def test_rotate_cached_below_threshold_equals_rotate():
    # caching only engages above the leaf-size threshold
    n = sh.CACHE_MIN_LEAF
    for rep in range(10):
        keys = hashed_leaf(n, 77 + rep)
        a = sh.search_rotate(keys, n)
        b = sh.search_rotate_cached(keys, n)
        assert a.encoded_seed == b.encoded_seed


def test_rotate_cached_aligned_first_set():
    # above the threshold, the first set's hash seed is aligned down to a
    # multiple of the caching period
    n = 40
    for rep in range(10):
        keys = hashed_leaf(n, 40404 + rep)
        sol = sh.search_rotate_cached(keys, n, k=8)
        base = sol.encoded_seed // n
        sa = base - (base % 8)
        edges = sh._edges_rotate(keys, sol.encoded_seed, n, 8)
        for key, (u, v) in zip(keys, edges):
            if K.split_bit(int(key.hi), int(key.lo), sa) == 0:
                assert (u, v) == K.leaf_pair(int(key.hi), int(key.lo), sa, n)


def test_rotate_never_worse_base_than_plain():
    # rotation tries every rotation of each base seed, so its base count
    # never exceeds the plain seed for the same keys
    for rep in range(40):
        n = 12
        keys = hashed_leaf(n, 555 + rep)
        p = sh.search_plain(keys, n)
        r = sh.search_rotate(keys, n)
        assert r.encoded_seed // n <= p.encoded_seed


def test_build_mask_full_iff_cells_covered():
    n = 6
    keys = hashed_leaf(n, 42)
    mask = sh.build_mask(keys, 0, n)
    cells = set()
    for k in keys:
        h0, h1 = K.leaf_pair(int(k.hi), int(k.lo), 0, n)
        cells.add(h0)
        cells.add(h1)
    assert mask.full == (cells == set(range(n)))
    assert mask.bits == sum(1 << c for c in cells)


def test_mask_full_is_necessary_for_success():
    # a successful seed always has a full candidate mask
    for rep in range(30):
        n = 10
        keys = hashed_leaf(n, 900 + rep)
        sol = sh.search_plain(keys, n)
        assert sh.build_mask(keys, sol.encoded_seed, n).full


def test_search_stats_counters():
    n = 12
    keys = hashed_leaf(n, 8)
    sol = sh.search_plain(keys, n)
    st = sol.stats
    trials = sol.encoded_seed + 1
    assert st.hash_evals == trials * n
    assert st.exact_checks <= st.filter_passes <= trials
    assert st.filter_passes >= 1


def test_parameter_validation():
    keys = hashed_leaf(4, 0)
    with pytest.raises(errors.UnsupportedLeafSizeError):
        sh.search_plain(keys, 65)
    with pytest.raises(errors.InvalidParameterError):
        sh.search_plain(keys, 5)
    with pytest.raises(errors.InvalidParameterError):
        sh.search_rotate_cached(keys, 4, k=0)
    with pytest.raises(errors.InvalidParameterError):
        sh.search(keys, 4, mode=9)
    with pytest.raises(errors.InvalidParameterError):
        sh.query_leaf(keys[0], 0, 4, 9, 0)


def test_search_failure_raises():
    # this leaf's minimum plain seed is 2, so a cutoff of 1 must fail
    keys = hashed_leaf(8, 0)
    with pytest.raises(errors.ConstructionFailureError):
        sh.search_plain(keys, 8, max_seed=1)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32))
def test_query_leaf_consistent_with_edges(n, gen):
    keys = hashed_leaf(n, gen)
    sol = sh.search(keys, n, sh.MODE_ROTATE)
    edges = sh._edges_rotate(keys, sol.encoded_seed, n, 0)
    for (key, bit), (u, v) in zip(sol.choices, edges):
        assert sh.query_leaf(key, sol.encoded_seed, n, sh.MODE_ROTATE, bit) == (v if bit else u)
