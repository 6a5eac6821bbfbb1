# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirror of ``_pure`` with the hot loops in C. Differential tests compare
every exported function against the pure backend bit for bit.
"""

import numpy as np

cimport cython
from libc.stdint cimport int64_t, uint8_t, uint32_t, uint64_t
from libc.stdlib cimport free, malloc

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

NAME = "compiled"

MASK64 = 0xFFFFFFFFFFFFFFFF
RIBBON_W = 128

DEF GOLDEN_C = 0x9E3779B97F4A7C15
DEF MUL1_C = 0xBF58476D1CE4E5B9
DEF MUL2_C = 0x94D049BB133111EB

TAG_LEAF = 1
TAG_SPLITBIT = 2
TAG_SPLIT = 3
TAG_BUCKET = 4
TAG_RSTART = 5
TAG_RPAT0 = 6
TAG_RPAT1 = 7

DEF T_LEAF = 1
DEF T_SPLITBIT = 2
DEF T_SPLIT = 3
DEF T_BUCKET = 4
DEF T_RSTART = 5
DEF T_RPAT0 = 6
DEF T_RPAT1 = 7


cdef inline uint64_t c_mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>MUL1_C
    z = (z ^ (z >> 27)) * <uint64_t>MUL2_C
    return z ^ (z >> 31)


cdef inline uint64_t c_seed_mixer(uint64_t seed, uint64_t tag) noexcept nogil:
    return c_mix64(seed + tag * <uint64_t>GOLDEN_C)


cdef inline uint64_t c_remix(uint64_t hi, uint64_t lo, uint64_t seed, uint64_t tag) noexcept nogil:
    return c_mix64(c_mix64(hi ^ c_seed_mixer(seed, tag)) ^ lo)


cdef inline uint64_t c_range(uint64_t v, uint64_t m) noexcept nogil:
    return ((v >> 32) * m) >> 32


def mix64(z):
    return c_mix64(<uint64_t>(z & 0xFFFFFFFFFFFFFFFF))


def seed_mixer(seed, tag):
    return c_seed_mixer(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <uint64_t>tag)


def remix(hi, lo, seed, tag):
    return c_remix(<uint64_t>hi, <uint64_t>lo, <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <uint64_t>tag)


def hash_range(v, m):
    return c_range(<uint64_t>v, <uint64_t>m)


cdef inline void c_leaf_pair(uint64_t hi, uint64_t lo, uint64_t seed, int n, int* h0, int* h1) noexcept nogil:
    cdef uint64_t v
    cdef int a, b
    if n == 1:
        h0[0] = 0
        h1[0] = 0
        return
    v = c_remix(hi, lo, seed, T_LEAF)
    a = <int>(((v >> 32) * <uint64_t>n) >> 32)
    b = <int>(((v & <uint64_t>0xFFFFFFFFu) * <uint64_t>(n - 1)) >> 32)
    if b >= a:
        b += 1
    h0[0] = a
    h1[0] = b


def leaf_pair(hi, lo, seed, n):
    cdef int h0, h1
    c_leaf_pair(<uint64_t>hi, <uint64_t>lo, <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <int>n, &h0, &h1)
    return h0, h1


def split_bit(hi, lo, seed):
    return c_remix(<uint64_t>hi, <uint64_t>lo, <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), T_SPLITBIT) >> 63


def mix64_batch(z):
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MUL1_C)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MUL2_C)
    return z ^ (z >> np.uint64(31))


def remix_batch(hi, lo, seed, tag):
    x = np.uint64(c_seed_mixer(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <uint64_t>tag))
    return mix64_batch(mix64_batch(np.asarray(hi, dtype=np.uint64) ^ x) ^ np.asarray(lo, dtype=np.uint64))


def hash_range_batch(v, m):
    return ((v >> np.uint64(32)) * np.uint64(m)) >> np.uint64(32)


# ---------------------------------------------------------------------------
# Union-find on at most 64 cells (stack-allocated)


cdef struct UF64:
    int parent[64]
    int size[64]
    uint8_t pseudo[64]


cdef inline void uf_reset(UF64* uf, int n) noexcept nogil:
    cdef int i
    for i in range(n):
        uf.parent[i] = i
        uf.size[i] = 1
        uf.pseudo[i] = 0


cdef inline int uf_find(UF64* uf, int x) noexcept nogil:
    cdef int root = x
    cdef int nxt
    while uf.parent[root] != root:
        root = uf.parent[root]
    while uf.parent[x] != root:
        nxt = uf.parent[x]
        uf.parent[x] = root
        x = nxt
    return root


cdef inline int uf_insert(UF64* uf, int u, int v) noexcept nogil:
    cdef int ru = uf_find(uf, u)
    cdef int rv = uf_find(uf, v)
    cdef int t
    if ru == rv:
        if uf.pseudo[ru]:
            return 0
        uf.pseudo[ru] = 1
        return 1
    if uf.pseudo[ru] and uf.pseudo[rv]:
        return 0
    if uf.size[ru] < uf.size[rv]:
        t = ru
        ru = rv
        rv = t
    uf.parent[rv] = ru
    uf.size[ru] += uf.size[rv]
    if uf.pseudo[rv]:
        uf.pseudo[ru] = 1
    return 1


cdef inline int pf_accepts(UF64* uf, int* h0s, int* h1s, int n) noexcept nogil:
    cdef int i
    uf_reset(uf, n)
    for i in range(n):
        if not uf_insert(uf, h0s[i], h1s[i]):
            return 0
    return 1


# ---------------------------------------------------------------------------
# Leaf seed searches


def search_plain(hi, lo, n, max_seed):
    cdef int nn = <int>n
    if nn == 1:
        return 0, 1, 1, 1, 0
    hi_a = np.ascontiguousarray(np.asarray(hi, dtype=np.uint64))
    lo_a = np.ascontiguousarray(np.asarray(lo, dtype=np.uint64))
    cdef uint64_t[::1] hv = hi_a
    cdef uint64_t[::1] lv = lo_a
    cdef uint64_t full = (<uint64_t>1 << nn) - 1 if nn < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    cdef uint64_t khi[64]
    cdef uint64_t klo[64]
    cdef int h0s[64]
    cdef int h1s[64]
    cdef UF64 uf
    cdef uint64_t x, v, mask
    cdef int64_t s, ms = <int64_t>max_seed
    cdef long long evals = 0, passes = 0, checks = 0
    cdef int i, a, b
    cdef int64_t found = -1
    for i in range(nn):
        khi[i] = hv[i]
        klo[i] = lv[i]
    with nogil:
        for s in range(ms):
            x = c_seed_mixer(<uint64_t>s, T_LEAF)
            mask = 0
            for i in range(nn):
                v = c_mix64(c_mix64(khi[i] ^ x) ^ klo[i])
                a = <int>(((v >> 32) * <uint64_t>nn) >> 32)
                b = <int>(((v & <uint64_t>0xFFFFFFFFu) * <uint64_t>(nn - 1)) >> 32)
                if b >= a:
                    b += 1
                h0s[i] = a
                h1s[i] = b
                mask |= (<uint64_t>1 << a) | (<uint64_t>1 << b)
            evals += nn
            if mask != full:
                continue
            passes += 1
            checks += 1
            if pf_accepts(&uf, h0s, h1s, nn):
                found = s
                break
    return found, evals, passes, checks, 0


cdef inline uint64_t rotl_n(uint64_t mask, int r, int n, uint64_t full) noexcept nogil:
    if r == 0:
        return mask
    return ((mask << r) | (mask >> (n - r))) & full


def search_rotate(hi, lo, n, cache_k, max_seed):
    cdef int nn = <int>n
    if nn == 1:
        return 0, 1, 1, 1, 0
    hi_a = np.ascontiguousarray(np.asarray(hi, dtype=np.uint64))
    lo_a = np.ascontiguousarray(np.asarray(lo, dtype=np.uint64))
    cdef uint64_t[::1] hv = hi_a
    cdef uint64_t[::1] lv = lo_a
    cdef int nkeys = hi_a.shape[0]
    cdef uint64_t full = (<uint64_t>1 << nn) - 1 if nn < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    cdef uint64_t khi[64]
    cdef uint64_t klo[64]
    cdef int a_idx[64]
    cdef int b_idx[64]
    cdef int a0[64]
    cdef int a1[64]
    cdef int b0[64]
    cdef int b1[64]
    cdef int h0s[64]
    cdef int h1s[64]
    cdef UF64 uf
    cdef int na = 0, nb = 0
    cdef uint64_t mask_a = 0, mask_b, rot, xb, xa, xg, v
    cdef int64_t base, q = -1, ck = <int64_t>cache_k, ms = <int64_t>max_seed
    cdef int64_t max_base = ms // nn + 1
    cdef int64_t sa
    cdef long long evals = 0, passes = 0, checks = 0, a_evals = 0
    cdef int i, j, r, h0, h1, done = 0
    for i in range(nkeys):
        khi[i] = hv[i]
        klo[i] = lv[i]
    with nogil:
        for base in range(max_base):
            if ck > 0:
                sa = base - (base % ck)
            else:
                sa = base
            if base == 0 or ck == 0 or base % ck == 0:
                xb = c_seed_mixer(<uint64_t>sa, T_SPLITBIT)
                xa = c_seed_mixer(<uint64_t>sa, T_LEAF)
                na = 0
                nb = 0
                mask_a = 0
                for i in range(nkeys):
                    if c_mix64(c_mix64(khi[i] ^ xb) ^ klo[i]) >> 63:
                        b_idx[nb] = i
                        nb += 1
                    else:
                        a_idx[na] = i
                        na += 1
                evals += nkeys
                for j in range(na):
                    i = a_idx[j]
                    v = c_mix64(c_mix64(khi[i] ^ xa) ^ klo[i])
                    h0 = <int>(((v >> 32) * <uint64_t>nn) >> 32)
                    h1 = <int>(((v & <uint64_t>0xFFFFFFFFu) * <uint64_t>(nn - 1)) >> 32)
                    if h1 >= h0:
                        h1 += 1
                    a0[j] = h0
                    a1[j] = h1
                    mask_a |= (<uint64_t>1 << h0) | (<uint64_t>1 << h1)
                evals += na
                a_evals += na
            xg = c_seed_mixer(<uint64_t>base, T_LEAF)
            mask_b = 0
            for j in range(nb):
                i = b_idx[j]
                v = c_mix64(c_mix64(khi[i] ^ xg) ^ klo[i])
                h0 = <int>(((v >> 32) * <uint64_t>nn) >> 32)
                h1 = <int>(((v & <uint64_t>0xFFFFFFFFu) * <uint64_t>(nn - 1)) >> 32)
                if h1 >= h0:
                    h1 += 1
                b0[j] = h0
                b1[j] = h1
                mask_b |= (<uint64_t>1 << h0) | (<uint64_t>1 << h1)
            evals += nb
            for r in range(nn):
                rot = rotl_n(mask_b, r, nn, full)
                if (mask_a | rot) != full:
                    continue
                passes += 1
                checks += 1
                for j in range(na):
                    h0s[j] = a0[j]
                    h1s[j] = a1[j]
                for j in range(nb):
                    h0s[na + j] = (b0[j] + r) % nn
                    h1s[na + j] = (b1[j] + r) % nn
                if pf_accepts(&uf, h0s, h1s, nkeys):
                    q = base * nn + r
                    if q >= ms:
                        q = -1
                    done = 1
                    break
            if done:
                break
    return q, evals, passes, checks, a_evals


def search_bruteforce(hi, lo, n, max_seed):
    cdef int nn = <int>n
    hi_a = np.ascontiguousarray(np.asarray(hi, dtype=np.uint64))
    lo_a = np.ascontiguousarray(np.asarray(lo, dtype=np.uint64))
    cdef uint64_t[::1] hv = hi_a
    cdef uint64_t[::1] lv = lo_a
    cdef uint64_t full = (<uint64_t>1 << nn) - 1 if nn < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    cdef uint64_t khi[64]
    cdef uint64_t klo[64]
    cdef uint64_t x, v, mask, bit
    cdef int64_t s, ms = <int64_t>max_seed, found = -1
    cdef long long evals = 0
    cdef int i, ok
    for i in range(nn):
        khi[i] = hv[i]
        klo[i] = lv[i]
    with nogil:
        for s in range(ms):
            x = c_seed_mixer(<uint64_t>s, T_LEAF)
            mask = 0
            ok = 1
            for i in range(nn):
                v = c_mix64(c_mix64(khi[i] ^ x) ^ klo[i])
                bit = <uint64_t>1 << c_range(v, <uint64_t>nn)
                if mask & bit:
                    ok = 0
                    evals += i + 1
                    break
                mask |= bit
            if ok:
                evals += nn
                if mask == full:
                    found = s
                    break
    return found, evals


# ---------------------------------------------------------------------------
# Splitting seed search


def split_parts(hi, lo, seed, sizes):
    m = int(sum(sizes))
    bounds = np.cumsum(np.asarray(sizes, dtype=np.int64))
    r = hash_range_batch(remix_batch(hi, lo, seed, T_SPLIT), m)
    return np.searchsorted(bounds, r.astype(np.int64), side="right").astype(np.int64)


def split_seed_search(hi, lo, sizes, max_seed):
    hi_a = np.ascontiguousarray(np.asarray(hi, dtype=np.uint64))
    lo_a = np.ascontiguousarray(np.asarray(lo, dtype=np.uint64))
    sizes_a = np.ascontiguousarray(np.asarray(sizes, dtype=np.int64))
    cdef uint64_t[::1] hv = hi_a
    cdef uint64_t[::1] lv = lo_a
    cdef int64_t[::1] sv = sizes_a
    cdef int m = hv.shape[0]
    cdef int fanout = sv.shape[0]
    cdef int64_t bounds[64]
    cdef int64_t counts[64]
    cdef int64_t acc = 0
    cdef int i, part, ok
    cdef uint64_t x, v
    cdef int64_t r
    cdef int64_t s, ms = <int64_t>max_seed, found = -1
    cdef long long evals = 0
    if fanout > 64:
        raise ValueError("fanout too large")
    for i in range(fanout):
        acc += sv[i]
        bounds[i] = acc
    with nogil:
        for s in range(ms):
            x = c_seed_mixer(<uint64_t>s, T_SPLIT)
            for i in range(fanout):
                counts[i] = 0
            ok = 1
            for i in range(m):
                v = c_mix64(c_mix64(hv[i] ^ x) ^ lv[i])
                r = <int64_t>(((v >> 32) * <uint64_t>m) >> 32)
                part = 0
                while r >= bounds[part]:
                    part += 1
                counts[part] += 1
                if counts[part] > sv[part]:
                    ok = 0
                    evals += i + 1
                    break
            if ok:
                evals += m
                found = s
                break
    return found, evals


# ---------------------------------------------------------------------------
# Banded GF(2) solver


def ribbon_rows(hi, lo, seed, m):
    starts = hash_range_batch(remix_batch(hi, lo, seed, T_RSTART), m - RIBBON_W + 1)
    pat0 = remix_batch(hi, lo, seed, T_RPAT0) | np.uint64(1)
    pat1 = remix_batch(hi, lo, seed, T_RPAT1)
    return starts.astype(np.int64), pat0, pat1


def ribbon_solve(starts, pat0, pat1, rhs, m):
    starts_a = np.ascontiguousarray(np.asarray(starts, dtype=np.int64))
    p0_a = np.ascontiguousarray(np.asarray(pat0, dtype=np.uint64))
    p1_a = np.ascontiguousarray(np.asarray(pat1, dtype=np.uint64))
    rhs_a = np.ascontiguousarray(np.asarray(rhs, dtype=np.uint8))
    cdef int64_t[::1] sv = starts_a
    cdef uint64_t[::1] p0v = p0_a
    cdef uint64_t[::1] p1v = p1_a
    cdef uint8_t[::1] rv = rhs_a
    cdef int64_t mm = <int64_t>m
    cdef int64_t nrows = sv.shape[0]
    slot_p0_a = np.zeros(mm, dtype=np.uint64)
    slot_p1_a = np.zeros(mm, dtype=np.uint64)
    slot_b_a = np.zeros(mm, dtype=np.uint8)
    occ_a = np.zeros(mm, dtype=np.uint8)
    sol_a = np.zeros(mm, dtype=np.uint8)
    cdef uint64_t[::1] sp0 = slot_p0_a
    cdef uint64_t[::1] sp1 = slot_p1_a
    cdef uint8_t[::1] sb = slot_b_a
    cdef uint8_t[::1] occ = occ_a
    cdef uint8_t[::1] sol = sol_a
    cdef u128 p, q
    cdef uint64_t lo64, hi64
    cdef int64_t idx, s, j
    cdef int b, t, bad = 0
    cdef uint8_t acc
    with nogil:
        for idx in range(nrows):
            s = sv[idx]
            p = (<u128>p1v[idx] << 64) | <u128>p0v[idx]
            b = rv[idx]
            while True:
                if not occ[s]:
                    occ[s] = 1
                    sp0[s] = <uint64_t>p
                    sp1[s] = <uint64_t>(p >> 64)
                    sb[s] = <uint8_t>b
                    break
                p = p ^ ((<u128>sp1[s] << 64) | <u128>sp0[s])
                b = b ^ sb[s]
                if p == 0:
                    if b:
                        bad = 1
                    break
                lo64 = <uint64_t>p
                if lo64:
                    t = __builtin_ctzll(lo64)
                else:
                    t = 64 + __builtin_ctzll(<uint64_t>(p >> 64))
                p = p >> t
                s += t
            if bad:
                break
        if not bad:
            for s in range(mm - 1, -1, -1):
                if not occ[s]:
                    continue
                p = (<u128>sp1[s] << 64) | <u128>sp0[s]
                acc = sb[s]
                p = p >> 1
                j = s + 1
                while p != 0:
                    lo64 = <uint64_t>p
                    if lo64:
                        t = __builtin_ctzll(lo64)
                    else:
                        t = 64 + __builtin_ctzll(<uint64_t>(p >> 64))
                    p = p >> t
                    j += t
                    acc = acc ^ sol[j]
                    p = p >> 1
                    j += 1
                sol[s] = acc
    if bad:
        return None
    nwords = (mm + 63) // 64
    words_a = np.zeros(nwords, dtype=np.uint64)
    cdef uint64_t[::1] wv = words_a
    with nogil:
        for s in range(mm):
            if sol[s]:
                wv[s >> 6] |= <uint64_t>1 << (s & 63)
    return words_a


cdef inline u128 window128(const uint64_t* words, int64_t nwords, int64_t s) noexcept nogil:
    cdef int64_t i = s >> 6
    cdef int sh = <int>(s & 63)
    cdef u128 v = 0
    if i < nwords:
        v = <u128>words[i] >> sh
    if sh:
        if i + 1 < nwords:
            v |= <u128>words[i + 1] << (64 - sh)
        if i + 2 < nwords:
            v |= <u128>words[i + 2] << (128 - sh)
    else:
        if i + 1 < nwords:
            v |= <u128>words[i + 1] << 64
    return v


cdef inline int parity128(u128 v) noexcept nogil:
    return (__builtin_popcountll(<uint64_t>v) + __builtin_popcountll(<uint64_t>(v >> 64))) & 1


def ribbon_query_many(starts, pat0, pat1, words, m):
    starts_a = np.ascontiguousarray(np.asarray(starts, dtype=np.int64))
    p0_a = np.ascontiguousarray(np.asarray(pat0, dtype=np.uint64))
    p1_a = np.ascontiguousarray(np.asarray(pat1, dtype=np.uint64))
    words_a = np.ascontiguousarray(np.asarray(words, dtype=np.uint64))
    cdef int64_t[::1] sv = starts_a
    cdef uint64_t[::1] p0v = p0_a
    cdef uint64_t[::1] p1v = p1_a
    cdef uint64_t[::1] wv = words_a
    cdef int64_t nrows = sv.shape[0]
    cdef int64_t nwords = wv.shape[0]
    out_a = np.zeros(nrows, dtype=np.uint8)
    cdef uint8_t[::1] out = out_a
    cdef int64_t idx
    cdef u128 p, w
    with nogil:
        for idx in range(nrows):
            w = window128(&wv[0], nwords, sv[idx])
            p = (<u128>p1v[idx] << 64) | <u128>p0v[idx]
            out[idx] = <uint8_t>parity128(w & p)
    return out_a


# ---------------------------------------------------------------------------
# Bit-stream decoding


cdef int c_rice_decode(const uint64_t* words, int64_t bit_len, int64_t* pos, int g, int64_t* out) noexcept nogil:
    """Returns 0 on success, 1 on overrun."""
    cdef int64_t q = 0, p = pos[0]
    cdef int64_t i, avail
    cdef int sh, t
    cdef uint64_t chunk, inv
    cdef int64_t nwords = (bit_len + 63) >> 6
    while True:
        if p >= bit_len:
            return 1
        i = p >> 6
        sh = <int>(p & 63)
        chunk = words[i] >> sh
        if sh and i + 1 < nwords:
            chunk |= words[i + 1] << (64 - sh)
        avail = bit_len - p
        if avail > 64:
            avail = 64
        inv = ~chunk
        if inv:
            t = __builtin_ctzll(inv)
        else:
            t = 64
        if t >= avail:
            if avail == 64 and chunk == <uint64_t>0xFFFFFFFFFFFFFFFF:
                q += avail
                p += avail
                continue
            if avail < 64 and (chunk & ((<uint64_t>1 << avail) - 1)) == ((<uint64_t>1 << avail) - 1):
                q += avail
                p += avail
                continue
        q += t
        p += t + 1
        break
    cdef uint64_t rem = 0
    if g:
        if p + g > bit_len:
            return 1
        i = p >> 6
        sh = <int>(p & 63)
        chunk = words[i] >> sh
        if sh and i + 1 < nwords:
            chunk |= words[i + 1] << (64 - sh)
        rem = chunk & ((<uint64_t>1 << g) - 1)
        p += g
    out[0] = (q << g) | <int64_t>rem
    pos[0] = p
    return 0


def rice_decode_stream(words, bit_len, pos, g):
    words_a = np.ascontiguousarray(np.asarray(words, dtype=np.uint64))
    cdef uint64_t[::1] wv = words_a
    cdef int64_t p = <int64_t>pos
    cdef int64_t out = 0
    if c_rice_decode(&wv[0], <int64_t>bit_len, &p, <int>g, &out):
        from ..errors import FormatError

        raise FormatError("bit stream overrun")
    return int(out), int(p)


# ---------------------------------------------------------------------------
# Batch MPHF query


def query_stream(
    hi,
    lo,
    nbuckets,
    key_prefix,
    bit_offsets,
    stream_words,
    stream_bit_len,
    plans,
    mode,
    cache_k,
    rib_seed,
    rib_m,
    rib_words,
):
    hi_a = np.ascontiguousarray(np.asarray(hi, dtype=np.uint64))
    lo_a = np.ascontiguousarray(np.asarray(lo, dtype=np.uint64))
    kp_a = np.ascontiguousarray(np.asarray(key_prefix, dtype=np.uint64))
    bo_a = np.ascontiguousarray(np.asarray(bit_offsets, dtype=np.uint64))
    sw_a = np.ascontiguousarray(np.asarray(stream_words, dtype=np.uint64))
    rw_a = np.ascontiguousarray(np.asarray(rib_words, dtype=np.uint64))
    cdef uint64_t[::1] hv = hi_a
    cdef uint64_t[::1] lv = lo_a
    cdef uint64_t[::1] kp = kp_a
    cdef uint64_t[::1] bo = bo_a
    cdef uint64_t[::1] sw = sw_a
    cdef uint64_t[::1] rw = rw_a
    cdef int64_t nkeys = hv.shape[0]
    cdef int64_t nb = <int64_t>nbuckets
    cdef int64_t bit_len = <int64_t>stream_bit_len
    cdef int64_t rwords = rw.shape[0]
    cdef int cmode = <int>mode
    cdef int64_t cck = <int64_t>cache_k
    cdef uint64_t rseed = <uint64_t>rib_seed
    cdef int64_t rm = <int64_t>rib_m
    out_a = np.zeros(nkeys, dtype=np.uint64)
    cdef uint64_t[::1] out = out_a
    # Plan arrays are materialized per distinct bucket size; cache the
    # memoryviews so the per-key loop stays in C.
    plan_cache = {}
    cdef int64_t t, bucket, msize, pos, offset, idx, jend, j2, seed_val
    cdef uint64_t khi, klo
    cdef int64_t[::1] kind_v, g_v, so_v, sf_v, sub_v, mn_v
    cdef int64_t r, acc, so
    cdef int part
    cdef int choice, cell
    cdef u128 pat, w
    cdef int64_t rstart
    cdef const uint64_t* swp = &sw[0] if sw.shape[0] else NULL
    for t in range(nkeys):
        khi = hv[t]
        klo = lv[t]
        bucket = <int64_t>c_range(c_remix(khi, klo, 0, T_BUCKET), <uint64_t>nb)
        msize = <int64_t>kp[bucket + 1] - <int64_t>kp[bucket]
        pos = <int64_t>bo[bucket]
        offset = 0
        if msize > 0:
            entry = plan_cache.get(msize)
            if entry is None:
                entry = plans[msize]
                plan_cache[msize] = entry
            kind_v = entry[0]
            g_v = entry[1]
            so_v = entry[3]
            sf_v = entry[4]
            sub_v = entry[5]
            mn_v = entry[6]
            idx = 0
            while kind_v[idx] == 0:
                if c_rice_decode(swp, bit_len, &pos, <int>g_v[idx], &seed_val):
                    _overrun()
                r = <int64_t>c_range(c_remix(khi, klo, <uint64_t>seed_val, T_SPLIT), <uint64_t>mn_v[idx])
                so = so_v[idx]
                part = 0
                acc = sf_v[so]
                while r >= acc:
                    offset += sf_v[so + part]
                    part += 1
                    acc += sf_v[so + part]
                j2 = idx + 1
                while part > 0:
                    jend = j2 + sub_v[j2]
                    while j2 < jend:
                        if c_rice_decode(swp, bit_len, &pos, <int>g_v[j2], &seed_val):
                            _overrun()
                        j2 += 1
                    part -= 1
                idx = j2
            if c_rice_decode(swp, bit_len, &pos, <int>g_v[idx], &seed_val):
                _overrun()
            if rm:
                rstart = <int64_t>c_range(c_remix(khi, klo, rseed, T_RSTART), <uint64_t>(rm - RIBBON_W + 1))
                pat = (<u128>c_remix(khi, klo, rseed, T_RPAT1) << 64) | <u128>(c_remix(khi, klo, rseed, T_RPAT0) | 1)
                w = window128(&rw[0], rwords, rstart)
                choice = parity128(w & pat)
            else:
                choice = 0
            cell = c_leaf_cell(khi, klo, seed_val, <int>mn_v[idx], cmode, cck, choice)
            offset += cell
        out[t] = kp[bucket] + <uint64_t>offset
    return out_a


def _overrun():
    from ..errors import FormatError

    raise FormatError("bit stream overrun")


cdef int c_leaf_cell(uint64_t hi, uint64_t lo, int64_t q, int mleaf, int mode, int64_t cache_k, int choice) noexcept nogil:
    cdef int h0, h1
    cdef int64_t base, r, sa
    if mode == 0:
        c_leaf_pair(hi, lo, <uint64_t>q, mleaf, &h0, &h1)
        return h1 if choice else h0
    base = q // mleaf
    r = q % mleaf
    if mode == 2 and cache_k and mleaf > 32:
        sa = base - (base % cache_k)
    else:
        sa = base
    if (c_remix(hi, lo, <uint64_t>sa, T_SPLITBIT) >> 63) == 0:
        c_leaf_pair(hi, lo, <uint64_t>sa, mleaf, &h0, &h1)
        return h1 if choice else h0
    c_leaf_pair(hi, lo, <uint64_t>base, mleaf, &h0, &h1)
    return <int>((((h1 if choice else h0) + r)) % mleaf)


def leaf_cell(hi, lo, q, mleaf, mode, cache_k, choice):
    return c_leaf_cell(<uint64_t>hi, <uint64_t>lo, <int64_t>q, <int>mleaf, <int>mode, <int64_t>cache_k, <int>choice)


# ---------------------------------------------------------------------------
# Exact enumeration and Monte-Carlo kernels


def enumerate_outcomes(n):
    cdef int nn = <int>n
    cdef UF64 uf
    cdef long long pf_count = 0
    cdef unsigned long long sum_2c = 0
    cdef int total = nn * nn
    cdef int edges[8]
    cdef int i, e, u, v, ru, rv, tswap, comps, ok
    if nn > 8:
        raise ValueError("enumeration limited to n <= 8")
    for i in range(nn):
        edges[i] = 0
    with nogil:
        while True:
            uf_reset(&uf, nn)
            comps = nn
            ok = 1
            for i in range(nn):
                e = edges[i]
                u = e // nn
                v = e % nn
                ru = uf_find(&uf, u)
                rv = uf_find(&uf, v)
                if ru == rv:
                    if uf.pseudo[ru]:
                        ok = 0
                        break
                    uf.pseudo[ru] = 1
                else:
                    if uf.pseudo[ru] and uf.pseudo[rv]:
                        ok = 0
                        break
                    if uf.size[ru] < uf.size[rv]:
                        tswap = ru
                        ru = rv
                        rv = tswap
                    uf.parent[rv] = ru
                    uf.size[ru] += uf.size[rv]
                    if uf.pseudo[rv]:
                        uf.pseudo[ru] = 1
                    comps -= 1
            if ok:
                pf_count += 1
                sum_2c += <unsigned long long>1 << comps
            i = nn - 1
            while i >= 0 and edges[i] == total - 1:
                edges[i] = 0
                i -= 1
            if i < 0:
                break
            edges[i] += 1
    return pf_count, sum_2c


def mc_filter_pass_count(n, trials, entropy):
    cdef int nn = <int>n
    if nn == 1:
        return trials
    cdef uint64_t khi[64]
    cdef uint64_t klo[64]
    cdef uint64_t ent = <uint64_t>(entropy & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t full = (<uint64_t>1 << nn) - 1 if nn < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    cdef uint64_t x, v, mask
    cdef int64_t s, tr = <int64_t>trials
    cdef long long passes = 0
    cdef int i, h0, h1
    for i in range(nn):
        khi[i] = c_mix64(ent + 2 * i)
        klo[i] = c_mix64(ent + 2 * i + 1)
    with nogil:
        for s in range(tr):
            x = c_seed_mixer(<uint64_t>s, T_LEAF)
            mask = 0
            for i in range(nn):
                v = c_mix64(c_mix64(khi[i] ^ x) ^ klo[i])
                h0 = <int>(((v >> 32) * <uint64_t>nn) >> 32)
                h1 = <int>(((v & <uint64_t>0xFFFFFFFFu) * <uint64_t>(nn - 1)) >> 32)
                if h1 >= h0:
                    h1 += 1
                mask |= (<uint64_t>1 << h0) | (<uint64_t>1 << h1)
            if mask == full:
                passes += 1
    return passes
