"""Pure-Python kernel backend.

Reference implementation of the hot operations: derived hashing, leaf seed
search with the word-parallel bit-mask filter, splitting seed search, the
banded GF(2) retrieval solver, batch MPHF queries, and the exact small-size
outcome enumeration. The compiled backend in ``_core.pyx`` mirrors this
module function for function; differential tests hold the two together.

All scalar hash helpers here are the canonical definition of the hash
family. Everything is deterministic in its inputs.
"""

import numpy as np

NAME = "pure"

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

# Tags keep the derived hash families independent of each other.
TAG_LEAF = 1
TAG_SPLITBIT = 2
TAG_SPLIT = 3
TAG_BUCKET = 4
TAG_RSTART = 5
TAG_RPAT0 = 6
TAG_RPAT1 = 7


def mix64(z):
    """SplitMix64 finalizer; bijective on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def seed_mixer(seed, tag):
    """Per-(seed, tag) constant, hoistable out of per-key loops."""
    return mix64((seed + tag * GOLDEN) & MASK64)


def remix(hi, lo, seed, tag):
    """Derive a fresh 64-bit value from a master hash code and a seed."""
    x = seed_mixer(seed, tag)
    return mix64(mix64(hi ^ x) ^ lo)


def hash_range(v, m):
    """Map a 64-bit value to [0, m) by 32-bit multiply-shift (no modulo bias)."""
    return ((v >> 32) * m) >> 32


def leaf_pair(hi, lo, seed, n):
    """Both candidate cells of a key; halves of one remixed word.

    The cells are always distinct for n >= 2: the second is drawn from the
    n - 1 cells other than the first. Self-loops only waste trials.
    """
    if n == 1:
        return 0, 0
    v = remix(hi, lo, seed, TAG_LEAF)
    h0 = ((v >> 32) * n) >> 32
    h1 = ((v & 0xFFFFFFFF) * (n - 1)) >> 32
    return h0, h1 + (h1 >= h0)


def split_bit(hi, lo, seed):
    """1-bit hash assigning a key to rotation set A (0) or B (1)."""
    return remix(hi, lo, seed, TAG_SPLITBIT) >> 63


def mix64_batch(z):
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


def remix_batch(hi, lo, seed, tag):
    x = np.uint64(seed_mixer(seed, tag))
    return mix64_batch(mix64_batch(np.asarray(hi, dtype=np.uint64) ^ x) ^ np.asarray(lo, dtype=np.uint64))


def hash_range_batch(v, m):
    return ((v >> np.uint64(32)) * np.uint64(m)) >> np.uint64(32)


# ---------------------------------------------------------------------------
# Pseudoforest acceptance (internal union-find used by the seed searches)


class _UF:
    """Minimal array union-find with per-root pseudotree flags."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n
        self.pseudo = [False] * n
        self.n = n

    def reset(self):
        p = self.parent
        s = self.size
        q = self.pseudo
        for i in range(self.n):
            p[i] = i
            s[i] = 1
            q[i] = False

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def insert(self, u, v):
        """Add edge {u, v}; False once some component exceeds one cycle."""
        ru = self.find(u)
        rv = self.find(v)
        if ru == rv:
            if self.pseudo[ru]:
                return False
            self.pseudo[ru] = True
            return True
        if self.pseudo[ru] and self.pseudo[rv]:
            return False
        if self.size[ru] < self.size[rv]:
            ru, rv = rv, ru
        self.parent[rv] = ru
        self.size[ru] += self.size[rv]
        self.pseudo[ru] = self.pseudo[ru] or self.pseudo[rv]
        return True


def _pf_accepts(uf, h0s, h1s):
    uf.reset()
    insert = uf.insert
    for u, v in zip(h0s, h1s):
        if not insert(u, v):
            return False
    return True


# ---------------------------------------------------------------------------
# Leaf seed searches


def search_plain(hi, lo, n, max_seed):
    """Minimum seed whose induced graph is a pseudoforest.

    Returns (seed, hash_evals, filter_passes, exact_checks, a_evals);
    seed is -1 if max_seed is exhausted.
    """
    if n == 1:
        return 0, 1, 1, 1, 0
    hi = [int(x) for x in hi]
    lo = [int(x) for x in lo]
    full = (1 << n) - 1
    uf = _UF(n)
    h0s = [0] * n
    h1s = [0] * n
    evals = 0
    passes = 0
    checks = 0
    for s in range(max_seed):
        x = seed_mixer(s, TAG_LEAF)
        mask = 0
        for i in range(n):
            v = mix64(mix64(hi[i] ^ x) ^ lo[i])
            h0 = ((v >> 32) * n) >> 32
            h1 = ((v & 0xFFFFFFFF) * (n - 1)) >> 32
            h1 += h1 >= h0
            h0s[i] = h0
            h1s[i] = h1
            mask |= (1 << h0) | (1 << h1)
        evals += n
        if mask != full:
            continue
        passes += 1
        checks += 1
        if _pf_accepts(uf, h0s, h1s):
            return s, evals, passes, checks, 0
    return -1, evals, passes, checks, 0


def search_rotate(hi, lo, n, cache_k, max_seed):
    """Rotation-fitting seed search.

    cache_k = 0 disables hash caching for the first set; cache_k >= 1
    computes set A (and the A/B membership bit) with the k-aligned base
    seed. Returns (encoded_seed, hash_evals, filter_passes, exact_checks,
    a_evals) with encoded_seed = base * n + rotation, or -1 on exhaustion.
    """
    if n == 1:
        return 0, 1, 1, 1, 0
    hi = [int(x) for x in hi]
    lo = [int(x) for x in lo]
    nkeys = len(hi)
    full = (1 << n) - 1
    uf = _UF(n)
    evals = 0
    passes = 0
    checks = 0
    a_evals = 0
    a_idx = []
    b_idx = []
    a0 = []
    a1 = []
    max_base = max_seed // n + 1
    for base in range(max_base):
        sa = base - (base % cache_k) if cache_k else base
        if base == 0 or (cache_k == 0) or (base % cache_k == 0):
            # Window start: recompute membership and the A-set hashes.
            xb = seed_mixer(sa, TAG_SPLITBIT)
            xa = seed_mixer(sa, TAG_LEAF)
            a_idx = []
            b_idx = []
            a0 = []
            a1 = []
            mask_a = 0
            for i in range(nkeys):
                bit = mix64(mix64(hi[i] ^ xb) ^ lo[i]) >> 63
                if bit:
                    b_idx.append(i)
                else:
                    a_idx.append(i)
            evals += nkeys
            for i in a_idx:
                v = mix64(mix64(hi[i] ^ xa) ^ lo[i])
                h0 = ((v >> 32) * n) >> 32
                h1 = ((v & 0xFFFFFFFF) * (n - 1)) >> 32
                h1 += h1 >= h0
                a0.append(h0)
                a1.append(h1)
                mask_a |= (1 << h0) | (1 << h1)
            evals += len(a_idx)
            a_evals += len(a_idx)
        xg = seed_mixer(base, TAG_LEAF)
        b0 = []
        b1 = []
        mask_b = 0
        for i in b_idx:
            v = mix64(mix64(hi[i] ^ xg) ^ lo[i])
            h0 = ((v >> 32) * n) >> 32
            h1 = ((v & 0xFFFFFFFF) * (n - 1)) >> 32
            h1 += h1 >= h0
            b0.append(h0)
            b1.append(h1)
            mask_b |= (1 << h0) | (1 << h1)
        evals += len(b_idx)
        for r in range(n):
            rot = ((mask_b << r) | (mask_b >> (n - r))) & full if r else mask_b
            if (mask_a | rot) != full:
                continue
            passes += 1
            checks += 1
            h0s = a0 + [(h + r) % n for h in b0]
            h1s = a1 + [(h + r) % n for h in b1]
            if _pf_accepts(uf, h0s, h1s):
                q = base * n + r
                if q >= max_seed:
                    return -1, evals, passes, checks, a_evals
                return q, evals, passes, checks, a_evals
    return -1, evals, passes, checks, a_evals


def search_bruteforce(hi, lo, n, max_seed):
    """Baseline: retry a single n-range hash until it is a bijection."""
    hi = [int(x) for x in hi]
    lo = [int(x) for x in lo]
    full = (1 << n) - 1
    evals = 0
    for s in range(max_seed):
        x = seed_mixer(s, TAG_LEAF)
        mask = 0
        ok = True
        for i in range(n):
            v = mix64(mix64(hi[i] ^ x) ^ lo[i])
            h = ((v >> 32) * n) >> 32
            bit = 1 << h
            if mask & bit:
                ok = False
                evals += i + 1
                break
            mask |= bit
        else:
            evals += n
        if ok and mask == full:
            return s, evals
    return -1, evals


# ---------------------------------------------------------------------------
# Splitting seed search


def split_parts(hi, lo, seed, sizes):
    """Part index of every key for a splitting hash with the given sizes."""
    m = int(sum(sizes))
    bounds = np.cumsum(np.asarray(sizes, dtype=np.int64))
    r = hash_range_batch(remix_batch(hi, lo, seed, TAG_SPLIT), m)
    return np.searchsorted(bounds, r.astype(np.int64), side="right").astype(np.int64)


def split_seed_search(hi, lo, sizes, max_seed):
    """Minimum seed realizing exactly the prescribed part sizes."""
    hi = [int(x) for x in hi]
    lo = [int(x) for x in lo]
    sizes = [int(s) for s in sizes]
    m = sum(sizes)
    fanout = len(sizes)
    bounds = []
    acc = 0
    for s in sizes:
        acc += s
        bounds.append(acc)
    evals = 0
    counts = [0] * fanout
    for s in range(max_seed):
        x = seed_mixer(s, TAG_SPLIT)
        for i in range(fanout):
            counts[i] = 0
        ok = True
        for i in range(m):
            v = mix64(mix64(hi[i] ^ x) ^ lo[i])
            r = ((v >> 32) * m) >> 32
            part = 0
            while r >= bounds[part]:
                part += 1
            counts[part] += 1
            if counts[part] > sizes[part]:
                ok = False
                evals += i + 1
                break
        else:
            evals += m
        if ok:
            return s, evals
    return -1, evals


# ---------------------------------------------------------------------------
# Banded GF(2) solver (128-bit band)

RIBBON_W = 128


def ribbon_rows(hi, lo, seed, m):
    """Start positions and 128-bit patterns (two words, low bit forced 1)."""
    starts = hash_range_batch(remix_batch(hi, lo, seed, TAG_RSTART), m - RIBBON_W + 1)
    pat0 = remix_batch(hi, lo, seed, TAG_RPAT0) | np.uint64(1)
    pat1 = remix_batch(hi, lo, seed, TAG_RPAT1)
    return starts.astype(np.int64), pat0, pat1


def ribbon_solve(starts, pat0, pat1, rhs, m):
    """Eliminate rows into the band, then back-substitute.

    Returns the solution as uint64 words (LSB-first), or None when a
    linearly dependent inconsistent row shows up.
    """
    slot_p0 = [0] * m
    slot_p1 = [0] * m
    slot_b = bytearray(m)
    occupied = bytearray(m)
    for idx in range(len(starts)):
        s = int(starts[idx])
        p = (int(pat1[idx]) << 64) | int(pat0[idx])
        b = int(rhs[idx])
        while True:
            if not occupied[s]:
                occupied[s] = 1
                slot_p0[s] = p & MASK64
                slot_p1[s] = p >> 64
                slot_b[s] = b
                break
            p ^= (slot_p1[s] << 64) | slot_p0[s]
            b ^= slot_b[s]
            if p == 0:
                if b:
                    return None
                break
            t = (p & -p).bit_length() - 1
            p >>= t
            s += t
    nwords = (m + 63) // 64
    sol = bytearray(m)
    for s in range(m - 1, -1, -1):
        if not occupied[s]:
            continue
        p = (slot_p1[s] << 64) | slot_p0[s]
        acc = slot_b[s]
        p >>= 1
        j = s + 1
        while p:
            if p & 1:
                acc ^= sol[j]
            p >>= 1
            j += 1
        sol[s] = acc
    words = np.zeros(nwords, dtype=np.uint64)
    for i in range(m):
        if sol[i]:
            words[i >> 6] |= np.uint64(1 << (i & 63))
    return words


def _sol_window(words, s):
    """128 stored bits starting at bit s (tail reads as zero)."""
    i = s >> 6
    sh = s & 63
    nw = len(words)
    v = int(words[i]) if i < nw else 0
    v >>= sh
    if i + 1 < nw:
        v |= int(words[i + 1]) << (64 - sh) if sh else int(words[i + 1]) << 64
    if sh and i + 2 < nw:
        v |= int(words[i + 2]) << (128 - sh)
    return v & ((1 << RIBBON_W) - 1)


def ribbon_query_many(starts, pat0, pat1, words, m):
    """Masked-parity readout for each row."""
    out = np.zeros(len(starts), dtype=np.uint8)
    for idx in range(len(starts)):
        window = _sol_window(words, int(starts[idx]))
        p = (int(pat1[idx]) << 64) | int(pat0[idx])
        out[idx] = bin(window & p).count("1") & 1
    return out


# ---------------------------------------------------------------------------
# Bit-stream helpers (LSB-first within little-endian 64-bit words)


def _window(words, bit_len, pos, k):
    """Up to 64 bits starting at pos; missing tail bits read as zero."""
    if pos >= bit_len and k > 0:
        from ..errors import FormatError

        raise FormatError("bit stream overrun")
    i = pos >> 6
    sh = pos & 63
    v = int(words[i]) >> sh
    if sh and i + 1 < len(words):
        v |= int(words[i + 1]) << (64 - sh)
    return v & ((1 << k) - 1) if k < 64 else v & MASK64


def rice_decode_stream(words, bit_len, pos, g):
    """Decode one Rice code; returns (value, new_pos)."""
    from ..errors import FormatError

    q = 0
    while True:
        chunk = _window(words, bit_len, pos, 64)
        avail = min(64, bit_len - pos)
        if avail <= 0:
            raise FormatError("bit stream overrun in unary part")
        inv = ~chunk & MASK64
        t = (inv & -inv).bit_length() - 1 if inv else 64
        if t >= avail and chunk & ((1 << avail) - 1) == (1 << avail) - 1:
            q += avail
            pos += avail
            continue
        q += t
        pos += t + 1
        break
    if g:
        if pos + g > bit_len:
            raise FormatError("bit stream overrun in remainder")
        rem = _window(words, bit_len, pos, g)
        pos += g
    else:
        rem = 0
    return (q << g) | rem, pos


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
    """Evaluate the finished MPHF for a batch of hashed keys.

    plans maps a bucket size to its flattened preorder plan arrays
    (kind, g, fanout, sizes_off, sizes_flat, subtree, msize).
    """
    nkeys = len(hi)
    out = np.zeros(nkeys, dtype=np.uint64)
    for t in range(nkeys):
        khi = int(hi[t])
        klo = int(lo[t])
        bucket = hash_range(remix(khi, klo, 0, TAG_BUCKET), nbuckets)
        msize = int(key_prefix[bucket + 1]) - int(key_prefix[bucket])
        pos = int(bit_offsets[bucket])
        offset = 0
        if msize > 0:
            kind, g_arr, fanout, sizes_off, sizes_flat, subtree, m_node = plans[msize]
            idx = 0
            while kind[idx] == 0:
                seed, pos = rice_decode_stream(stream_words, stream_bit_len, pos, int(g_arr[idx]))
                mnode = int(m_node[idx])
                r = hash_range(remix(khi, klo, seed, TAG_SPLIT), mnode)
                so = int(sizes_off[idx])
                part = 0
                acc = int(sizes_flat[so])
                while r >= acc:
                    offset += int(sizes_flat[so + part])
                    part += 1
                    acc += int(sizes_flat[so + part])
                j = idx + 1
                for _ in range(part):
                    end = j + int(subtree[j])
                    while j < end:
                        _, pos = rice_decode_stream(stream_words, stream_bit_len, pos, int(g_arr[j]))
                        j += 1
                idx = j
            q, pos = rice_decode_stream(stream_words, stream_bit_len, pos, int(g_arr[idx]))
            mleaf = int(m_node[idx])
            if rib_m:
                s = hash_range(remix(khi, klo, rib_seed, TAG_RSTART), rib_m - RIBBON_W + 1)
                p = (remix(khi, klo, rib_seed, TAG_RPAT0) | 1) | (remix(khi, klo, rib_seed, TAG_RPAT1) << 64)
                choice = bin(_sol_window(rib_words, s) & p).count("1") & 1
            else:
                choice = 0
            cell = leaf_cell(khi, klo, q, mleaf, mode, cache_k, choice)
            offset += cell
        out[t] = int(key_prefix[bucket]) + offset
    return out


def leaf_cell(hi, lo, q, mleaf, mode, cache_k, choice):
    """Query-side cell of a key inside its leaf (mode 0 plain / 1 rotate /
    2 rotate-cached)."""
    if mode == 0:
        h0, h1 = leaf_pair(hi, lo, q, mleaf)
        return h1 if choice else h0
    base = q // mleaf
    r = q % mleaf
    if mode == 2 and cache_k and mleaf > 32:
        sa = base - (base % cache_k)
    else:
        sa = base
    if split_bit(hi, lo, sa) == 0:
        h0, h1 = leaf_pair(hi, lo, sa, mleaf)
        return h1 if choice else h0
    h0, h1 = leaf_pair(hi, lo, base, mleaf)
    return ((h1 if choice else h0) + r) % mleaf


# ---------------------------------------------------------------------------
# Exact enumeration and Monte-Carlo kernels


def enumerate_outcomes(n):
    """Count pseudoforest outcomes over all n^(2n) hash-value tuples.

    Returns (pf_count, sum_over_pf_of_2^components).
    """
    uf = _UF(n)
    pf_count = 0
    sum_2c = 0
    total = n * n
    edges = [0] * n
    # Odometer over n independent ordered pairs.
    while True:
        uf.reset()
        comps = n
        ok = True
        for e in edges:
            u = e // n
            v = e % n
            ru = uf.find(u)
            rv = uf.find(v)
            if ru == rv:
                if uf.pseudo[ru]:
                    ok = False
                    break
                uf.pseudo[ru] = True
            else:
                if uf.pseudo[ru] and uf.pseudo[rv]:
                    ok = False
                    break
                if uf.size[ru] < uf.size[rv]:
                    ru, rv = rv, ru
                uf.parent[rv] = ru
                uf.size[ru] += uf.size[rv]
                uf.pseudo[ru] = uf.pseudo[ru] or uf.pseudo[rv]
                comps -= 1
        if ok:
            pf_count += 1
            sum_2c += 1 << comps
        i = n - 1
        while i >= 0 and edges[i] == total - 1:
            edges[i] = 0
            i -= 1
        if i < 0:
            break
        edges[i] += 1
    return pf_count, sum_2c


def mc_filter_pass_count(n, trials, entropy):
    """How many of `trials` consecutive seeds pass the all-cells-hit filter
    for one fixed synthetic key set of size n."""
    if n == 1:
        return trials
    hi = [mix64(entropy + 2 * j) for j in range(n)]
    lo = [mix64(entropy + 2 * j + 1) for j in range(n)]
    full = (1 << n) - 1
    passes = 0
    for s in range(trials):
        x = seed_mixer(s, TAG_LEAF)
        mask = 0
        for i in range(n):
            v = mix64(mix64(hi[i] ^ x) ^ lo[i])
            h0 = (v >> 32) * n >> 32
            h1 = (v & 0xFFFFFFFF) * (n - 1) >> 32
            h1 += h1 >= h0
            mask |= (1 << h0) | (1 << h1)
        if mask == full:
            passes += 1
    return passes
