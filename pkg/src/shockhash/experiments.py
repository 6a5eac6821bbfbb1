"""Validation experiments: exact small-size oracles and Monte-Carlo runs.

Everything here is about checking the probabilistic behavior of the leaf
search: exact enumeration of all hash outcomes for tiny leaves, the
component-count factor of random 2-regular multigraphs, the bit-mask
filter's pass rate, and trial-count statistics for the search variants.
"""

import csv
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from ._kernels import kernels as K
from ._kernels import _pure
from .errors import InvalidParameterError
from .keys import synthetic_hashed

ENUM_MAX_N = 5
BRUTE_MAX_N = 14


# ---------------------------------------------------------------------------
# Exact oracles


def exact_pseudoforest_probability(n: int) -> Fraction:
    """P(the induced graph is a pseudoforest), exactly, by enumerating all
    n^(2n) ordered candidate-cell outcomes (self-loops included)."""
    if not 1 <= n <= ENUM_MAX_N:
        raise InvalidParameterError(f"enumeration supports 1 <= n <= {ENUM_MAX_N}, got {n}")
    pf_count, _ = K.enumerate_outcomes(n)
    return Fraction(int(pf_count), n ** (2 * n))


def exact_mean_orientations(n: int) -> Fraction:
    """E[number of valid choice functions], exactly; equals 2^n n!/n^n."""
    if not 1 <= n <= ENUM_MAX_N:
        raise InvalidParameterError(f"enumeration supports 1 <= n <= {ENUM_MAX_N}, got {n}")
    _, sum_2c = K.enumerate_outcomes(n)
    return Fraction(int(sum_2c), n ** (2 * n))


def exact_mean_orientations_closed_form(n: int) -> Fraction:
    return Fraction(2**n * math.factorial(n), n**n)


def bijection_probability(n: int) -> float:
    """n!/n^n computed in log-space; brute-force success probability."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return math.exp(math.lgamma(n + 1) - n * math.log(n))


def lower_bound_bits(n: int) -> float:
    """log2(n^n / n!), the entropy floor for one leaf of size n."""
    return (n * math.log(n) - math.lgamma(n + 1)) / math.log(2.0)


def pf_probability_lower_bounds(n: int):
    """The two analytic lower bounds on the pseudoforest probability:
    (2/e)^n sqrt(pi/(2n)) and (2/e)^n sqrt(pi)/e."""
    base = (2.0 / math.e) ** n
    return base * math.sqrt(math.pi / (2.0 * n)), base * math.sqrt(math.pi) / math.e


# ---------------------------------------------------------------------------
# Configuration-model component factor


def d_recurrence(n: int) -> float:
    """Exact E[2^components] of the random 2-regular multigraph:
    d_n = prod_{i=1..n} (1 + 1/(2i - 1))."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    d = 1.0
    for i in range(1, n + 1):
        d *= 1.0 + 1.0 / (2 * i - 1)
    return d


def mc_component_factor(n: int, trials: int, seed: int = 0) -> float:
    """Monte-Carlo E[2^c] over random perfect matchings of 2n stubs,
    two stubs per node."""
    if trials < 1:
        raise InvalidParameterError("trials must be positive")
    rng = np.random.default_rng(seed)
    parent = np.zeros(n, dtype=np.int64)
    total = 0.0
    for _ in range(trials):
        stubs = rng.permutation(2 * n)
        for i in range(n):
            parent[i] = i
        comps = n
        for j in range(0, 2 * n, 2):
            u = int(stubs[j]) >> 1
            v = int(stubs[j + 1]) >> 1
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            if u != v:
                parent[u] = v
                comps -= 1
        total += 2.0**comps
    return total / trials


# ---------------------------------------------------------------------------
# Bit-mask filter


def filter_pass_bound(n: int) -> float:
    """Finite-n upper bound (1 - (1 - 1/n)^(2n))^n on the pass rate."""
    return (1.0 - (1.0 - 1.0 / n) ** (2 * n)) ** n


def mc_filter_pass(n: int, trials: int, seed: int = 0) -> float:
    """Fraction of consecutive seeds whose candidate cells cover every
    cell, for one random key set of size n."""
    if not 1 <= n <= 64:
        raise InvalidParameterError(f"n must be in 1..64, got {n}")
    if trials < 1:
        raise InvalidParameterError("trials must be positive")
    entropy = _pure.mix64(0xF117E4 ^ seed)
    return K.mc_filter_pass_count(n, trials, entropy) / trials


def filter_slope(ns: Sequence[int], trials: int, seed: int = 0):
    """Least-squares slope of log2(pass rate) against n."""
    xs = []
    ys = []
    for n in ns:
        rate = mc_filter_pass(n, trials, seed)
        if rate <= 0:
            continue
        xs.append(n)
        ys.append(math.log2(rate))
    if len(xs) < 2:
        raise InvalidParameterError("not enough nonzero pass rates for a fit")
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept)


# ---------------------------------------------------------------------------
# Trial statistics


@dataclass
class TrialStats:
    """One row of search-statistics output.

    mean_seed is 1-based. For the rotation modes it counts base seeds
    (hash function trials): each base yields n rotation candidates, and
    the encoded stored seed folds the rotation in. overhead_bits charges
    log2(mean encoded seed) plus the retrieval bit per key, minus the
    entropy floor.
    """

    n: int
    mode: str
    reps: int
    mean_seed: float
    mean_log2_seed: float
    overhead_bits: float
    wall_time_s: float


def _leaf_arrays(n, rep, seed):
    hi, lo = synthetic_hashed(n, (seed * 0x10001 + rep) ^ 0xE9B1)
    return [int(x) for x in hi], [int(x) for x in lo]


def trial_statistics(ns: Sequence[int], mode: str, reps: int, seed: int = 0) -> List[TrialStats]:
    """Mean successful seed statistics over random leaves."""
    if reps < 1:
        raise InvalidParameterError("reps must be positive")
    if mode not in ("plain", "rotate", "rotate-cached", "bruteforce"):
        raise InvalidParameterError(f"unknown mode {mode!r}")
    rows = []
    for n in ns:
        if mode == "bruteforce" and n > BRUTE_MAX_N:
            raise InvalidParameterError(f"brute-force statistics limited to n <= {BRUTE_MAX_N}")
        t0 = time.perf_counter()
        sum_trials = 0
        sum_log2 = 0.0
        sum_encoded = 0
        for rep in range(reps):
            hi, lo = _leaf_arrays(n, rep, seed)
            if mode == "bruteforce":
                s, _ = K.search_bruteforce(hi, lo, n, 1 << 40)
                trials = s + 1
                encoded = s
            elif mode == "plain":
                s, *_ = K.search_plain(hi, lo, n, 1 << 40)
                trials = s + 1
                encoded = s
            else:
                ck = 8 if (mode == "rotate-cached" and n > 32) else 0
                q, *_ = K.search_rotate(hi, lo, n, ck, 1 << 40)
                trials = q // n + 1
                encoded = q
            sum_trials += trials
            sum_encoded += encoded
            sum_log2 += math.log2(encoded + 1)
        retrieval_bits = 0 if mode == "bruteforce" else n
        mean_encoded = sum_encoded / reps
        overhead = (math.log2(mean_encoded) if mean_encoded > 0 else 0.0) + retrieval_bits - lower_bound_bits(n)
        rows.append(
            TrialStats(
                n,
                mode,
                reps,
                sum_trials / reps,
                sum_log2 / reps,
                overhead,
                time.perf_counter() - t0,
            )
        )
    return rows


CSV_HEADER = ["n", "mode", "reps", "mean_seed", "mean_log2_seed", "overhead_bits", "wall_time_s"]


def write_csv(rows: List[TrialStats], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.n, r.mode, r.reps, f"{r.mean_seed:.6g}", f"{r.mean_log2_seed:.6g}", f"{r.overhead_bits:.6g}", f"{r.wall_time_s:.3f}"])
