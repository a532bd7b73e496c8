"""Compiled Monte Carlo kernels for the profile simulator.

Per-replicate letter streams come from a splitmix64 counter generator:
replicate r's stream state is seeded by mixing (seed + GOLDEN*(r+1)), so
every replicate is reproducible in isolation and results are identical for
any thread count or batching.  Each letter consumes one splitmix64 output;
the top 24 bits are compared against round(p * 2^24), which bounds the
source bias by 2^-25 (negligible against Monte Carlo noise at any
achievable replicate count).

Two repeat-counting strategies: a 2^k table with saturating counts (fast,
used while the table fits comfortably) and sort-and-scan over the n window
codes (any k <= 64).
"""

import numpy as np
from numba import njit, prange, uint64

GOLDEN = np.uint64(0x9E3779B97F4A7C15)

#: bincount path is used while 2^k <= this (uint8 table per replicate)
TABLE_MAX_K = 22


@njit(uint64(uint64), inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, parallel=True)
def profile_counts_table(n, k, thr24, seed, reps, out):
    m = n + k - 1
    mask = (np.uint64(1) << np.uint64(k)) - np.uint64(1)
    for r in prange(reps):
        st = _mix(np.uint64(seed) + GOLDEN * (np.uint64(r) + np.uint64(1)))
        counts = np.zeros(1 << k, dtype=np.uint8)
        code = np.uint64(0)
        x = 0
        for t in range(m):
            st += GOLDEN
            u = _mix(st)
            bit = np.uint64(1) if (u >> np.uint64(40)) < np.uint64(thr24) else np.uint64(0)
            code = ((code << np.uint64(1)) | bit) & mask
            if t >= k - 1:
                c = counts[code]
                if c < 2:
                    counts[code] = c + 1
                    if c == 1:
                        x += 1
        out[r] = x


@njit(cache=True, parallel=True)
def profile_counts_sorted(n, k, thr24, seed, reps, out):
    m = n + k - 1
    mask = (np.uint64(1) << np.uint64(k)) - np.uint64(1)
    for r in prange(reps):
        st = _mix(np.uint64(seed) + GOLDEN * (np.uint64(r) + np.uint64(1)))
        codes = np.empty(n, dtype=np.uint64)
        code = np.uint64(0)
        for t in range(m):
            st += GOLDEN
            u = _mix(st)
            bit = np.uint64(1) if (u >> np.uint64(40)) < np.uint64(thr24) else np.uint64(0)
            code = ((code << np.uint64(1)) | bit) & mask
            if t >= k - 1:
                codes[t - (k - 1)] = code
        codes.sort()
        x = 0
        i = 0
        while i < n - 1:
            if codes[i] == codes[i + 1]:
                x += 1
                j = i + 1
                while j < n and codes[j] == codes[i]:
                    j += 1
                i = j
            else:
                i += 1
        out[r] = x


