"""Ground-truth engines: enumeration, automaton DP, Monte Carlo.

These deliberately share no code with the generating-function engine so
the two can cross-validate each other.

Indexing convention: the automaton DP and the string enumeration count
occurrences within a stated number of CHARACTERS.  The profile indicator
for n suffixes at depth k reads the first n + k - 1 characters, so callers
comparing against suffix-count quantities evaluate the oracles at
n + k - 1 characters.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ResourceCapError, ValidationError
from .words import ModelParams, Word, pro

#: exhaustive string enumeration cap: 2^(n+k-1) strings
ENUMERATION_MAX_CHARS = 22

_THREAD_ENV = "PROFILIUM_THREADS"


def _apply_thread_cap():
    cap = os.environ.get(_THREAD_ENV)
    if cap:
        try:
            import numba

            numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
        except (ImportError, ValueError):
            pass


# ---------------------------------------------------------------------------
# Profile counting
# ---------------------------------------------------------------------------

def count_profile(s: Word, n: int, k: int) -> int:
    """Number of distinct length-k factors occurring >= 2 times among the
    n windows of s (|s| must be n + k - 1)."""
    if k > 64:
        raise ResourceCapError("window length capped at 64")
    if n < 1 or s.length != n + k - 1:
        raise ValidationError("need |s| = n + k - 1 with n >= 1")
    seen: Dict[int, int] = {}
    x = 0
    mask = (1 << k) - 1
    code = s.code >> (s.length - k)
    for t in range(n):
        if t > 0:
            nxt = (s.code >> (s.length - k - t)) & 1
            code = ((code << 1) | nxt) & mask
        c = seen.get(code, 0)
        if c == 1:
            x += 1
        if c < 2:
            seen[code] = c + 1
    return x


def _window_codes(codes: np.ndarray, m: int, k: int, t: int) -> np.ndarray:
    return (codes >> np.uint32(m - k - t)) & np.uint32((1 << k) - 1)


def _profile_counts_all_strings(m: int, k: int) -> np.ndarray:
    """X(s) for every string s of length m (codes 0..2^m-1), n = m-k+1."""
    n = m - k + 1
    codes = np.arange(1 << m, dtype=np.uint32)
    X = np.zeros(len(codes), dtype=np.int16)
    wins = [_window_codes(codes, m, k, t) for t in range(n)]
    for j in range(1, n):
        cnt = np.zeros(len(codes), dtype=np.int16)
        wj = wins[j]
        for i in range(j):
            cnt += wins[i] == wj
        X += cnt == 1
    return X


def exact_variance_enumeration(n: int, k: int, params: ModelParams, mode: str = "float"):
    """Var(X_{n,k}) summed over all 2^(n+k-1) strings.

    Strings are grouped by ('a'-count, X value) so that the exact mode only
    performs O(m * max X) rational operations after a vectorized scan.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    if n <= 1:
        return Fraction(0) if mode == "exact" else 0.0
    m = n + k - 1
    if m > ENUMERATION_MAX_CHARS:
        raise ResourceCapError(
            f"enumeration needs n + k - 1 <= {ENUMERATION_MAX_CHARS}, got {m}"
        )
    X = _profile_counts_all_strings(m, k)
    pc = np.bitwise_count(np.arange(1 << m, dtype=np.uint32)).astype(np.int64)
    xmax = int(X.max())
    # joint histogram over (popcount, X)
    hist = np.zeros((m + 1, xmax + 1), dtype=np.int64)
    np.add.at(hist, (pc, X.astype(np.int64)), 1)
    if mode == "exact":
        pe, qe = params.prob(exact=True)
        ex = Fraction(0)
        ex2 = Fraction(0)
        for c in range(m + 1):
            row = hist[c]
            if not row.any():
                continue
            w = pe ** c * qe ** (m - c)
            for x in range(xmax + 1):
                if row[x]:
                    ex += w * int(row[x]) * x
                    ex2 += w * int(row[x]) * x * x
        return ex2 - ex * ex
    lp, lq = math.log(params.p), math.log(params.q)
    cs = np.arange(m + 1)
    weights = np.exp(cs * lp + (m - cs) * lq)
    xs = np.arange(xmax + 1, dtype=np.float64)
    ex = float(weights @ (hist @ xs))
    ex2 = float(weights @ (hist @ (xs * xs)))
    return ex2 - ex * ex


# ---------------------------------------------------------------------------
# Exact occurrence-class distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactDistribution:
    """Occurrence-class table: (min(#u,2), min(#v,2)) -> probability.

    For a single word the second index is always 0. `n` is the number of
    characters scanned.
    """

    table: dict
    n: int
    words: tuple

    def prob(self, i: int, j: int = 0):
        return self.table.get((i, j), 0)

    def total(self):
        return sum(self.table.values())

    def marginal_u(self, i: int):
        return sum(v for (iu, _), v in self.table.items() if iu == i)

    def marginal_v(self, j: int):
        return sum(v for (_, jv), v in self.table.items() if jv == j)


class _AhoCorasick:
    """Tiny Aho-Corasick automaton over the binary alphabet."""

    def __init__(self, patterns):
        # nodes: goto arrays (2 children), fail links, per-pattern output flags
        self.goto = [[-1, -1]]
        self.out = [0]  # bitmask over patterns
        for pi, w in enumerate(patterns):
            node = 0
            for i in range(w.length):
                bit = (w.code >> (w.length - 1 - i)) & 1
                if self.goto[node][bit] < 0:
                    self.goto.append([-1, -1])
                    self.out.append(0)
                    self.goto[node][bit] = len(self.goto) - 1
                node = self.goto[node][bit]
            self.out[node] |= 1 << pi
        # BFS fail links, converting goto into a total transition function
        fail = [0] * len(self.goto)
        queue = []
        for bit in (0, 1):
            ch = self.goto[0][bit]
            if ch < 0:
                self.goto[0][bit] = 0
            else:
                fail[ch] = 0
                queue.append(ch)
        qi = 0
        while qi < len(queue):
            node = queue[qi]
            qi += 1
            self.out[node] |= self.out[fail[node]]
            for bit in (0, 1):
                ch = self.goto[node][bit]
                if ch < 0:
                    self.goto[node][bit] = self.goto[fail[node]][bit]
                else:
                    fail[ch] = self.goto[fail[node]][bit]
                    queue.append(ch)
        self.size = len(self.goto)


def joint_occurrence_dp(
    u: Word,
    v: Optional[Word],
    n: int,
    params: ModelParams,
    mode: str = "float",
) -> ExactDistribution:
    """Occurrence-class distribution after n characters, via automaton DP.

    State = (automaton node, min(#u, 2), min(#v, 2)); transitions weighted
    by the letter probabilities.  'a' is the automaton's bit 1.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    if v is not None:
        if u.length != v.length:
            raise ValidationError("joint DP needs equal-length words")
        if u.code == v.code:
            raise ValidationError("joint DP requires distinct words")
    patterns = (u,) if v is None else (u, v)
    ac = _AhoCorasick(patterns)
    exact = mode == "exact"
    pp, qq = params.prob(exact)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    # dp[node][cu][cv]
    dp = [[[zero] * 3 for _ in range(3)] for _ in range(ac.size)]
    dp[0][0][0] = one
    for _ in range(n):
        nxt = [[[zero] * 3 for _ in range(3)] for _ in range(ac.size)]
        for node in range(ac.size):
            plane = dp[node]
            for cu in range(3):
                row = plane[cu]
                for cv in range(3):
                    w = row[cv]
                    if w == zero:
                        continue
                    for bit, letter_p in ((1, pp), (0, qq)):
                        tnode = ac.goto[node][bit]
                        out = ac.out[tnode]
                        ncu = min(2, cu + (out & 1))
                        ncv = min(2, cv + ((out >> 1) & 1))
                        nxt[tnode][ncu][ncv] = nxt[tnode][ncu][ncv] + w * letter_p
        dp = nxt
    table: dict = {}
    for node in range(ac.size):
        for cu in range(3):
            for cv in range(3):
                w = dp[node][cu][cv]
                if w != zero:
                    key = (cu, cv)
                    table[key] = table.get(key, zero) + w
    return ExactDistribution(table=table, n=n, words=(u, v))


def occurrence_distribution_enumeration(
    u: Word,
    v: Optional[Word],
    n: int,
    params: ModelParams,
    mode: str = "float",
) -> ExactDistribution:
    """Same table as joint_occurrence_dp, by brute scan of all 2^n strings."""
    if n > ENUMERATION_MAX_CHARS:
        raise ResourceCapError(f"string enumeration capped at {ENUMERATION_MAX_CHARS} characters")
    if v is not None and (u.length != v.length or u.code == v.code):
        raise ValidationError("need distinct equal-length words")
    k = u.length
    codes = np.arange(1 << n, dtype=np.uint32)

    def class_counts(w: Word) -> np.ndarray:
        if n < w.length:
            return np.zeros(len(codes), dtype=np.int8)
        cnt = np.zeros(len(codes), dtype=np.int16)
        for t in range(n - w.length + 1):
            cnt += (codes >> np.uint32(n - w.length - t)) & np.uint32(
                (1 << w.length) - 1
            ) == np.uint32(w.code)
        return np.minimum(cnt, 2).astype(np.int8)

    cu = class_counts(u)
    cv = class_counts(v) if v is not None else np.zeros(len(codes), dtype=np.int8)
    pc = np.bitwise_count(codes).astype(np.int64)
    hist = np.zeros((n + 1, 3, 3), dtype=np.int64)
    np.add.at(hist, (pc, cu.astype(np.int64), cv.astype(np.int64)), 1)
    table: dict = {}
    if mode == "exact":
        pe, qe = params.prob(exact=True)
        for c in range(n + 1):
            w = pe ** c * qe ** (n - c)
            for i in range(3):
                for j in range(3):
                    if hist[c, i, j]:
                        table[(i, j)] = table.get((i, j), Fraction(0)) + w * int(hist[c, i, j])
    else:
        for c in range(n + 1):
            w = params.p ** c * params.q ** (n - c)
            for i in range(3):
                for j in range(3):
                    if hist[c, i, j]:
                        table[(i, j)] = table.get((i, j), 0.0) + w * float(hist[c, i, j])
    return ExactDistribution(table=table, n=n, words=(u, v))


def variance_from_dp_tables(n: int, k: int, params: ModelParams, mode: str = "exact"):
    """Var(X_{n,k}) assembled as sum of indicator variances + covariances,
    all class probabilities taken from the automaton DP at n+k-1 characters."""
    from .words import all_words  # local import to keep module load light

    if k > 6:
        raise ResourceCapError("DP-table variance assembly enumerates 4^k pairs; k <= 6")
    m = n + k - 1
    words = all_words(k)
    zero = Fraction(0) if mode == "exact" else 0.0
    phi = {}
    for u in words:
        d = joint_occurrence_dp(u, None, m, params, mode)
        phi[u.code] = d.prob(0, 0) + d.prob(1, 0)
    total = zero
    for u in words:
        f = phi[u.code]
        total += (1 - f) - (1 - f) ** 2
    for u in words:
        for v in words:
            if u.code >= v.code:
                continue
            d = joint_occurrence_dp(u, v, m, params, mode)
            pj = d.prob(0, 0) + d.prob(0, 1) + d.prob(1, 0) + d.prob(1, 1)
            cov = pj - phi[u.code] * phi[v.code]
            total += 2 * cov
    return total


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationConfig:
    n: int
    k: int
    replicates: int
    seed: int
    params: ModelParams

    def __post_init__(self):
        if self.replicates < 2:
            raise ValidationError("need at least 2 replicates")
        if not (1 <= self.k <= 64):
            raise ValidationError("k must be in 1..64")
        if self.n < 1:
            raise ValidationError("n must be >= 1")


@dataclass(frozen=True)
class ProfileSample:
    """Replicate summary of the simulated level-k profile.

    stderr_variance uses the fourth-central-moment estimate
    Var(s^2) ~ (m4 - s^4 (R-3)/(R-1)) / R.
    """

    mean: float
    variance: float
    stderr_variance: float
    replicates: int
    seed: int
    full_level_frequency: Optional[float] = None


def _threshold24(p: float) -> int:
    return int(round(p * (1 << 24)))


def simulate_profile(cfg: SimulationConfig) -> ProfileSample:
    """Monte Carlo X_{n,k}: per-replicate counter-seeded streams, so results
    are bit-identical for a given seed regardless of thread count."""
    _apply_thread_cap()
    from . import _mc

    out = np.zeros(cfg.replicates, dtype=np.int64)
    thr = _threshold24(cfg.params.p)
    if cfg.k <= _mc.TABLE_MAX_K:
        _mc.profile_counts_table(cfg.n, cfg.k, thr, cfg.seed, cfg.replicates, out)
    else:
        _mc.profile_counts_sorted(cfg.n, cfg.k, thr, cfg.seed, cfg.replicates, out)
    r = cfg.replicates
    mean = float(out.mean())
    var = float(out.var(ddof=1))
    centered = out - mean
    m4 = float(np.mean(centered.astype(np.float64) ** 4))
    se2 = (m4 - var * var * (r - 3) / (r - 1)) / r
    return ProfileSample(
        mean=mean,
        variance=var,
        stderr_variance=math.sqrt(max(se2, 0.0)),
        replicates=r,
        seed=cfg.seed,
    )


def simulate_full_level(cfg: SimulationConfig) -> ProfileSample:
    """Like simulate_profile, additionally reporting how often level k is
    completely filled (X = 2^k)."""
    _apply_thread_cap()
    from . import _mc

    if cfg.k > _mc.TABLE_MAX_K:
        raise ResourceCapError("full-level check needs the table path (k <= 22)")
    out = np.zeros(cfg.replicates, dtype=np.int64)
    thr = _threshold24(cfg.params.p)
    _mc.profile_counts_table(cfg.n, cfg.k, thr, cfg.seed, cfg.replicates, out)
    r = cfg.replicates
    mean = float(out.mean())
    var = float(out.var(ddof=1))
    centered = out - mean
    m4 = float(np.mean(centered.astype(np.float64) ** 4))
    se2 = (m4 - var * var * (r - 3) / (r - 1)) / r
    return ProfileSample(
        mean=mean,
        variance=var,
        stderr_variance=math.sqrt(max(se2, 0.0)),
        replicates=r,
        seed=cfg.seed,
        full_level_frequency=float(np.mean(out == (1 << cfg.k))),
    )
