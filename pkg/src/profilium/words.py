"""Binary-alphabet word machinery: probabilities, overlaps, correlation sums.

Model conventions
-----------------
Letters come from the two-letter alphabet {a, b} with P(a) = p, P(b) = q,
q = 1 - p and p > q (so p in (1/2, 1)).  A word u with i letters 'a' and
j letters 'b' has probability pro(u) = p^i q^j.

Words are stored as packed bit sequences: letter 'a' is bit 1, letter 'b'
is bit 0, first letter in the most significant position.  This makes
prefix/suffix extraction, equality tests and k-gram windows O(1) shift/mask
operations for lengths up to 64.

The correlation polynomial of an ordered pair (u, v) is the
probability-weighted overlap polynomial: for every length l >= 1 such that
the length-l suffix of u equals the length-l prefix of v, it carries the
term pro(v_{l+1..|v|}) * z^{|v|-l}.  For u = v the full overlap l = |u|
contributes the constant term 1; for distinct words of equal length the
constant term is 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import ResourceCapError, ValidationError

#: full pairwise enumeration is kept to 4^k loops at most this k
PAIR_ENUMERATION_MAX_K = 8
#: single-word full enumeration cap (2^k words)
WORD_ENUMERATION_MAX_K = 12
#: overlap-class reorganization of the pair correlation sum stays exact and
#: O(2^k k^2); this cap keeps it in the sub-second range
DECAY_SUM_MAX_K = 18

_Scalar = Union[float, Fraction]


def _to_fraction(x) -> Fraction:
    """Exact rational from a user-facing probability.

    Accepts Fraction, int, or a decimal given as str/float.  Floats are
    interpreted through their shortest decimal repr ("0.7" -> 7/10), which
    is the convention used throughout the exact mode.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


@dataclass(frozen=True)
class ModelParams:
    """Probabilistic model: source bias plus the (n, k, alpha) geometry.

    Exactly the fields needed by downstream evaluators: p and q describe
    the memoryless binary source; n is the number of suffixes, k the level
    depth, and alpha = k / ln(n) the depth ratio.  n, k, alpha may be left
    unset for operations that only need the source.  When n and alpha are
    given, k = round(alpha * ln n) (>= 1); when n and k are given, alpha is
    derived as k / ln(n).
    """

    p: float
    n: Optional[int] = None
    k: Optional[int] = None
    alpha: Optional[float] = None
    p_exact: Fraction = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.p_exact is None:
            object.__setattr__(self, "p_exact", _to_fraction(self.p))
        object.__setattr__(self, "p", float(self.p_exact))
        if not (0.5 < self.p < 1.0):
            raise ValidationError(
                f"need 0 < q < p < 1 with p + q = 1, got p={self.p}"
            )
        if self.n is not None and self.n < 0:
            raise ValidationError(f"n must be >= 0, got {self.n}")
        if self.k is not None and self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.alpha is not None and self.alpha <= 0:
            raise ValidationError(f"alpha must be > 0, got {self.alpha}")
        if self.n is not None and self.n >= 2:
            ln_n = math.log(self.n)
            if self.k is None and self.alpha is not None:
                object.__setattr__(self, "k", max(1, round(self.alpha * ln_n)))
            if self.alpha is None and self.k is not None:
                object.__setattr__(self, "alpha", self.k / ln_n)

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def q_exact(self) -> Fraction:
        return 1 - self.p_exact

    def prob(self, exact: bool = False):
        """(P(a), P(b)) in the requested arithmetic."""
        if exact:
            return self.p_exact, self.q_exact
        return self.p, self.q

    def require_nk(self) -> tuple:
        if self.n is None or self.k is None:
            raise ValidationError("operation requires both n and k (or n and alpha)")
        return self.n, self.k


@dataclass(frozen=True)
class Word:
    """Packed word over {a, b}: 'a' = bit 1, first letter most significant."""

    code: int
    length: int

    def __post_init__(self):
        if self.length < 0 or self.length > 64:
            raise ValidationError(f"word length must be in 0..64, got {self.length}")
        if self.code < 0 or self.code >> self.length:
            raise ValidationError("word code does not fit the stated length")

    @classmethod
    def from_text(cls, text: str) -> "Word":
        code = 0
        for ch in text:
            if ch == "a":
                code = (code << 1) | 1
            elif ch == "b":
                code = code << 1
            else:
                raise ValidationError(f"letters must be 'a' or 'b', got {ch!r}")
        return cls(code, len(text))

    def to_text(self) -> str:
        return "".join(
            "a" if (self.code >> (self.length - 1 - i)) & 1 else "b"
            for i in range(self.length)
        )

    def __len__(self) -> int:
        return self.length

    @property
    def a_count(self) -> int:
        return self.code.bit_count()

    @property
    def b_count(self) -> int:
        return self.length - self.a_count

    def prefix(self, l: int) -> "Word":
        return Word(self.code >> (self.length - l), l)

    def suffix(self, l: int) -> "Word":
        return Word(self.code & ((1 << l) - 1), l)

    def tail(self, l: int) -> "Word":
        """The word with its first l letters removed."""
        return self.suffix(self.length - l)

    def concat(self, other: "Word") -> "Word":
        return Word((self.code << other.length) | other.code, self.length + other.length)

    def __str__(self) -> str:
        return self.to_text()


def all_words(k: int):
    """All 2^k words of length k, in code order."""
    if k > WORD_ENUMERATION_MAX_K:
        raise ResourceCapError(f"word enumeration capped at k <= {WORD_ENUMERATION_MAX_K}")
    return [Word(c, k) for c in range(1 << k)]


def pro(u: Word, params: ModelParams, exact: bool = False) -> _Scalar:
    """Occurrence probability of the word: p^{#a} q^{#b}."""
    if u.length == 0:
        raise ValidationError("pro() is undefined for the empty word")
    pp, qq = params.prob(exact)
    return pp ** u.a_count * qq ** u.b_count


@dataclass(frozen=True)
class CorrelationPolynomial:
    """Probability-weighted overlap polynomial, as an exponent->weight map."""

    coefficients: dict

    def at_one(self) -> _Scalar:
        return sum(self.coefficients.values()) if self.coefficients else 0

    def degree(self) -> int:
        return max(self.coefficients) if self.coefficients else 0

    def coefficient_list(self):
        """Dense ascending coefficient list (empty polynomial -> [0])."""
        if not self.coefficients:
            return [0]
        out = [0] * (self.degree() + 1)
        for e, w in self.coefficients.items():
            out[e] = out[e] + w
        return out

    def is_zero(self) -> bool:
        return not self.coefficients


def correlation_poly(
    u: Word, v: Word, params: ModelParams, exact: bool = False
) -> CorrelationPolynomial:
    """Correlation polynomial of the ordered pair (u, v).

    Term pro(v_{l+1..|v|}) * z^{|v|-l} for every l >= 1 with
    suffix_l(u) == prefix_l(v); the full overlap l = |v| (possible only if
    the suffix of u of that length IS v) contributes the constant term 1.
    """
    if u.length == 0 or v.length == 0:
        raise ValidationError("correlation polynomial needs nonempty words")
    coeffs: dict = {}
    for l in range(1, min(u.length, v.length) + 1):
        if u.suffix(l).code == v.prefix(l).code:
            w = pro(v.tail(l), params, exact) if l < v.length else (Fraction(1) if exact else 1.0)
            e = v.length - l
            coeffs[e] = coeffs.get(e, Fraction(0) if exact else 0.0) + w
    return CorrelationPolynomial(coeffs)


@dataclass(frozen=True)
class OverlapDecomposition:
    """Maximal-overlap split u = sigma.w, v = w.theta of an ordered pair.

    ell is the length of sigma and theta (so the shared block w has length
    k - ell); (r, c, d) = (ell/k, i/ell, j/ell) are the class coordinates
    with i, j the 'a'-counts of sigma and theta.
    """

    sigma: Word
    w: Word
    theta: Word
    ell: int
    i: int
    j: int
    r: float
    c: float
    d: float


def maximal_overlap(u: Word, v: Word) -> Optional[OverlapDecomposition]:
    """Longest suffix of u equal to a prefix of v, as a decomposition.

    Requires distinct words of equal length; returns None when no overlap
    of length 1..k-1 exists.
    """
    if u.length != v.length:
        raise ValidationError("overlap decomposition needs words of equal length")
    if u.code == v.code:
        raise ValidationError("overlap decomposition requires distinct words")
    k = u.length
    for wl in range(k - 1, 0, -1):
        if u.suffix(wl).code == v.prefix(wl).code:
            ell = k - wl
            sigma = u.prefix(ell)
            theta = v.tail(wl)
            return OverlapDecomposition(
                sigma=sigma,
                w=u.suffix(wl),
                theta=theta,
                ell=ell,
                i=sigma.a_count,
                j=theta.a_count,
                r=ell / k,
                c=sigma.a_count / ell,
                d=theta.a_count / ell,
            )
    return None


@dataclass(frozen=True)
class PairStats:
    """Per-pair scalars used by the mid-level variance sums.

    P_uv = pro(u) + pro(v); Theta_uv = pro(u) C_{u,v}(1) + pro(v) C_{v,u}(1);
    K_uv = (2k - 1) pro(u) pro(v).  Q_st/T_st come from the maximal-overlap
    decomposition (sum and product of the sigma/theta probabilities) and are
    None when the pair does not overlap.
    """

    P_uv: float
    Theta_uv: float
    K_uv: float
    Q_st: Optional[float]
    T_st: Optional[float]
    overlap: Optional[OverlapDecomposition]


def pair_stats(u: Word, v: Word, params: ModelParams) -> PairStats:
    if u.length != v.length:
        raise ValidationError("pair statistics need words of equal length")
    if u.code == v.code:
        raise ValidationError("pair statistics require distinct words")
    k = u.length
    pu, pv = pro(u, params), pro(v, params)
    theta = pu * correlation_poly(u, v, params).at_one() + pv * correlation_poly(
        v, u, params
    ).at_one()
    dec = maximal_overlap(u, v)
    q_st = t_st = None
    if dec is not None:
        ps, pt = pro(dec.sigma, params), pro(dec.theta, params)
        q_st, t_st = ps + pt, ps * pt
    return PairStats(
        P_uv=pu + pv,
        Theta_uv=theta,
        K_uv=(2 * k - 1) * pu * pv,
        Q_st=q_st,
        T_st=t_st,
        overlap=dec,
    )


# ---------------------------------------------------------------------------
# Correlation decay sums (exact, vectorized)
# ---------------------------------------------------------------------------

def _bit_pro(codes: np.ndarray, nbits: int, lp: float, lq: float) -> np.ndarray:
    cnt = np.bitwise_count(codes).astype(np.int64)
    return np.exp(cnt * lp + (nbits - cnt) * lq)


def correlation_decay_sums(k: int, params: ModelParams) -> tuple:
    """The two exact correlation sums controlling overlap decay.

    Returns (S1, S2) with
        S1 = sum over u in A^k of pro(u) (C_{u,u}(1) - 1),
        S2 = sum over ordered pairs u != v of pro(u) C_{u,v}(1) C_{v,u}(1).

    Both are computed exactly.  S1 is a 2^k scan over self-overlap lengths.
    S2 is reorganized over the pair of overlap lengths (l1, l2): for fixed
    lengths, the compatible partners v of each u form either a free family
    (l1 + l2 <= k, inner sum in closed form) or a single determined word
    (l1 + l2 > k, consistency checked bitwise).  This keeps the cost at
    O(2^k k^2) vector operations instead of a 4^k pair loop.
    """
    if not (1 <= k <= DECAY_SUM_MAX_K):
        raise ResourceCapError(f"correlation_decay_sums capped at k <= {DECAY_SUM_MAX_K}")
    lp, lq = math.log(params.p), math.log(params.q)
    codes = np.arange(1 << k, dtype=np.uint64)
    pro_u = _bit_pro(codes, k, lp, lq)

    def low(c, nb):
        return c & np.uint64((1 << nb) - 1)

    def selfov(l):
        return low(codes, l) == (codes >> np.uint64(k - l))

    def tail_pro(c, l):
        # probability of the last k-l letters (low k-l bits)
        return _bit_pro(low(c, k - l), k - l, lp, lq)

    s1 = 0.0
    for l in range(1, k):
        m = selfov(l)
        s1 += float(np.sum(pro_u[m] * tail_pro(codes[m], l)))

    s2 = 0.0
    for l1 in range(1, k):
        for l2 in range(1, k):
            tail2 = tail_pro(codes, l2)
            if l1 + l2 <= k:
                pref2 = codes >> np.uint64(k - l2)
                s_free = _bit_pro(pref2, l2, lp, lq)
                m = selfov(l1) & selfov(l2)
                s_free = s_free.copy()
                s_free[m] -= tail_pro(codes[m], l1)
                s2 += float(np.sum(pro_u * tail2 * s_free))
            else:
                ov = l1 + l2 - k
                vtop = low(codes, l1)          # suffix_{l1}(u) -> v bits k-1..k-l1
                vbot = codes >> np.uint64(k - l2)  # prefix_{l2}(u) -> v bits l2-1..0
                consistent = low(vtop, ov) == (vbot >> np.uint64(k - l1))
                v = (vtop << np.uint64(k - l1)) | vbot
                m = consistent & (v != codes)
                vt = low(v[m], k - l1)
                s2 += float(
                    np.sum(pro_u[m] * tail2[m] * _bit_pro(vt, k - l1, lp, lq))
                )
    return s1, s2
