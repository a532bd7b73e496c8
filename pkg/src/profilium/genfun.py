"""Exact generating-function engine for word-occurrence probabilities.

For a word u of length k with autocorrelation polynomial C_{u,u}(z) the
denominator

    D_u(z) = (1 - z) C_{u,u}(z) + z^k pro(u)

drives the occurrence counts:  C_{u,u}/D_u and pro(u) z^k / D_u^2 are the
ordinary generating functions of P(U_n = 0) and P(U_n = 1), where U_n
counts occurrences of u in the first n characters of the source.  For an
ordered pair (u, v) of distinct equal-length words, with

    psi    = C_{u,u} C_{v,v} - C_{u,v} C_{v,u},
    phi_u  = C_{v,v} - C_{u,v},          phi_v = C_{u,u} - C_{v,u},
    delta  = (1 - z) psi + z^k (phi_u pro(u) + phi_v pro(v)),

the joint class probabilities P(U_n = i, V_n = j), 0 <= i, j <= 1, have the
rational forms G_{i,j} / delta^{i+j+1} with

    G_00 = psi,
    G_10 = delta C_{v,v} - psi D_v,      G_01 = delta C_{u,u} - psi D_u,
    G_11 = delta^2 - delta (C_{v,v} D_u + C_{u,u} D_v + (1-z) psi)
           + 2 psi D_u D_v.

Coefficients are extracted by the denominator-driven linear recurrence
(exact in rational mode).  The dominant real root R > 1 of each denominator
yields residue estimates for P(U_{n+k-1} = i) with geometric error; the
residue constants below are the full Laurent data of the simple, double and
triple poles (all polynomial derivatives taken exactly, never by finite
differences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import NumericError, ResourceCapError, ValidationError
from .words import (
    PAIR_ENUMERATION_MAX_K,
    ModelParams,
    Word,
    all_words,
    correlation_poly,
    pro,
)

_Scalar = Union[float, Fraction]

DEFAULT_RADIUS = 1.25
WINDING_SAMPLES = 4096
#: joint and single roots closer than this are flagged as possibly merged
ROOT_MERGE_TOL = 1e-9


class Polynomial:
    """Dense polynomial over float or Fraction coefficients (index = power)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = list(coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0]
        self.coeffs = cs

    @classmethod
    def zero(cls):
        return cls([0])

    @classmethod
    def monomial(cls, coeff, power: int):
        return cls([0] * power + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self[i] + other[i] for i in range(n)])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self[i] - other[i] for i in range(n)])

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    def scale(self, c) -> "Polynomial":
        return Polynomial([c * a for a in self.coeffs])

    def power(self, e: int) -> "Polynomial":
        out = Polynomial([1])
        for _ in range(e):
            out = out * self
        return out

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial.zero()
        return Polynomial([i * self.coeffs[i] for i in range(1, len(self.coeffs))])

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def as_float(self) -> "Polynomial":
        return Polynomial([float(c) for c in self.coeffs])

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs})"


@dataclass(frozen=True)
class RationalGF:
    """numerator / denominator**denominator_power, a probability series."""

    numerator: Polynomial
    denominator: Polynomial
    denominator_power: int = 1

    def __post_init__(self):
        if self.denominator[0] == 0:
            raise ValidationError("rational generating function needs denominator(0) != 0")


def _one_minus_z(exact: bool) -> Polynomial:
    one = Fraction(1) if exact else 1.0
    return Polynomial([one, -one])


def build_single_gfs(u: Word, params: ModelParams, exact: bool = False):
    """(D_u, G0, G1): denominator and the class-0/class-1 occurrence GFs."""
    k = u.length
    cu = Polynomial(correlation_poly(u, u, params, exact).coefficient_list())
    pu = pro(u, params, exact)
    D = _one_minus_z(exact) * cu + Polynomial.monomial(pu, k)
    g0 = RationalGF(cu, D, 1)
    g1 = RationalGF(Polynomial.monomial(pu, k), D, 2)
    return D, g0, g1


def build_joint_gfs(u: Word, v: Word, params: ModelParams, exact: bool = False):
    """(delta, G00, G10, G01, G11) for an ordered pair of distinct words."""
    if u.length != v.length:
        raise ValidationError("joint generating functions need equal lengths")
    if u.code == v.code:
        raise ValidationError("joint generating functions require distinct words")
    k = u.length
    cu = Polynomial(correlation_poly(u, u, params, exact).coefficient_list())
    cv = Polynomial(correlation_poly(v, v, params, exact).coefficient_list())
    cuv = Polynomial(correlation_poly(u, v, params, exact).coefficient_list())
    cvu = Polynomial(correlation_poly(v, u, params, exact).coefficient_list())
    pu, pv = pro(u, params, exact), pro(v, params, exact)
    omz = _one_minus_z(exact)
    psi = cu * cv - cuv * cvu
    phi_u = cv - cuv
    phi_v = cu - cvu
    delta = omz * psi + Polynomial.monomial(pu, k) * phi_u + Polynomial.monomial(pv, k) * phi_v
    Du = omz * cu + Polynomial.monomial(pu, k)
    Dv = omz * cv + Polynomial.monomial(pv, k)
    g00 = RationalGF(psi, delta, 1)
    g10 = RationalGF(delta * cv - psi * Dv, delta, 2)
    g01 = RationalGF(delta * cu - psi * Du, delta, 2)
    g11_num = delta * delta - delta * (cv * Du + cu * Dv + omz * psi) + (psi * Du * Dv).scale(
        Fraction(2) if exact else 2.0
    )
    g11 = RationalGF(g11_num, delta, 3)
    return delta, g00, g10, g01, g11


def series_coeff(gf: RationalGF, n: int, mode: str = "float") -> _Scalar:
    """Coefficient of z^n via the denominator-driven linear recurrence."""
    if n < 0:
        raise ValidationError("series index must be >= 0")
    if mode not in ("float", "exact"):
        raise ValidationError(f"mode must be 'float' or 'exact', got {mode!r}")
    return series_coeffs(gf, n, mode)[n]


def series_coeffs(gf: RationalGF, n: int, mode: str = "float"):
    """All coefficients 0..n of the rational series, one recurrence pass."""
    den = gf.denominator.power(gf.denominator_power)
    num = gf.numerator
    if mode == "float":
        den = den.as_float()
        num = num.as_float()
    d0 = den[0]
    out = []
    for t in range(n + 1):
        s = num[t]
        for j in range(1, min(t, den.degree) + 1):
            s -= den[j] * out[t - j]
        out.append(s / d0)
    return out


@dataclass(frozen=True)
class RootCertificate:
    """Dominant-root location plus an argument-principle uniqueness check.

    `radius` is the contour radius actually used for the winding count
    (a multiple of the located root, capped at the midpoint to the next
    root when one is known); `winding_count` must be 1 for the certificate
    to hold.  `residual` is |poly(root)| relative to the coefficient scale.
    """

    root: float
    radius: float
    winding_count: int
    residual: float
    second_root_modulus: Optional[float]

    @property
    def ok(self) -> bool:
        return self.winding_count == 1


def dominant_root(poly: Polynomial, radius: float = DEFAULT_RADIUS) -> RootCertificate:
    """Locate the smallest real root > 1 and certify its uniqueness.

    Newton iteration seeded at z = 1 (with bisection safeguard) finds the
    root; the argument-principle integral of p'/p over the circle of radius
    `radius * root` (capped at the midpoint to the second-smallest-modulus
    root, found by companion-matrix root-finding) must report exactly one
    enclosed zero.
    """
    if radius <= 1.0:
        raise ValidationError("certificate radius multiplier must exceed 1")
    pf = poly.as_float()
    if pf.degree < 1:
        raise ValidationError("constant polynomial has no root")
    scale = max(abs(c) for c in pf.coeffs)
    d = pf.derivative()

    # bracket: value at 1 is positive (it equals pro(u) or the phi-combination);
    # walk right until a sign change
    a, fa = 1.0, pf(1.0)
    if fa <= 0:
        raise ValidationError("expected positive value at z = 1")
    b, fb = a, fa
    step = 0.25
    while fb > 0:
        b += step
        fb = pf(b)
        step *= 1.5
        if b > 1e9:
            raise NumericError("no sign change found right of z = 1")
    # safeguarded Newton
    x = b
    for _ in range(200):
        fx = pf(x)
        if fx > 0:
            a = x
        else:
            b = min(b, x) if fx < 0 else x
        dx = d(x)
        if dx != 0:
            x_new = x - fx / dx
        else:
            x_new = 0.5 * (a + b)
        if not (a <= x_new <= b):
            x_new = 0.5 * (a + b)
        if abs(x_new - x) < 1e-16 * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new
    root = x
    residual = abs(pf(root)) / scale

    # full root set for the contour cap
    second = None
    try:
        allroots = np.roots(list(reversed(pf.coeffs)))
        others = sorted(
            abs(r) for r in allroots if abs(r - root) > 1e-8 * max(1.0, abs(root))
        )
        if others:
            second = float(others[0])
    except np.linalg.LinAlgError:
        pass

    contour = radius * root
    if second is not None and second > root:
        contour = min(contour, 0.5 * (root + second))

    # argument principle: (1/2pi i) * integral of p'/p around |z| = contour,
    # parametrized z = contour * e^{it}: winding = mean over t of Re(z p'/p)
    ts = np.linspace(0.0, 2.0 * math.pi, WINDING_SAMPLES, endpoint=False)
    zs = contour * np.exp(1j * ts)
    pv = np.polyval(list(reversed(pf.coeffs)), zs)
    dv = np.polyval(list(reversed(d.coeffs)), zs)
    winding = float(np.mean((zs * dv / pv).real))
    winding_count = int(round(winding))

    return RootCertificate(
        root=root,
        radius=contour,
        winding_count=winding_count,
        residual=residual,
        second_root_modulus=second,
    )


@dataclass(frozen=True)
class ResidueConstants:
    """Laurent data of the occurrence GFs at their dominant root.

    Single word (simple pole of G0/D, double pole of G1/D^2):
        P(U_{n+k-1} = 0) ~ c00 / R^{n+k}
        P(U_{n+k-1} = 1) ~ c10 / R^n + c11 n / R^{n+1}

    Joint pair (poles of order 1..3 of G_ij/delta^{i+j+1}), with N = n+k:
        P(0,0) ~ a00 / R^N
        P(1,0) ~ a10u / R^N + a11u N / R^{N+1}     (and a10v/a11v for (0,1))
        P(1,1) ~ a20 / R^N + a21 N / R^{N+1} + a22 N(N+1) / R^{N+2}
    """

    root: float
    certificate: RootCertificate
    c00: float = 0.0
    c10: float = 0.0
    c11: float = 0.0
    a00: float = 0.0
    a10u: float = 0.0
    a10v: float = 0.0
    a11u: float = 0.0
    a11v: float = 0.0
    a20: float = 0.0
    a21: float = 0.0
    a22: float = 0.0
    merged_root_flag: bool = False


def residue_constants_single(
    u: Word, params: ModelParams, radius: float = DEFAULT_RADIUS
) -> ResidueConstants:
    D, g0, g1 = build_single_gfs(u, params)
    cert = dominant_root(D, radius)
    R = cert.root
    Df = D.as_float()
    d1 = Df.derivative()(R)
    if abs(d1) < 1e-12:
        raise NumericError(f"degenerate dominant root for word {u}: |D'(R)| < 1e-12")
    d2 = Df.derivative().derivative()(R)
    cu = g0.numerator.as_float()
    pu = pro(u, params)
    return ResidueConstants(
        root=R,
        certificate=cert,
        c00=-cu(R) / d1,
        c10=pu * d2 / d1 ** 3,
        c11=pu / d1 ** 2,
    )


def residue_constants_joint(
    u: Word, v: Word, params: ModelParams, radius: float = DEFAULT_RADIUS
) -> ResidueConstants:
    delta, g00, g10, g01, g11 = build_joint_gfs(u, v, params)
    cert = dominant_root(delta, radius)
    R = cert.root
    df = delta.as_float()
    d1 = df.derivative()(R)
    if abs(d1) < 1e-12:
        raise NumericError("degenerate joint dominant root: |delta'(R)| < 1e-12")
    d2 = df.derivative().derivative()(R)
    d3 = df.derivative().derivative().derivative()(R)

    psi = g00.numerator.as_float()
    G10 = g10.numerator.as_float()
    G01 = g01.numerator.as_float()
    G11 = g11.numerator.as_float()

    n10, n10p = G10(R), G10.derivative()(R)
    n01, n01p = G01(R), G01.derivative()(R)
    n11, n11p, n11pp = G11(R), G11.derivative()(R), G11.derivative().derivative()(R)

    merged = False
    for w in (u, v):
        Dw, _, _ = build_single_gfs(w, params)
        Rw = dominant_root(Dw, radius).root
        if abs(R - Rw) < ROOT_MERGE_TOL:
            merged = True

    return ResidueConstants(
        root=R,
        certificate=cert,
        a00=-psi(R) / d1,
        a10u=n10 * d2 / d1 ** 3 - n10p / d1 ** 2,
        a10v=n01 * d2 / d1 ** 3 - n01p / d1 ** 2,
        a11u=n10 / d1 ** 2,
        a11v=n01 / d1 ** 2,
        a20=-n11pp / (2 * d1 ** 3)
        + 3 * n11p * d2 / (2 * d1 ** 4)
        - n11 * (3 * d2 ** 2 - d1 * d3) / (2 * d1 ** 5),
        a21=n11p / d1 ** 3 - 3 * n11 * d2 / (2 * d1 ** 4),
        a22=-n11 / (2 * d1 ** 3),
        merged_root_flag=merged,
    )


@dataclass(frozen=True)
class AggregateConstants:
    """Polynomial-in-n coefficients of the root-based class estimates.

    Single word (from u):   P(U_{n+k-1} <= 1) ~ (C0 + n C1) / R_u^n
    Ordered pair:           P(both <= 1)      ~ sum_i A_i n^i / R_{u,v}^n
    Product of marginals:                      ~ sum_i B_i n^i / (R_u R_v)^n
    """

    A0: float
    A1: float
    A2: float
    B0: float
    B1: float
    B2: float
    C0: float
    C1: float


def _single_C(rc: ResidueConstants, k: int) -> tuple:
    R = rc.root
    return rc.c00 / R ** k + rc.c10, rc.c11 / R


def _joint_A(rc: ResidueConstants, k: int) -> tuple:
    R = rc.root
    return (
        (rc.a00 + rc.a10u + rc.a10v + rc.a20) / R ** k
        + (rc.a11u + rc.a11v + rc.a21) * k / R ** (k + 1)
        + rc.a22 * k * (k + 1) / R ** (k + 2),
        (rc.a11u + rc.a11v + rc.a21) / R ** (k + 1) + rc.a22 * (2 * k + 1) / R ** (k + 2),
        rc.a22 / R ** (k + 2),
    )


def aggregate_constants(
    u: Word, v: Word, params: ModelParams, radius: float = DEFAULT_RADIUS
) -> AggregateConstants:
    """Collect the residue data of (u, v) into per-order-of-n constants.

    The A/B/C groupings restate the residue estimates of
    residue_constants_single/joint as polynomials in n over R^{-n}; they are
    exactly the coefficients obtained by substituting N = n + k and
    expanding, so the assembled estimates agree with the Laurent data to
    the same geometric error.
    """
    k = u.length
    rcu = residue_constants_single(u, params, radius)
    rcv = residue_constants_single(v, params, radius)
    rcj = residue_constants_joint(u, v, params, radius)
    C0u, C1u = _single_C(rcu, k)
    C0v, C1v = _single_C(rcv, k)
    A0, A1, A2 = _joint_A(rcj, k)
    return AggregateConstants(
        A0=A0,
        A1=A1,
        A2=A2,
        B0=C0u * C0v,
        B1=C0u * C1v + C1u * C0v,
        B2=C1u * C1v,
        C0=C0u,
        C1=C1u,
    )


@dataclass(frozen=True)
class RootVarianceEstimate:
    value: float
    error_scale: float
    n: int
    k: int


def variance_via_roots(
    n: int, k: int, params: ModelParams, radius: float = DEFAULT_RADIUS
) -> RootVarianceEstimate:
    """Profile variance from the dominant-root estimates.

    Assembles, over all words u of length k and all ordered pairs u != v,

        sum_u [(1 - phi_u) - (1 - phi_u)^2]
        + sum_{u != v} sum_i (A_i / R_uv^n - B_i / (R_u R_v)^n) n^i,

    with phi_u = (C0 + n C1) / R_u^n the estimate of P(U_{n+k-1} <= 1).
    The reported error_scale bounds the neglected subdominant-singularity
    contributions: each entity contributes ~ rho_2^{-n} with rho_2 its
    second-smallest root modulus.
    """
    if k > PAIR_ENUMERATION_MAX_K:
        raise ResourceCapError(
            f"variance_via_roots enumerates 4^k pairs; capped at k <= {PAIR_ENUMERATION_MAX_K}"
        )
    words = all_words(k)
    singles = {}
    err = 0.0
    for u in words:
        rc = residue_constants_single(u, params, radius)
        singles[u.code] = (rc.root, *_single_C(rc, k))
        rho2 = rc.certificate.second_root_modulus
        err += (rho2 ** (-n)) if rho2 is not None else rc.root ** (-n)
    total = 0.0
    for u in words:
        R, C0, C1 = singles[u.code]
        phi = (C0 + n * C1) / R ** n
        total += (1.0 - phi) - (1.0 - phi) ** 2
    for u in words:
        for v in words:
            if u.code == v.code:
                continue
            rcj = residue_constants_joint(u, v, params, radius)
            Ruv = rcj.root
            Ru, C0u, C1u = singles[u.code]
            Rv, C0v, C1v = singles[v.code]
            A = _joint_A(rcj, k)
            B = (C0u * C0v, C0u * C1v + C1u * C0v, C1u * C1v)
            for i in range(3):
                total += (A[i] / Ruv ** n - B[i] / (Ru * Rv) ** n) * n ** i
            rho2 = rcj.certificate.second_root_modulus
            err += (rho2 ** (-n)) if rho2 is not None else Ruv ** (-n)
    return RootVarianceEstimate(value=total, error_scale=err, n=n, k=k)
