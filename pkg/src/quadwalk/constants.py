"""The convergence constants c1(alpha), c2(alpha) and related predictions.

Three routes to the same numbers:

* exact: module zeta values at -1 and -3 (source of truth);
* series: representation numbers R_Q(n) summed directly;
* special: Dedekind zeta values, when the class group is small enough.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce

import mpmath

from .errors import DivergentSeriesError, PreconditionError
from .forms import (
    BinaryQuadraticForm,
    FundamentalUnit,
    class_number,
    equivalent,
    form_of,
    pell_smallest,
    primary_points_upto,
    unit_of_order,
)
from .qirr import QuadIrrational, QuadNumber, decompose_discriminant, factorize
from .zeta import SurdValue, dedekind_special, l_value, module_cycle, zeta_module_neg


@dataclass(frozen=True)
class ExactConstant:
    """coeff * sqrt(d) / log(eps)."""

    coeff: Fraction
    d: int
    unit: FundamentalUnit

    @cached_property
    def canonical(self) -> tuple[Fraction, int, int, int]:
        """(coeff', d, eta_t, eta_u) with value coeff' sqrt(d) / log(eta), eta the fundamental unit."""
        dec = decompose_discriminant(self.unit.D)
        t, u, _ = unit_of_order(dec.D0)
        s0 = 1 if dec.D0 == dec.d else 2
        eta = QuadNumber(Fraction(t, 2), Fraction(u * s0, 2), dec.d)
        eps = self.unit.eps
        k, acc = 1, eta
        while acc != eps:
            acc = acc * eta
            k += 1
        return self.coeff / k, self.d, t, u

    @property
    def eta(self) -> QuadNumber:
        _, d, t, u = self.canonical
        D0 = decompose_discriminant(self.unit.D).D0
        s0 = 1 if D0 == d else 2
        return QuadNumber(Fraction(t, 2), Fraction(u * s0, 2), d)

    def __eq__(self, other):
        if not isinstance(other, ExactConstant):
            return NotImplemented
        return self.canonical == other.canonical

    def __hash__(self):
        return hash(self.canonical)

    def to_mpf(self, prec: int = 128):
        with mpmath.workprec(prec + 16):
            return mpmath.mpf(self.coeff.numerator) / self.coeff.denominator * mpmath.sqrt(self.d) / self.unit.log_eps

    def __float__(self):
        return float(self.to_mpf())

    def display(self) -> str:
        c, d, _, _ = self.canonical
        num = "" if c.numerator == 1 else str(c.numerator)
        return f"{num}√{d}/({c.denominator} log({self.eta}))"

    def __str__(self):
        return self.display()


def _constant(coeff: Fraction, D: int) -> ExactConstant:
    dec = decompose_discriminant(D)
    return ExactConstant(coeff, dec.d, pell_smallest(D))


def c1_c2_exact(alpha: QuadIrrational) -> tuple[ExactConstant, ExactConstant]:
    cyc = module_cycle(alpha)
    D = cyc.D
    dec = decompose_discriminant(D)
    z1 = zeta_module_neg(cyc, 1)
    z3 = zeta_module_neg(cyc, 3)
    # 1/sqrt(D) = sqrt(d)/(s d)
    base = Fraction(1, dec.s * dec.d)
    c1 = 2 * z1 * base
    c2 = Fraction(4, 9 * D) * z3 * base
    return _constant(c1, D), _constant(c2, D)


def c_theta_exact(alpha: QuadIrrational, theta: int) -> float:
    """c(alpha, 2) = 4 pi^4 c1 and c(alpha, 4) = 8 pi^8 c2."""
    c1, c2 = c1_c2_exact(alpha)
    if theta == 2:
        return float(4 * mpmath.pi**4 * c1.to_mpf())
    if theta == 4:
        return float(8 * mpmath.pi**8 * c2.to_mpf())
    raise ValueError("exact values exist for theta = 2 and 4 only")


# ---------------------------------------------------------------- series path


@dataclass(frozen=True)
class SeriesResult:
    value: float
    tail_bound: float
    n_max: int
    envelope: float
    terms: int


def _count_envelope(values: list[int], checkpoints: list[int]) -> float:
    """max over checkpoints X of #{|n| <= X}/X."""
    values = sorted(values)
    best, j = 0.0, 0
    for X in checkpoints:
        while j < len(values) and values[j] <= X:
            j += 1
        best = max(best, j / X)
    return best


def c_theta_series(
    alpha: QuadIrrational, theta: float, tol: float = 1e-3, n_max: int | None = None, envelope_range: int = 10_000
) -> SeriesResult:
    """c(alpha, theta) from the representation-number series, with a tail bound.

    The tail is bounded through the counting function T(X) of primary
    representations with |Q| <= X: with T(X) <= K X (K measured up to
    `envelope_range` and doubled), partial summation gives
    tail <= theta K N^(1-theta)/(theta-1) - T(N) N^(-theta).
    """
    if theta <= 1:
        raise DivergentSeriesError("the series diverges for theta <= 1")
    Q = form_of(alpha)
    D = Q.discriminant
    unit = pell_smallest(D)
    scale = float(mpmath.mpf(D) ** (mpmath.mpf(theta) / 2) / unit.log_eps)

    pts = sorted(abs(v) for _, _, v in primary_points_upto(Q, envelope_range))
    checkpoints = [X for X in (10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000) if X <= envelope_range]
    K = 2 * _count_envelope(pts, checkpoints)

    def tail(N, count):
        return scale * max(theta * K * N ** (1 - theta) / (theta - 1) - count * N ** (-theta), 0.0)

    if n_max is None:
        # the count at N is at least about K N / 2, so this N is enough
        N = envelope_range
        while tail(N, 0.5 * K * N) > 0.5 * tol:
            N *= 2
    else:
        N = n_max
    if N > envelope_range:
        pts = sorted(abs(v) for _, _, v in primary_points_upto(Q, N))
    else:
        pts = [v for v in pts if v <= N]
    total = math.fsum(v ** (-theta) for v in pts)
    return SeriesResult(scale * total, tail(N, len(pts)), N, K, len(pts))


# ---------------------------------------------------------------- special paths


@dataclass(frozen=True)
class SpecialResult:
    path: str
    c1: ExactConstant
    c2: ExactConstant


def principal_form(D: int) -> BinaryQuadraticForm:
    sigma = D % 2
    return BinaryQuadraticForm(1, sigma, (sigma - D) // 4)


def _omega(n: int) -> int:
    return len(factorize(n))


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def _Z(dp: int, s: int) -> SurdValue:
    return l_value(dp, s)


def c1_c2_special_paths(alpha: QuadIrrational) -> SpecialResult | None:
    """Constants from Dedekind zeta values, or None when no special case applies."""
    Q = form_of(alpha)
    D = Q.discriminant
    dec = decompose_discriminant(D)
    if dec.f != 1:
        return None
    cd = class_number(D)
    h = cd.h
    d = dec.d
    unit = pell_smallest(D)
    if h == 1 or (h == 2 and not equivalent(Q, -Q)):
        z2 = dedekind_special(d, 2)
        z4 = dedekind_special(d, 4)
        c1 = z2.coeff * Fraction(D, 2 * h)
        c2 = z4.coeff * Fraction(D * D, 4 * h)
        return SpecialResult("classnumber", ExactConstant(c1, d, unit), ExactConstant(c2, d, unit))
    P = principal_form(D)
    if not (equivalent(Q, P) or equivalent(-Q, P)):
        return None
    w = _omega(d)
    if d % 4 == 1:
        if h != 2 ** (w - 1):
            return None
        sel = [k for k in _divisors(d) if k % 4 == 1]
        f1, f2 = Fraction(d, 4 * h), Fraction(d * d, 8 * h)
        path = "genus-i"
    elif d % 4 == 3:
        if h != 2**w:
            return None
        sel = _divisors(d)
        f1, f2 = Fraction(d, h), Fraction(2 * d * d, h)
        path = "genus-ii"
    else:
        if h != 2 ** (w - 1):
            return None
        sel = [k for k in _divisors(d) if k % 8 in (1, 5, d % 8)]
        f1, f2 = Fraction(d, h), Fraction(2 * d * d, h)
        path = "genus-iii"
    s2 = reduce(lambda x, y: x + y, [_Z(k, 2) * _Z(d // k, 2) for k in sel])
    s4 = reduce(lambda x, y: x + y, [_Z(k, 4) * _Z(d // k, 4) for k in sel])
    assert (s2.d, s2.pi_power, s4.d, s4.pi_power) == (d, 4, d, 8)
    return SpecialResult(path, ExactConstant(f1 * s2.coeff, d, unit), ExactConstant(f2 * s4.coeff, d, unit))


# ---------------------------------------------------------------- step laws and predictions


@dataclass(frozen=True)
class StepLaw:
    support: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        merged: dict[int, Fraction] = {}
        for v, p in self.support:
            p = Fraction(p)
            if p <= 0:
                raise PreconditionError("probabilities must be positive")
            merged[int(v)] = merged.get(int(v), Fraction(0)) + p
        if sum(merged.values()) != 1:
            raise PreconditionError("probabilities must sum to 1")
        object.__setattr__(self, "support", tuple(sorted(merged.items())))

    @classmethod
    def parse(cls, text: str) -> StepLaw:
        from .errors import ParseError

        items = []
        pos = 0
        for chunk in text.split(","):
            if ":" not in chunk:
                raise ParseError("expected value:probability", text, pos)
            v, p = chunk.split(":", 1)
            try:
                items.append((int(v), Fraction(p.strip())))
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad law entry {chunk!r}", text, pos) from None
            pos += len(chunk) + 1
        try:
            return cls(tuple(items))
        except PreconditionError as exc:
            raise ParseError(str(exc), text, 0) from None

    def __str__(self):
        return ",".join(f"{v}:{p}" for v, p in self.support)

    @property
    def values(self) -> list[int]:
        return [v for v, _ in self.support]

    @property
    def L(self) -> int:
        return reduce(math.gcd, (abs(v) for v in self.values))

    def moment(self, p: int) -> Fraction:
        return sum((Fraction(v) ** p * w for v, w in self.support), Fraction(0))

    @property
    def mean(self) -> Fraction:
        return self.moment(1)

    @property
    def sigma2(self) -> Fraction:
        """E(X^2), the scale entering the walk constants."""
        return self.moment(2)

    @property
    def variance(self) -> Fraction:
        return self.moment(2) - self.mean**2

    @property
    def nondegenerate(self) -> bool:
        return len(self.support) >= 2

    def char_fn(self, x: float) -> complex:
        return sum(float(p) * cmath.exp(1j * x * v) for v, p in self.support)


def require_walk_law(law: StepLaw) -> None:
    if not law.nondegenerate:
        raise PreconditionError("step law needs at least two support points")
    if law.mean != 0:
        raise PreconditionError("step law must have mean zero")


@dataclass(frozen=True)
class WalkPrediction:
    L: int
    sigma2: Fraction
    L_alpha: QuadIrrational
    c1: ExactConstant
    c2: ExactConstant
    A_E: float
    A_V: float


def walk_prediction(law: StepLaw, alpha: QuadIrrational) -> WalkPrediction:
    require_walk_law(law)
    L = law.L
    La = alpha.scale(L)
    c1, c2 = c1_c2_exact(La)
    s2 = law.sigma2
    A_E = float(L**2 * c1.to_mpf() / (s2.numerator / mpmath.mpf(s2.denominator)))
    A_V = float(L**4 * c2.to_mpf() / (s2.numerator / mpmath.mpf(s2.denominator)) ** 2)
    return WalkPrediction(L, s2, La, c1, c2, A_E, A_V)


def _g_term(law: StepLaw, alpha: QuadIrrational, m: int):
    """(1 - |phi|^2)/|1 - phi|^2 at 2 pi m alpha, reducing k m alpha mod 1 exactly."""
    phi = mpmath.mpc(0)
    for v, p in law.support:
        x = alpha.value * (m * v)
        frac = (x - x.floor()).to_mpf(160)
        phi += mpmath.mpf(p.numerator) / p.denominator * mpmath.expjpi(2 * frac)
    return (1 - abs(phi) ** 2) / abs(1 - phi) ** 2


def thm3_main_terms(law: StepLaw, alpha: QuadIrrational, N: int) -> tuple[float, float]:
    """Finite-N main terms for the mean and variance of W^2 of the walk."""
    if not law.nondegenerate:
        raise PreconditionError("step law needs at least two support points")
    if N < 1:
        raise ValueError("N must be positive")
    M = math.isqrt(N)
    with mpmath.workprec(160):
        mean = mpmath.mpf(0)
        var = mpmath.mpf(0)
        for m in range(1, M + 1):
            g = _g_term(law, alpha, m)
            mean += g / (2 * mpmath.pi**2 * m**2)
            var += g**2 / (4 * mpmath.pi**4 * m**4)
        return float(mean / N), float(var / N**2)
