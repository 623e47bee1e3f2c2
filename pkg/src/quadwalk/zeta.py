"""Special values: Bernoulli numbers, Dedekind zeta at 2 and 4, and module zeta values.

Negative-integer values of the zeta function of a module Z*alpha + Z are
rational and come from Zagier's formula over the cycle of reduced numbers
in the backward continued fraction. Positive even values are reached via
the functional equation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, gcd

import mpmath

from .contfrac import backward_cf, periodic_value
from .errors import DomainError, InvalidFieldError
from .forms import BinaryQuadraticForm, kronecker
from .qirr import QuadIrrational, decompose_discriminant, is_squarefree

ExactRational = Fraction


@lru_cache(maxsize=None)
def bernoulli(i: int) -> Fraction:
    """B_i with B_1 = -1/2."""
    if i < 0:
        raise ValueError("index must be nonnegative")
    if i == 0:
        return Fraction(1)
    if i > 1 and i % 2:
        return Fraction(0)
    # sum_{k=0}^{i} C(i+1, k) B_k = 0
    acc = sum(comb(i + 1, k) * bernoulli(k) for k in range(i))
    return -acc / (i + 1)


@dataclass(frozen=True)
class SurdValue:
    """coeff * sqrt(d) * pi^pi_power, with d squarefree (d = 1 means no root)."""

    coeff: Fraction
    d: int
    pi_power: int

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        if self.d < 1 or not is_squarefree(self.d):
            raise InvalidFieldError(f"d={self.d} must be squarefree")

    def __mul__(self, other):
        if isinstance(other, SurdValue):
            g = gcd(self.d, other.d)
            return SurdValue(
                self.coeff * other.coeff * g, self.d * other.d // (g * g), self.pi_power + other.pi_power
            )
        return SurdValue(self.coeff * Fraction(other), self.d, self.pi_power)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, SurdValue):
            inv = SurdValue(1 / (other.coeff * other.d), other.d, -other.pi_power)
            return self * inv
        return SurdValue(self.coeff / Fraction(other), self.d, self.pi_power)

    def __add__(self, other):
        if self.coeff == 0:
            return other
        if isinstance(other, SurdValue) and other.coeff == 0:
            return self
        if not isinstance(other, SurdValue) or (other.d, other.pi_power) != (self.d, self.pi_power):
            raise DomainError("can only add values with the same sqrt(d) and pi power")
        return SurdValue(self.coeff + other.coeff, self.d, self.pi_power)

    __radd__ = __add__

    def to_mpf(self, prec: int = 128):
        with mpmath.workprec(prec + 16):
            v = mpmath.mpf(self.coeff.numerator) / self.coeff.denominator
            v *= mpmath.sqrt(self.d) * mpmath.pi**self.pi_power
        return v

    def __float__(self):
        return float(self.to_mpf(64))

    def __str__(self):
        c = self.coeff
        root = f"√{self.d}" if self.d > 1 else ""
        pi = "" if self.pi_power == 0 else ("π" if self.pi_power == 1 else f"π^{self.pi_power}")
        n = c.numerator
        lead = str(n) if not (root or pi) or abs(n) != 1 else ("-" if n < 0 else "")
        body = f"{lead}{root}{pi}"
        return body if c.denominator == 1 else f"{body}/{c.denominator}"


def fundamental_discriminant(d: int) -> int:
    return d if d % 4 == 1 else 4 * d


def _check_d(d: int) -> None:
    if d <= 1 or not is_squarefree(d):
        raise InvalidFieldError(f"d={d} must be a squarefree integer > 1")


def _inv_sqrt_D0(d: int) -> SurdValue:
    """1/sqrt(D0) as a SurdValue in sqrt(d)."""
    D0 = fundamental_discriminant(d)
    return SurdValue(Fraction(1, d if D0 == d else 2 * d), d, 0)


def l_value(d: int, s: int) -> SurdValue:
    """L(s, chi_{D0}) for the quadratic character of Q(sqrt(d)), s in {2, 4}.

    d = 1 gives the Riemann zeta value.
    """
    if d == 1:
        return SurdValue(Fraction(1, 6) if s == 2 else Fraction(1, 90), 1, s)
    z = dedekind_special(d, s)
    return z / SurdValue(Fraction(1, 6) if s == 2 else Fraction(1, 90), 1, s)


def dedekind_special(d: int, s: int) -> SurdValue:
    """zeta_{Q(sqrt d)}(s) for s = 2 or 4, from finite character sums."""
    _check_d(d)
    D0 = fundamental_discriminant(d)
    chi = [kronecker(D0, k) for k in range(D0)]
    if s == 2:
        total = sum(chi[k] * k * k for k in range(1, D0))
        return _inv_sqrt_D0(d) * Fraction(total, 6 * D0 * D0) * SurdValue(1, 1, 4)
    if s == 4:
        total = sum(chi[k] * (2 * Fraction(k * k) - Fraction(k**4, D0 * D0)) for k in range(1, D0))
        return _inv_sqrt_D0(d) * (total / (270 * D0 * D0)) * SurdValue(1, 1, 8)
    raise DomainError("only s = 2 and s = 4 are supported")


# ---------------------------------------------------------------- module cycles


@dataclass(frozen=True)
class CycleEntry:
    w: QuadIrrational
    form: BinaryQuadraticForm
    digit: int


@dataclass(frozen=True)
class ModuleCycle:
    alpha: QuadIrrational
    f: int
    D: int
    i0: int
    entries: tuple[CycleEntry, ...]

    @property
    def r(self) -> int:
        return len(self.entries)


def _positive_basis(alpha: QuadIrrational) -> QuadIrrational:
    # the pair (xi, 1) is positively oriented iff xi > conj(xi); conjugate modules share zeta values
    return alpha if alpha.q > 0 else alpha.conjugate()


def module_cycle(alpha: QuadIrrational) -> ModuleCycle:
    xi = _positive_basis(alpha)
    cf = backward_cf(xi)
    period = cf.period
    entries = []
    w = periodic_value(period, xi.d)
    for b in period:
        A, B, C = w.minpoly
        entries.append(CycleEntry(w, BinaryQuadraticForm(C, -B, A), b))
        # w_{j+1} = 1/(b_j - w_j) is the next rotation of the period
        w = QuadIrrational.from_number((b - w.value).inverse())
    D = xi.D
    return ModuleCycle(alpha, decompose_discriminant(D).f, D, cf.i0, tuple(entries))


def form_power_coeffs(Q: BinaryQuadraticForm, k: int) -> list[int]:
    """Coefficients e_i of x^i y^{2k-i} in Q(x, y)^k, i = 0..2k."""
    poly = [1]
    base = [Q.c, Q.b, Q.a]  # by power of x
    for _ in range(k):
        out = [0] * (len(poly) + 2)
        for i, p in enumerate(poly):
            for j, q in enumerate(base):
                out[i + j] += p * q
        poly = out
    return poly


def zeta_terms(cycle: ModuleCycle, k: int) -> list[Fraction]:
    """Per-entry contributions to zeta(A, -k); they sum to the full value."""
    if k < 1:
        raise DomainError("k must be a positive integer")
    n = 2 * k
    Btop = bernoulli(n + 2) / (n + 2)
    terms = []
    for e in cycle.entries:
        coeffs = form_power_coeffs(e.form, k)
        b = e.digit
        t = Fraction(0)
        for i in range(n + 1):
            d_ik = coeffs[i] * (-1) ** i
            if d_ik == 0:
                continue
            t += d_ik * (
                Btop * Fraction(b ** (n - i + 1), n - i + 1)
                - bernoulli(i + 1) / (i + 1) * bernoulli(n - i + 1) / (n - i + 1)
            )
        terms.append(t)
    return terms


def zeta_module_neg(cycle: ModuleCycle, k: int) -> Fraction:
    """zeta(A, -k) exactly, summed in index order."""
    return sum(zeta_terms(cycle, k), Fraction(0))


def zeta_pair_pos(cycle: ModuleCycle, k: int) -> SurdValue:
    """zeta(A, k) + zeta(wA, k) for even k, via the functional equation."""
    if k not in (2, 4):
        raise DomainError("only k = 2 and k = 4 are supported")
    dec = decompose_discriminant(cycle.D)
    z = zeta_module_neg(cycle, k - 1)
    # D^(k - 1/2) = D^(k-1) * s * sqrt(d)
    coeff = Fraction(2 ** (2 * k - 1), cycle.D ** (k - 1) * factorial(k - 1) ** 2) * z
    return SurdValue(coeff / (dec.s * dec.d), dec.d, 2 * k)


def chi_sums_vanish(D0: int) -> bool:
    chi = [kronecker(D0, k) for k in range(1, D0)]
    return sum(chi) == 0 and sum(c * k for k, c in enumerate(chi, 1)) == 0



