"""Indefinite binary quadratic forms.

Reduction follows the usual convention for indefinite forms: (a, b, c) is
reduced when |sqrt(D) - 2|a|| < b < sqrt(D). The rho step moves a form to
its right neighbour, and reduced forms fall into finite cycles; classes are
cycles.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd, isqrt

import mpmath

from .errors import DomainError, InvalidMatrixError
from .qirr import (
    QuadIrrational,
    QuadNumber,
    decompose_discriminant,
    factorize,
    is_square,
    surd_sign,
    validate_discriminant,
)

_KRON2 = (0, 1, 0, -1, 0, -1, 0, 1)


def kronecker(a: int, b: int) -> int:
    """Kronecker symbol (a/b), including the (a/2) and (a/-1) extensions."""
    if b == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and b % 2 == 0:
        return 0
    v = 0
    while b % 2 == 0:
        v += 1
        b //= 2
    k = 1 if v % 2 == 0 else _KRON2[a & 7]
    if b < 0:
        b = -b
        if a < 0:
            k = -k
    while True:
        if a == 0:
            return k if b == 1 else 0
        v = 0
        while a % 2 == 0:
            v += 1
            a //= 2
        if v % 2:
            k *= _KRON2[b & 7]
        if a & b & 2:
            k = -k
        r = abs(a)
        a = b % r
        b = r


@dataclass(frozen=True)
class BinaryQuadraticForm:
    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self) -> int:
        return gcd(gcd(self.a, self.b), self.c)

    @property
    def is_primitive(self) -> bool:
        return self.content == 1

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __neg__(self) -> BinaryQuadraticForm:
        return BinaryQuadraticForm(-self.a, -self.b, -self.c)

    def transform(self, B) -> BinaryQuadraticForm:
        return transform(self, B)

    def is_reduced(self) -> bool:
        D = self.discriminant
        a, b = abs(self.a), self.b
        if b <= 0 or b * b >= D:
            return False
        # |sqrt(D) - 2|a|| < b  <=>  2|a| - b < sqrt(D) < 2|a| + b
        return surd_sign(-(2 * a - b), 1, D) > 0 and surd_sign(2 * a + b, -1, D) > 0

    def __str__(self):
        terms = []
        for coef, mono in ((self.a, "x²"), (self.b, "xy"), (self.c, "y²")):
            if coef == 0:
                continue
            mag = "" if abs(coef) == 1 else str(abs(coef))
            sign = "-" if coef < 0 else ("+" if terms else "")
            terms.append(f"{sign}{mag}{mono}")
        return "".join(terms) or "0"


def form_of(alpha: QuadIrrational) -> BinaryQuadraticForm:
    return BinaryQuadraticForm(alpha.a, alpha.b, alpha.c)


def transform(Q: BinaryQuadraticForm, B) -> BinaryQuadraticForm:
    """(Q o B)(x, y) = Q(r x + s y, t x + u y) for B = ((r, s), (t, u)) with det 1."""
    (r, s), (t, u) = B
    if r * u - s * t != 1:
        raise InvalidMatrixError("matrix must have determinant 1")
    a, b, c = Q.a, Q.b, Q.c
    return BinaryQuadraticForm(
        a * r * r + b * r * t + c * t * t,
        2 * a * r * s + b * (r * u + s * t) + 2 * c * t * u,
        a * s * s + b * s * u + c * u * u,
    )


def automorphism(Q: BinaryQuadraticForm, t: int, u: int):
    """The Aut(Q) matrix attached to a solution of t^2 - D u^2 = 4."""
    a, b, c = Q.a, Q.b, Q.c
    return (((t - b * u) // 2, -c * u), (a * u, (t + b * u) // 2))


# ---------------------------------------------------------------- Pell


@dataclass(frozen=True)
class FundamentalUnit:
    """Smallest totally positive unit (t0 + u0 sqrt(D))/2 of the order of discriminant D."""

    D: int
    t0: int
    u0: int

    @cached_property
    def _decomp(self):
        return decompose_discriminant(self.D)

    @property
    def d(self) -> int:
        return self._decomp.d

    @property
    def eps(self) -> QuadNumber:
        s = self._decomp.s
        return QuadNumber(Fraction(self.t0, 2), Fraction(self.u0 * s, 2), self.d)

    @property
    def log_eps(self):
        with mpmath.workprec(128):
            v = mpmath.log((self.t0 + self.u0 * mpmath.sqrt(self.D)) / 2)
        return v

    def power(self, j: int) -> tuple[int, int]:
        """(t_j, u_j) with eps^j = (t_j + u_j sqrt(D))/2."""
        t, u = 2, 0
        for _ in range(j):
            t, u = (t * self.t0 + self.D * u * self.u0) // 2, (t * self.u0 + u * self.t0) // 2
        return t, u


def _principal_root_digits(D: int):
    """Partial quotients of (sqrt(D) - sigma)/2, sigma = D mod 2, generated lazily."""
    sigma = D % 2
    P, Q, N = -sigma, 2, D
    s = isqrt(N)
    while True:
        a = (P + s) // Q
        yield a
        P = a * Q - P
        Q = (N - P * P) // Q


def unit_of_order(D: int) -> tuple[int, int, int]:
    """Fundamental unit (t + u sqrt(D))/2 of the order of discriminant D and its norm.

    Units x + y*omega with omega = (sigma + sqrt(D))/2 have x/y close to
    (sqrt(D) - sigma)/2, so the smallest one is the first convergent of that
    number with norm +-1.
    """
    validate_discriminant(D)
    sigma = D % 2
    p_prev, q_prev = 1, 0
    digits = _principal_root_digits(D)
    a0 = next(digits)
    p, q = a0, 1
    while True:
        if q > 0:
            n = p * p + sigma * p * q + (sigma - D) // 4 * q * q
            if n in (1, -1):
                return 2 * p + sigma * q, q, n
        a = next(digits)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q


@lru_cache(maxsize=None)
def pell_smallest(D: int) -> FundamentalUnit:
    t, u, n = unit_of_order(D)
    if n == -1:
        t, u = (t * t + D * u * u) // 2, t * u
    return FundamentalUnit(D, t, u)


def unit_power_display(D: int) -> tuple[int, int, int, str]:
    """eps of discriminant D as eta^k, eta the fundamental unit of the maximal order.

    Returns (eta_t, eta_u, k, display) where eta = (eta_t + eta_u sqrt(D0))/2.
    """
    dec = decompose_discriminant(D)
    eps = pell_smallest(D).eps
    t, u, _ = unit_of_order(dec.D0)
    s0 = 1 if dec.D0 == dec.d else 2
    eta = QuadNumber(Fraction(t, 2), Fraction(u * s0, 2), dec.d)
    k, acc = 1, eta
    while acc != eps:
        acc = acc * eta
        k += 1
        if k > 10_000:
            raise RuntimeError("unit power search did not terminate")
    text = str(eta)
    if k > 1:
        text = (f"({text})" if not text.startswith("(") or "/" in text else text) + f"^{k}"
    return t, u, k, text


# ---------------------------------------------------------------- reduction


def _rho_b(b: int, c: int, D: int) -> int:
    m = 2 * abs(c)
    s = isqrt(D)
    base = (-b) % m
    if abs(c) * abs(c) < D:
        # largest value below sqrt(D) congruent to -b mod 2|c|
        return base + m * ((s - base) // m)
    t = base
    if t > abs(c):
        t -= m
    return t


def rho(Q: BinaryQuadraticForm) -> BinaryQuadraticForm:
    D = Q.discriminant
    c = Q.c
    b2 = _rho_b(Q.b, c, D)
    return BinaryQuadraticForm(c, b2, (b2 * b2 - D) // (4 * c))


def reduce_form(Q: BinaryQuadraticForm) -> BinaryQuadraticForm:
    D = Q.discriminant
    if D <= 0 or is_square(D):
        raise DomainError("only indefinite forms with nonsquare discriminant are supported")
    steps = 0
    while not Q.is_reduced():
        Q = rho(Q)
        steps += 1
        if steps > 100_000:
            raise RuntimeError("reduction did not terminate")
    return Q


def cycle(Q: BinaryQuadraticForm) -> list[BinaryQuadraticForm]:
    """The rho-cycle of a reduced form."""
    Q = reduce_form(Q)
    out = [Q]
    R = rho(Q)
    while R != Q:
        out.append(R)
        R = rho(R)
    return out


def equivalent(Q1: BinaryQuadraticForm, Q2: BinaryQuadraticForm) -> bool:
    if Q1.discriminant != Q2.discriminant:
        raise DomainError("forms have different discriminants")
    return reduce_form(Q2) in set(cycle(Q1))


def reduced_forms(D: int) -> list[BinaryQuadraticForm]:
    """All primitive reduced forms of discriminant D."""
    validate_discriminant(D)
    out = []
    b = D % 2 or 2
    while b * b < D:
        ac = (b * b - D) // 4  # negative
        for a in _divisors(-ac):
            # sqrt(D) - b < 2a < sqrt(D) + b
            if surd_sign(2 * a + b, -1, D) <= 0:
                continue
            if surd_sign(-(2 * a - b), 1, D) <= 0:
                continue
            for sa in (a, -a):
                F = BinaryQuadraticForm(sa, b, ac // sa)
                if F.is_primitive:
                    out.append(F)
        b += 2
    return out


def _divisors(n: int) -> list[int]:
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i * i != n:
                out.append(n // i)
        i += 1
    return sorted(out)


@dataclass(frozen=True)
class ClassData:
    D: int
    h: int
    representatives: tuple[BinaryQuadraticForm, ...]
    cycles: tuple[tuple[BinaryQuadraticForm, ...], ...]

    def class_index(self, Q: BinaryQuadraticForm) -> int:
        R = reduce_form(Q)
        for i, cyc in enumerate(self.cycles):
            if R in cyc:
                return i
        raise DomainError(f"{Q} is not a primitive form of discriminant {self.D}")


@lru_cache(maxsize=None)
def class_number(D: int) -> ClassData:
    remaining = reduced_forms(D)
    left = set(remaining)
    reps, cycles = [], []
    for F in remaining:
        if F not in left:
            continue
        cyc = cycle(F)
        left.difference_update(cyc)
        reps.append(F)
        cycles.append(tuple(cyc))
    return ClassData(D, len(reps), tuple(reps), tuple(cycles))


# ---------------------------------------------------------------- representations


def _window_ok(Q: BinaryQuadraticForm, x: int, y: int, n: int, eps_t: int, eps_u: int) -> bool:
    a, b = Q.a, Q.b
    D = Q.discriminant
    u = 2 * a * x + b * y
    # xi = u + y sqrt(D), conj(xi) = u - y sqrt(D)
    if surd_sign(u, -y, D) <= 0:
        return False
    if u * y < 0:  # |xi| < |conj(xi)|
        return False
    # xi^2 < eps^2 * 4|a n| where eps^2 = ((t0^2 + D u0^2) + 2 t0 u0 sqrt(D))/4
    A = u * u + D * y * y
    B = 2 * u * y
    e2a, e2b = (eps_t * eps_t + D * eps_u * eps_u) // 2, eps_t * eps_u  # 2 eps^2 = e2a + e2b sqrt(D)
    k = 2 * abs(a * n)
    # 2 eps^2 * 4|an| / 2 - xi^2 > 0  <=>  (e2a k - A) + (e2b k - B) sqrt(D) > 0
    return surd_sign(e2a * k - A, e2b * k - B, D) > 0


def _y_bound(Q: BinaryQuadraticForm, n_abs: int, unit: FundamentalUnit) -> int:
    eps = (unit.t0 + unit.u0 * unit.D**0.5) / 2
    return int((eps + 1) * (4 * abs(Q.a) * n_abs) ** 0.5 / (2 * Q.discriminant**0.5)) + 2


def primary_reps(Q: BinaryQuadraticForm, n: int) -> tuple[int, list[tuple[int, int]]]:
    """Primary representations of n by Q: one solution of Q(x, y) = n per Aut(Q)-orbit."""
    if n == 0:
        raise DomainError("n must be nonzero")
    D = Q.discriminant
    validate_discriminant(D)
    unit = pell_smallest(D)
    a, b = Q.a, Q.b
    Y = _y_bound(Q, abs(n), unit)
    sols = []
    for y in range(-Y, Y + 1):
        disc = D * y * y + 4 * a * n
        if disc < 0:
            continue
        s = isqrt(disc)
        if s * s != disc:
            continue
        for root in {s, -s}:
            num = -b * y + root
            if num % (2 * a):
                continue
            x = num // (2 * a)
            if _window_ok(Q, x, y, n, unit.t0, unit.u0):
                sols.append((x, y))
    sols.sort()
    return len(sols), sols


def primary_points_upto(Q: BinaryQuadraticForm, N: int):
    """Yield (x, y, Q(x, y)) for every primary representation with 0 < |Q(x, y)| <= N.

    Sweeps the fundamental sector directly instead of solving one n at a time.
    """
    D = Q.discriminant
    unit = pell_smallest(D)
    a, b = Q.a, Q.b
    sqD = D**0.5
    Y = _y_bound(Q, N, unit)
    rad = (4 * abs(a) * N) ** 0.5
    for y in range(-Y, Y + 1):
        # 0 < conj(xi) = 2a x + (b - sqrt(D)) y <= sqrt(4|a|N)
        lo = (-(b - sqD) * y) / (2 * a)
        hi = (rad - (b - sqD) * y) / (2 * a)
        if lo > hi:
            lo, hi = hi, lo
        for x in range(int(lo) - 2, int(hi) + 3):
            v = Q(x, y)
            if v == 0 or abs(v) > N:
                continue
            if _window_ok(Q, x, y, v, unit.t0, unit.u0):
                yield x, y, v


def class_rep_sum(D: int, n: int) -> int:
    """Total number of primary representations of n > 0 over a full set of class representatives."""
    if n < 1:
        raise DomainError("n must be positive")
    dec = decompose_discriminant(D)
    g = gcd(n, dec.f * dec.f)
    m = isqrt(g)
    if m * m != g:
        return 0
    Dm = D // (m * m)
    factor = Fraction(m)
    for p in factorize(m):
        factor *= 1 - Fraction(kronecker(Dm, p), p)
    D0 = D // (dec.f * dec.f)
    total = sum(kronecker(D0, k) for k in _divisors(n // (m * m)))
    value = factor * total
    assert value.denominator == 1
    return int(value)
