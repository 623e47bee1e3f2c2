"""Exact arithmetic in real quadratic fields.

Everything here is integer or Fraction arithmetic. Irrational square roots
only enter through `math.isqrt` bracketing, so floors and comparisons are
never off by one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import mpmath

from .errors import InvalidDiscriminantError, InvalidFieldError, RationalInputError


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def _icbrt(n: int) -> int:
    x = int(round(n ** (1 / 3))) if n < 2**1000 else 1 << (n.bit_length() // 3 + 1)
    while x**3 > n:
        x -= 1
    while (x + 1) ** 3 <= n:
        x += 1
    return x


def is_squarefree(n: int) -> bool:
    """Trial division up to the cube root, then a perfect-square test on the cofactor."""
    if n < 1:
        return False
    limit = _icbrt(n)
    p = 2
    while p <= limit:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return False
        p += 1 if p == 2 else 2
    # the cofactor has at most two prime factors, all above the cube root
    return n == 1 or not is_square(n)


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| by trial division."""
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def surd_sign(A: int, B: int, n: int) -> int:
    """Sign of A + B*sqrt(n) for integers A, B and n >= 0."""
    if B == 0 or n == 0:
        return (A > 0) - (A < 0)
    if A >= 0 and B > 0:
        return 1
    if A <= 0 and B < 0:
        return -1
    diff = A * A - B * B * n
    if A > 0:  # B < 0
        return (diff > 0) - (diff < 0)
    return (diff < 0) - (diff > 0)


def floor_surd(P: int, Q: int, n: int, R: int) -> int:
    """floor((P + Q*sqrt(n)) / R) for integers, R != 0."""
    if R < 0:
        P, Q, R = -P, -Q, -R
    m = Q * Q * n
    s = isqrt(m)
    if s * s == m:
        return (P + (s if Q >= 0 else -s)) // R
    # Q*sqrt(n) lies strictly between two consecutive integers
    lo = s if Q > 0 else -s - 1
    return (P + lo) // R


@dataclass(frozen=True)
class QuadNumber:
    """a + b*sqrt(d) with rational a, b and squarefree d > 1."""

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def _coerce(self, other) -> QuadNumber:
        if isinstance(other, QuadNumber):
            if other.d != self.d:
                raise InvalidFieldError(f"mixed fields Q(sqrt{self.d}) and Q(sqrt{other.d})")
            return other
        if isinstance(other, QuadIrrational):
            return self._coerce(other.value)
        return QuadNumber(Fraction(other), Fraction(0), self.d)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadNumber(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        d = self.d
        return QuadNumber(self.a * o.a + d * self.b * o.b, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def conjugate(self) -> QuadNumber:
        return QuadNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> QuadNumber:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero has no inverse")
        return QuadNumber(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadNumber(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_rational(self) -> bool:
        return self.b == 0

    def _integer_parts(self) -> tuple[int, int, int]:
        """(P, Q, R) with self = (P + Q*sqrt(d))/R and R > 0."""
        R = self.a.denominator * self.b.denominator // gcd(self.a.denominator, self.b.denominator)
        return int(self.a * R), int(self.b * R), R

    def sign(self) -> int:
        P, Q, _ = self._integer_parts()
        return surd_sign(P, Q, self.d)

    def floor(self) -> int:
        P, Q, R = self._integer_parts()
        return floor_surd(P, Q, self.d, R)

    def ceil(self) -> int:
        f = self.floor()
        return f if self.b == 0 and self.a == f else f + 1

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def to_mpf(self, prec: int = 128):
        with mpmath.workprec(prec + 16):
            v = mpmath.mpf(self.a.numerator) / self.a.denominator
            v += mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(self.d)
        return v

    def __float__(self):
        # conjugate trick keeps full relative precision when a and b*sqrt(d) nearly cancel
        P, Q, R = self._integer_parts()
        if P == 0 or Q == 0 or (P > 0) == (Q > 0):
            return (P + Q * self.d**0.5) / R
        return (P * P - Q * Q * self.d) / (R * (P - Q * self.d**0.5))

    def __str__(self):
        return format_surd(self.a, self.b, self.d)


def format_surd(a: Fraction, b: Fraction, d: int) -> str:
    """Render a + b*sqrt(d) as e.g. '(1+√5)/2' or '3+2√2'."""
    a, b = Fraction(a), Fraction(b)
    den = a.denominator * b.denominator // gcd(a.denominator, b.denominator)
    A, B = int(a * den), int(b * den)
    parts = []
    if A:
        parts.append(str(A))
    if B:
        mag = "" if abs(B) == 1 else str(abs(B))
        term = f"{mag}√{d}"
        if parts:
            parts.append(("+" if B > 0 else "-") + term)
        else:
            parts.append(term if B > 0 else "-" + term)
    body = "".join(parts) or "0"
    if den == 1:
        return body
    return f"({body})/{den}" if len(parts) > 1 else f"{body}/{den}"


def floor_exact(x: QuadNumber) -> int:
    return x.floor()


def ceil_exact(x: QuadNumber) -> int:
    return x.ceil()


def compare_exact(x, y) -> str:
    """Three-way comparison returning '<', '=' or '>'."""
    if not isinstance(x, QuadNumber):
        x, y = y, x
        flip = True
    else:
        flip = False
    s = (x - y).sign()
    if flip:
        s = -s
    return "<" if s < 0 else ("=" if s == 0 else ">")


@dataclass(frozen=True)
class DiscriminantDecomposition:
    D: int
    f: int
    d: int
    D0: int

    @property
    def s(self) -> int:
        """Integer s with sqrt(D) = s*sqrt(d)."""
        return self.f if self.D0 == self.d else 2 * self.f


def validate_discriminant(D: int) -> None:
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise InvalidDiscriminantError(f"D={D} is not a positive nonsquare discriminant")


def decompose_discriminant(D: int) -> DiscriminantDecomposition:
    validate_discriminant(D)
    sq = 1
    core = 1
    for p, e in factorize(D).items():
        sq *= p ** (e // 2)
        if e % 2:
            core *= p
    if core % 4 == 1:
        return DiscriminantDecomposition(D, sq, core, core)
    # core is 2 or 3 mod 4, so D0 = 4*core and the square part carries the 4
    return DiscriminantDecomposition(D, sq // 2, core, 4 * core)


def _sign(x: int) -> str:
    return "+" if x > 0 else "-"


@dataclass(frozen=True)
class QuadIrrational:
    """The real number (p + q*sqrt(d))/r, kept in lowest terms with r > 0.

    The minimal polynomial a*x^2 + b*x + c (primitive, a > 0) and its
    discriminant D are attached on construction. `root_sign` records which
    root of that polynomial this is: alpha = (-b + sqrt(D))/(2a) for '+'.
    """

    p: int
    q: int
    r: int
    d: int
    a: int = field(init=False, compare=False, repr=False)
    b: int = field(init=False, compare=False, repr=False)
    c: int = field(init=False, compare=False, repr=False)
    D: int = field(init=False, compare=False, repr=False)
    root_sign: str = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        p, q, r, d = (int(v) for v in (self.p, self.q, self.r, self.d))
        if d <= 1 or not is_squarefree(d):
            raise InvalidFieldError(f"d={d} must be a squarefree integer > 1")
        if q == 0:
            raise RationalInputError("q = 0 gives a rational number")
        if r == 0:
            raise ZeroDivisionError("r = 0")
        if r < 0:
            p, q, r = -p, -q, -r
        g = gcd(gcd(p, q), r)
        p, q, r = p // g, q // g, r // g
        # r^2 x^2 - 2pr x + (p^2 - q^2 d)
        a, b, c = r * r, -2 * p * r, p * p - q * q * d
        g = gcd(gcd(a, b), c)
        a, b, c = a // g, b // g, c // g
        for name, v in (("p", p), ("q", q), ("r", r), ("d", d), ("a", a), ("b", b), ("c", c)):
            object.__setattr__(self, name, v)
        object.__setattr__(self, "D", b * b - 4 * a * c)
        object.__setattr__(self, "root_sign", _sign(q))

    @classmethod
    def from_poly(cls, a: int, b: int, c: int, sign: str) -> QuadIrrational:
        """Root (-b +/- sqrt(b^2-4ac))/(2a) of an irreducible quadratic."""
        D = b * b - 4 * a * c
        if a == 0:
            raise RationalInputError("a = 0: not a quadratic")
        if D < 0:
            raise InvalidFieldError("complex roots are not supported")
        if is_square(D):
            raise RationalInputError(f"discriminant {D} is a square: rational roots")
        if sign not in ("+", "-"):
            raise ValueError("sign must be '+' or '-'")
        sq, core = 1, 1
        for pr, e in factorize(D).items():
            sq *= pr ** (e // 2)
            if e % 2:
                core *= pr
        s = sq if sign == "+" else -sq
        return cls(-b, s, 2 * a, core)

    @property
    def minpoly(self) -> tuple[int, int, int]:
        return self.a, self.b, self.c

    @property
    def value(self) -> QuadNumber:
        return QuadNumber(Fraction(self.p, self.r), Fraction(self.q, self.r), self.d)

    @classmethod
    def from_number(cls, x: QuadNumber) -> QuadIrrational:
        P, Q, R = x._integer_parts()
        return cls(P, Q, R, x.d)

    def conjugate(self) -> QuadIrrational:
        return QuadIrrational(self.p, -self.q, self.r, self.d)

    def __add__(self, n: int) -> QuadIrrational:
        if not isinstance(n, int):
            return NotImplemented
        return QuadIrrational(self.p + n * self.r, self.q, self.r, self.d)

    __radd__ = __add__

    def __sub__(self, n: int) -> QuadIrrational:
        return self + (-n)

    def __neg__(self) -> QuadIrrational:
        return QuadIrrational(-self.p, -self.q, self.r, self.d)

    def scale(self, L: int) -> QuadIrrational:
        return QuadIrrational(L * self.p, L * self.q, self.r, self.d)

    def reciprocal(self) -> QuadIrrational:
        return QuadIrrational.from_number(self.value.inverse())

    def floor(self) -> int:
        return floor_surd(self.p, self.q, self.d, self.r)

    def __lt__(self, other):
        return self.value < _as_number(other, self.d)

    def __gt__(self, other):
        return self.value > _as_number(other, self.d)

    def __float__(self):
        return float(self.value)

    def to_mpf(self, prec: int = 128):
        return self.value.to_mpf(prec)

    def __str__(self):
        return format_surd(Fraction(self.p, self.r), Fraction(self.q, self.r), self.d)


def _as_number(x, d):
    if isinstance(x, QuadIrrational):
        return x.value
    if isinstance(x, QuadNumber):
        return x
    return QuadNumber(Fraction(x), 0, d)


def make_quad_irrational(p: int, q: int, r: int, d: int) -> QuadIrrational:
    return QuadIrrational(p, q, r, d)
