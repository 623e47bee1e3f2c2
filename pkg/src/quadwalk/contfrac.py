"""Regular and backward continued fractions of quadratic irrationals."""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .errors import RationalValueError
from .qirr import QuadIrrational, QuadNumber


@dataclass(frozen=True)
class RegularCF:
    """a0 + 1/(a1 + 1/(a2 + ...)); preperiod and period hold a1, a2, ..."""

    a0: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def digit(self, k: int) -> int:
        if k == 0:
            return self.a0
        k -= 1
        if k < len(self.preperiod):
            return self.preperiod[k]
        return self.period[(k - len(self.preperiod)) % len(self.period)]

    def digits(self):
        k = 0
        while True:
            yield self.digit(k)
            k += 1


@dataclass(frozen=True)
class BackwardCF:
    """b0 - 1/(b1 - 1/(b2 - ...)).

    Digits b_i repeat with period r for i >= i0. When i0 = 0 the expansion
    is purely periodic and b0 is the first period digit; otherwise the
    preperiod holds b_1 .. b_{i0-1}.
    """

    b0: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...]
    i0: int

    @property
    def r(self) -> int:
        return len(self.period)

    def digit(self, k: int) -> int:
        if k >= self.i0:
            return self.period[(k - self.i0) % self.r]
        if k == 0:
            return self.b0
        return self.preperiod[k - 1]


def surd_state(alpha: QuadIrrational) -> tuple[int, int, int]:
    """Write alpha = (P + sqrt(N))/Q with Q | N - P^2."""
    p, q, r = alpha.p, alpha.q, alpha.r
    N = q * q * alpha.d
    if q > 0:
        P, Q = p, r
    else:
        P, Q = -p, -r
    if (N - P * P) % Q:
        P, N, Q = P * abs(Q), N * Q * Q, Q * abs(Q)
    return P, Q, N


def _floor_state(P: int, Q: int, N: int, s: int) -> int:
    # floor((P + sqrt(N))/Q) with s = isqrt(N), N not a square
    if Q > 0:
        return (P + s) // Q
    return -((P + s) // -Q) - 1


def regular_cf(alpha: QuadIrrational) -> RegularCF:
    P, Q, N = surd_state(alpha)
    s = isqrt(N)
    a0 = _floor_state(P, Q, N, s)
    P = a0 * Q - P
    Q = (N - P * P) // Q
    seen: dict[tuple[int, int], int] = {}
    digits: list[int] = []
    while (P, Q) not in seen:
        seen[(P, Q)] = len(digits)
        a = _floor_state(P, Q, N, s)
        digits.append(a)
        P = a * Q - P
        Q = (N - P * P) // Q
    start = seen[(P, Q)]
    return RegularCF(a0, tuple(digits[:start]), tuple(digits[start:]))


def backward_cf(alpha: QuadIrrational) -> BackwardCF:
    P, Q, N = surd_state(alpha)
    s = isqrt(N)
    seen: dict[tuple[int, int], int] = {}
    digits: list[int] = []
    while (P, Q) not in seen:
        seen[(P, Q)] = len(digits)
        b = _floor_state(P, Q, N, s) + 1  # x is irrational, so ceil = floor + 1
        digits.append(b)
        P = b * Q - P
        Q = (P * P - N) // Q
    i0 = seen[(P, Q)]
    period = tuple(digits[i0:])
    pre = tuple(digits[1:i0]) if i0 >= 1 else ()
    return BackwardCF(digits[0], pre, period, i0)


def _period_matrix(period) -> tuple[int, int, int, int]:
    A, B, C, D = 1, 0, 0, 1
    for b in period:
        # x -> b - 1/x is the matrix ((b, -1), (1, 0))
        A, B, C, D = A * b + B, -A, C * b + D, -C
    return A, B, C, D


def _fixed_point(A: int, B: int, C: int, D: int, d: int | None) -> QuadIrrational:
    # fixed point of w = (A w + B)/(C w + D): C w^2 + (D - A) w - B = 0, larger root
    if d is None:
        return QuadIrrational.from_poly(C, D - A, -B, "+")
    disc = (D - A) ** 2 + 4 * B * C
    k2, rem = divmod(disc, d)
    k = isqrt(k2)
    if rem or k * k != k2:
        raise ValueError(f"period does not define an element of Q(sqrt {d})")
    return QuadIrrational(A - D, k, 2 * C, d)


def periodic_value(period, d: int | None = None) -> QuadIrrational:
    """The w > 1 whose backward expansion is the given period repeated forever.

    Passing the field's d avoids factoring the discriminant of the period matrix.
    """
    period = tuple(int(b) for b in period)
    if not period or any(b < 2 for b in period):
        raise ValueError("period digits must all be >= 2")
    if all(b == 2 for b in period):
        raise RationalValueError("an all-2 period encodes the rational number 1")
    return _fixed_point(*_period_matrix(period), d)


def regular_periodic_value(a0: int, preperiod, period, d: int | None = None) -> QuadIrrational:
    """Inverse of regular_cf, used for round-trip checks."""
    A, B, C, D = 1, 0, 0, 1
    for a in period:
        A, B, C, D = A * a + B, A, C * a + D, C
    tail = _fixed_point(A, B, C, D, d)
    x = tail.value
    for a in reversed(tuple(preperiod)):
        x = a + x.inverse()
    x = a0 + x.inverse()
    return QuadIrrational.from_number(x)


def backward_value(cf: BackwardCF, d: int | None = None) -> QuadIrrational:
    x: QuadNumber = periodic_value(cf.period, d).value
    if cf.i0 == 0:
        return QuadIrrational.from_number(x)
    for b in reversed(cf.preperiod):
        x = b - x.inverse()
    x = cf.b0 - x.inverse()
    return QuadIrrational.from_number(x)


def convergents(cf: RegularCF, k: int) -> tuple[int, int]:
    if k < 0:
        raise ValueError("k must be >= 0")
    p_prev, q_prev = 1, 0
    p, q = cf.a0, 1
    for j in range(1, k + 1):
        a = cf.digit(j)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    return p, q


def convergent_denominators(digits, count: int) -> list[int]:
    """q_0 .. q_{count-1} for an iterable of partial quotients a_0, a_1, ..."""
    it = iter(digits)
    next(it)
    out = [1]
    q_prev, q = 0, 1
    for _ in range(count - 1):
        a = next(it)
        q, q_prev = a * q + q_prev, q
        out.append(q)
    return out


def is_reduced(w: QuadIrrational) -> bool:
    """w > 1 > conj(w) > 0."""
    v = w.value
    c = v.conjugate()
    return v > 1 and c < 1 and c > 0


__all__ = [
    "RegularCF",
    "BackwardCF",
    "regular_cf",
    "backward_cf",
    "periodic_value",
    "regular_periodic_value",
    "backward_value",
    "convergents",
    "convergent_denominators",
    "is_reduced",
]
