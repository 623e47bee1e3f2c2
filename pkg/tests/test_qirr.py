from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from quadwalk.errors import InvalidDiscriminantError, InvalidFieldError, RationalInputError
from quadwalk.qirr import (
    QuadIrrational,
    QuadNumber,
    compare_exact,
    decompose_discriminant,
    floor_exact,
    is_squarefree,
    make_quad_irrational,
    surd_sign,
)

SQUAREFREE = [2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 29, 30, 69]

ints = st.integers(-60, 60)
nonzero = ints.filter(bool)
positive = st.integers(1, 40)
sqfree = st.sampled_from(SQUAREFREE)


def sym(p, q, r, d):
    return (sympy.Integer(p) + q * sympy.sqrt(d)) / r


def test_golden_ratio_minpoly():
    phi = QuadIrrational(1, 1, 2, 5)
    assert phi.minpoly == (1, -1, -1)
    assert phi.D == 5


def test_worked_alpha_minpoly():
    a = QuadIrrational(19, 3, 26, 69)
    assert a.minpoly == (13, -19, -5)
    assert a.D == 621


def test_lowest_terms_and_sign():
    a = QuadIrrational(-2, -2, -4, 5)
    assert (a.p, a.q, a.r) == (1, 1, 2)


def test_rational_rejected():
    with pytest.raises(RationalInputError):
        QuadIrrational(1, 0, 2, 5)


def test_non_squarefree_rejected():
    with pytest.raises(InvalidFieldError):
        QuadIrrational(0, 1, 1, 12)


def test_from_poly_square_discriminant():
    with pytest.raises(RationalInputError):
        QuadIrrational.from_poly(1, -3, 2, "+")


def test_from_poly_roundtrip():
    a = QuadIrrational.from_poly(13, -19, -5, "+")
    assert a == QuadIrrational(19, 3, 26, 69)
    assert a.root_sign == "+"
    assert QuadIrrational.from_poly(13, -19, -5, "-") == a.conjugate()


@pytest.mark.parametrize(
    "D,f,d,D0",
    [(5, 1, 5, 5), (8, 1, 2, 8), (12, 1, 3, 12), (20, 2, 5, 5), (32, 2, 2, 8), (120, 1, 30, 120), (621, 3, 69, 69)],
)
def test_discriminant_decomposition(D, f, d, D0):
    dec = decompose_discriminant(D)
    assert (dec.f, dec.d, dec.D0) == (f, d, D0)
    assert dec.f**2 * dec.D0 == D


@pytest.mark.parametrize("D", [0, -3, 9, 7, 6])
def test_invalid_discriminants(D):
    with pytest.raises(InvalidDiscriminantError):
        decompose_discriminant(D)


def test_is_squarefree_matches_sympy():
    for n in range(1, 3000):
        expected = all(e == 1 for e in sympy.factorint(n).values())
        assert is_squarefree(n) == expected, n


@settings(max_examples=200, deadline=None)
@given(ints, nonzero, positive, sqfree)
def test_minpoly_matches_sympy(p, q, r, d):
    a = QuadIrrational(p, q, r, d)
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.minimal_polynomial(sym(p, q, r, d), x), x)
    coeffs = [int(c) for c in poly.all_coeffs()]
    if coeffs[0] < 0:
        coeffs = [-c for c in coeffs]
    assert list(a.minpoly) == coeffs
    assert a.D == coeffs[1] ** 2 - 4 * coeffs[0] * coeffs[2]


@settings(max_examples=300, deadline=None)
@given(ints, nonzero, positive, sqfree)
def test_floor_matches_sympy(p, q, r, d):
    a = QuadIrrational(p, q, r, d)
    assert a.floor() == int(sympy.floor(sym(p, q, r, d)))


@settings(max_examples=200, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), sqfree)
def test_surd_sign_matches_high_precision(A, B, n):
    with mpmath.workdps(60):
        v = A + B * mpmath.sqrt(n)
    expected = 0 if v == 0 else (1 if v > 0 else -1)
    assert surd_sign(A, B, n) == expected


def test_floor_near_integer():
    # 2 * 985^2 = 1393^2 + 1, so 985 sqrt(2) exceeds 1393 by about 3.6e-4
    x = QuadNumber(0, 985, 2)
    assert floor_exact(x) == 1393
    assert floor_exact(-x) == -1394
    assert floor_exact(x - 1393) == 0


@settings(max_examples=100, deadline=None)
@given(ints, nonzero, positive, ints, nonzero, positive, sqfree)
def test_field_arithmetic(p1, q1, r1, p2, q2, r2, d):
    x = QuadNumber(Fraction(p1, r1), Fraction(q1, r1), d)
    y = QuadNumber(Fraction(p2, r2), Fraction(q2, r2), d)
    assert (x * y) / y == x
    assert x + y - y == x
    assert (x * y).norm() == x.norm() * y.norm()
    assert x * x.inverse() == QuadNumber(1, 0, d)
    sx, sy = sym(p1, q1, r1, d), sym(p2, q2, r2, d)
    expected = "<" if sx < sy else ("=" if sympy.simplify(sx - sy) == 0 else ">")
    assert compare_exact(x, y) == expected


def test_compare_mixed_fields_rejected():
    with pytest.raises(InvalidFieldError):
        QuadNumber(1, 1, 2) + QuadNumber(1, 1, 3)


def test_display():
    assert str(QuadIrrational(1, 1, 2, 5)) == "(1+√5)/2"
    assert str(QuadIrrational(0, 1, 1, 30)) == "√30"
    assert str(QuadNumber(11, 2, 30)) == "11+2√30"


def test_float_view_is_accurate():
    a = make_quad_irrational(19, 3, 26, 69)
    with mpmath.workdps(40):
        ref = (19 + 3 * mpmath.sqrt(69)) / 26
    assert float(a) == pytest.approx(float(ref), rel=1e-15)


def test_conjugate_and_reciprocal():
    phi = QuadIrrational(1, 1, 2, 5)
    assert phi.reciprocal() == phi - 1
    assert phi.conjugate() == QuadIrrational(1, -1, 2, 5)
    assert (-phi).floor() == -2
