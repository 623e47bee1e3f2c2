import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadwalk.diophantine import (
    approximation_floor,
    beck_digits,
    beck_sequence,
    dist_exact,
    dsum,
    dsum_slope,
    nearest_int,
)
from quadwalk.errors import OverflowGuardError, PreconditionError
from quadwalk.qirr import QuadIrrational

PHI = QuadIrrational(1, 1, 2, 5)
SQRT2 = QuadIrrational(0, 1, 1, 2)
ALPHA69 = QuadIrrational(19, 3, 26, 69)


def mp_terms(alpha, theta, M):
    with mpmath.workprec(200):
        a = alpha.to_mpf(260)
        out = []
        for m in range(1, M + 1):
            x = m * a
            dist = abs(x - mpmath.nint(x))
            out.append((m * dist) ** (-theta))
        return out


quad = st.tuples(st.integers(-30, 30), st.integers(-6, 6).filter(bool), st.integers(1, 20), st.sampled_from([2, 3, 5, 7, 69]))


@settings(max_examples=60, deadline=None)
@given(quad, st.integers(1, 10**9))
def test_nearest_int_matches_high_precision(args, m):
    a = QuadIrrational(*args)
    with mpmath.workprec(300):
        ref = int(mpmath.nint(m * a.to_mpf(320)))
    assert nearest_int(a, m) == ref
    d = dist_exact(a, m)
    assert 0 <= float(d) <= 0.5


@pytest.mark.parametrize("alpha", [PHI, SQRT2, ALPHA69])
@pytest.mark.parametrize("theta", [2.0, 4.0, 2.5])
def test_dsum_matches_high_precision(alpha, theta):
    ref = mp_terms(alpha, theta, 3000)
    rep = dsum(alpha, theta, 3000, checkpoints=[10, 100, 1000])
    with mpmath.workprec(200):
        for M, s in rep.checkpoints:
            exact = mpmath.fsum(ref[:M])
            # each term carries a few ulp in ||m alpha||, amplified by theta
            assert abs(s - exact) <= (theta + 2) * 2.0**-52 * exact


def test_dsum_independent_of_chunking():
    a = dsum(PHI, 2.0, 50_000, checkpoints=[1000, 33_333], chunk=4096)
    b = dsum(PHI, 2.0, 50_000, checkpoints=[1000, 33_333], chunk=50_000)
    assert a.checkpoints == b.checkpoints


def test_dsum_workers_bit_identical():
    a = dsum(SQRT2, 2.0, 40_000, chunk=8192, workers=1)
    b = dsum(SQRT2, 2.0, 40_000, chunk=8192, workers=2)
    assert a.sum == b.sum


def test_dsum_preconditions():
    with pytest.raises(PreconditionError):
        dsum(PHI, 2.0, 0)
    with pytest.raises(PreconditionError):
        dsum(PHI, 0.0, 10)
    with pytest.raises(PreconditionError):
        dsum_slope(PHI, 2.0, 100, 10)


@pytest.mark.parametrize("alpha", [PHI, SQRT2, ALPHA69])
def test_approximation_floor(alpha):
    c = approximation_floor(alpha)
    a = alpha.to_mpf(200)
    with mpmath.workprec(200):
        worst = min(m * abs(m * a - mpmath.nint(m * a)) for m in range(1, 5000))
    assert worst >= c


def test_slope_is_in_the_right_range():
    # the O(1) remainder is large at small M, so this is only a coarse check
    s = dsum_slope(PHI, 2.0, 1000, 100_000)
    assert 0.8 < s / (4 * math.pi**4 * 0.030978290793565153) < 1.2


def test_beck_digits_blocks():
    assert beck_digits(10, 2, 16) == [1, 1, 10, 10, 1, 1, 1, 1, 10, 10, 10, 10, 10, 10, 10, 10]


def test_beck_sequence_structure():
    rep = beck_sequence(10, 2, 1)
    assert [c.index for c in rep.checkpoints] == [2, 4, 8, 16]
    assert [c.block for c in rep.checkpoints] == ["odd", "even", "odd", "even"]
    q = rep.q
    assert all(c.M == q[c.index] - 1 for c in rep.checkpoints)
    direct = [c for c in rep.checkpoints if c.method == "direct"]
    assert direct and all(c.error_bound_theta2 == 0 for c in direct)


def test_beck_direct_checkpoint_against_high_precision():
    rep = beck_sequence(10, 2, 1)
    c = rep.checkpoints[1]
    # alpha is pinned to far more digits than M^2 by a late convergent
    n = len(rep.q) - 1
    p_prev, p = 1, 0
    for dj in rep.digits[:n]:
        p, p_prev = dj * p + p_prev, p
    with mpmath.workprec(400):
        a = mpmath.mpf(p) / rep.q[n]
        s = mpmath.fsum((m * abs(m * a - mpmath.nint(m * a))) ** -2 for m in range(1, c.M + 1))
    assert c.ratio_theta2 == pytest.approx(float(s) / c.log_M, rel=1e-12)


def test_beck_bit_budget():
    with pytest.raises(OverflowGuardError):
        beck_sequence(10, 2, 3, bit_budget=64)
