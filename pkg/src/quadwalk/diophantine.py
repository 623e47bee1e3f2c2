"""Diophantine sums  S(M) = sum_{m<=M} 1/(m^theta ||m alpha||^theta)."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .contfrac import regular_cf
from .errors import OverflowGuardError, PreconditionError
from .qirr import QuadIrrational, QuadNumber


def nearest_int(alpha: QuadIrrational, m: int) -> int:
    """The integer nearest to m*alpha, exactly."""
    # floor(m alpha + 1/2) = floor((2 m p + r + 2 m q sqrt(d)) / (2 r))
    return QuadNumber(Fraction(2 * m * alpha.p + alpha.r, 2 * alpha.r), Fraction(m * alpha.q, alpha.r), alpha.d).floor()


def dist_exact(alpha: QuadIrrational, m: int) -> QuadNumber:
    """||m alpha|| as an exact element of Q(sqrt d)."""
    x = alpha.value * m - nearest_int(alpha, m)
    return x if x.sign() >= 0 else -x


def _terms(p: int, q: int, r: int, d: int, theta: float, lo: int, hi: int) -> np.ndarray:
    out = np.empty(hi - lo, dtype=np.float64)
    sd = math.sqrt(d)
    K = 4 * q * q * d
    two_r = 2 * r
    qpos = q > 0
    for i, m in enumerate(range(lo, hi)):
        s = math.isqrt(m * m * K)
        if qpos:
            ell = (2 * m * p + r + s) // two_r
        else:
            ell = (2 * m * p + r - s - 1) // two_r
        A = m * p - ell * r
        B = m * q
        # |A + B sqrt d| = |A^2 - B^2 d| / |A - B sqrt d| with no cancellation below
        num = abs(A * A - B * B * d)
        den = abs(A - B * sd)
        dist = num / (r * den)
        out[i] = (m * dist) ** (-theta)
    return out


def _terms_rational(P: int, Q: int, theta: float, lo: int, hi: int) -> np.ndarray:
    out = np.empty(hi - lo, dtype=np.float64)
    for i, m in enumerate(range(lo, hi)):
        t = (m * P) % Q
        dist = min(t, Q - t) / Q
        out[i] = (m * dist) ** (-theta)
    return out


def _chunks(M: int, size: int):
    lo = 1
    while lo <= M:
        hi = min(M + 1, lo + size)
        yield lo, hi
        lo = hi


@dataclass
class DSumReport:
    alpha: QuadIrrational | None
    theta: float
    M: int
    sum: float
    checkpoints: list[tuple[int, float]] = field(default_factory=list)

    @property
    def slopes(self) -> list[tuple[int, int, float]]:
        """Two-point slopes between consecutive checkpoints."""
        out = []
        for (m1, s1), (m2, s2) in zip(self.checkpoints, self.checkpoints[1:]):
            if m1 > 1:
                out.append((m1, m2, (s2 - s1) / (math.log(m2) - math.log(m1))))
        return out

    def ratios(self) -> list[tuple[int, float, float]]:
        return [(m, s, s / math.log(m) if m > 1 else math.inf) for m, s in self.checkpoints]


def _term_array(alpha: QuadIrrational, theta: float, M: int, workers: int, chunk: int) -> np.ndarray:
    args = [(alpha.p, alpha.q, alpha.r, alpha.d, theta, lo, hi) for lo, hi in _chunks(M, chunk)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_terms, *zip(*args)))
    else:
        parts = [_terms(*a) for a in args]
    return np.concatenate(parts) if parts else np.empty(0)


def _report(alpha, theta, M, terms: np.ndarray, checkpoints) -> DSumReport:
    cps = sorted({int(c) for c in (checkpoints or ()) if 1 <= c <= M} | {M})
    out = []
    for c in cps:
        # fsum is correctly rounded, so the result does not depend on chunking
        out.append((c, math.fsum(terms[:c])))
    return DSumReport(alpha, theta, M, out[-1][1], out)


def dsum(
    alpha: QuadIrrational, theta: float, M: int, checkpoints=None, workers: int = 1, chunk: int = 1 << 16
) -> DSumReport:
    if M < 1:
        raise PreconditionError("M must be >= 1")
    if theta <= 0:
        raise PreconditionError("theta must be positive")
    terms = _term_array(alpha, theta, M, workers, chunk)
    return _report(alpha, theta, M, terms, checkpoints)


def dsum_slope(alpha: QuadIrrational, theta: float, M1: int, M2: int, workers: int = 1) -> float:
    if not 1 <= M1 < M2:
        raise PreconditionError("need 1 <= M1 < M2")
    rep = dsum(alpha, theta, M2, checkpoints=[M1], workers=workers)
    (_, s1), (_, s2) = rep.checkpoints
    return (s2 - s1) / (math.log(M2) - math.log(M1))


def approximation_floor(alpha: QuadIrrational) -> float:
    """A lower bound for m ||m alpha|| from the largest partial quotient: 1/(max a + 2)."""
    cf = regular_cf(alpha)
    return 1 / (max(cf.preperiod + cf.period) + 2)


# ---------------------------------------------------------------- non-convergence construction


def beck_digits(a: int, rho: int, count: int) -> list[int]:
    """a_1 .. a_count: 1 on (rho^(2k), rho^(2k+1)], a on (rho^(2k+1), rho^(2k+2)]."""
    out = []
    for j in range(1, count + 1):
        if j == 1:
            out.append(1)
            continue
        e = 0
        while rho ** (e + 1) < j:
            e += 1
        # rho^e < j <= rho^(e+1)
        out.append(1 if e % 2 == 0 else a)
    return out


@dataclass(frozen=True)
class BeckCheckpoint:
    index: int  # k in q_k
    block: str  # "odd" (end of a block of 1s) or "even" (end of a block of a's)
    M: int
    log_M: float
    ratio_theta2: float
    ratio_theta4: float
    method: str  # "direct" or "main-term"
    error_bound_theta2: float  # bound on the error of the ratio (0 when direct)
    error_bound_theta4: float


@dataclass
class BeckReport:
    a: int
    rho: int
    k_max: int
    digits: list[int]
    q: list[int]
    checkpoints: list[BeckCheckpoint]

    def separation(self, theta: int = 2) -> float:
        """min over even checkpoints / max over odd checkpoints of dsum/log M.

        Checkpoints with M = 1 have no defined ratio and are skipped.
        """
        key = "ratio_theta2" if theta == 2 else "ratio_theta4"
        odd = [getattr(c, key) for c in self.checkpoints if c.block == "odd" and c.M > 1]
        even = [getattr(c, key) for c in self.checkpoints if c.block == "even" and c.M > 1]
        return min(even) / max(odd)


def beck_sequence(
    a: int, rho: int, k_max: int, direct_limit: int = 1_000_000, bit_budget: int = 1 << 16
) -> BeckReport:
    """Checkpoints of S(M)/log M at M = q_{rho^j} - 1, j = 1 .. 2 k_max + 2.

    Sums with M <= direct_limit are evaluated term by term against a
    convergent accurate far beyond M^2. Larger ones are reported through
    the main term zeta(2 theta) * sum a_j^theta, which is what the sum equals
    up to O(sum a_j^(theta-1)); that error bound is reported alongside.
    """
    if a < 2 or rho < 2 or k_max < 0:
        raise PreconditionError("need a >= 2, rho >= 2, k_max >= 0")
    top = rho ** (2 * k_max + 2)
    digits = beck_digits(a, rho, top + 64)
    q = [1]
    q_prev, qk = 0, 1
    p_prev, pk = 1, 0
    P_all = [0]
    for dj in digits:
        qk, q_prev = dj * qk + q_prev, qk
        pk, p_prev = dj * pk + p_prev, pk
        q.append(qk)
        P_all.append(pk)
        if qk.bit_length() > bit_budget:
            raise OverflowGuardError(f"q_k exceeds the {bit_budget}-bit budget")
    z4, z8 = float(mpmath.zeta(4)), float(mpmath.zeta(8))
    cps = []
    for j in range(1, 2 * k_max + 3):
        idx = rho**j
        M = q[idx] - 1
        logM = math.log(M) if M > 1 else 0.0
        s2 = sum(x * x for x in digits[:idx])
        s4 = sum(x**4 for x in digits[:idx])
        e2 = 6**2 * 4 * 4 / 1 * sum(digits[:idx])
        e4 = 6**4 * 4 * 16 / 9 * sum(x**3 for x in digits[:idx])
        if M <= direct_limit:
            # a convergent with q_n > M * 2^64 pins every ||m alpha|| for m <= M
            n = idx
            while q[n] < (M + 1) << 64:
                n += 1
            P, Q = P_all[n], q[n]
            t2 = math.fsum(_terms_rational(P, Q, 2.0, 1, M + 1)) if M >= 1 else 0.0
            t4 = math.fsum(_terms_rational(P, Q, 4.0, 1, M + 1)) if M >= 1 else 0.0
            method = "direct"
            eb2 = eb4 = 0.0
        else:
            t2, t4 = z4 * s2, z8 * s4
            method = "main-term"
            eb2, eb4 = e2 / logM, e4 / logM
        r2 = t2 / logM if logM > 0 else math.inf
        r4 = t4 / logM if logM > 0 else math.inf
        block = "odd" if j % 2 == 1 else "even"
        cps.append(BeckCheckpoint(idx, block, M, logM, r2, r4, method, eb2, eb4))
    return BeckReport(a, rho, k_max, digits[:top], q[: top + 1], cps)
