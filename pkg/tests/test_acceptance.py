"""Acceptance gate: one recorded pass/fail line per criterion, tolerances pinned here."""
import io
import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import record
from quadwalk.cli import dispatch
from quadwalk.constants import (
    StepLaw,
    c1_c2_exact,
    c1_c2_special_paths,
    c_theta_exact,
    c_theta_series,
    thm3_main_terms,
)
from quadwalk.diophantine import beck_sequence, dsum_slope
from quadwalk.forms import class_number, class_rep_sum, pell_smallest, primary_reps
from quadwalk.qirr import QuadIrrational, QuadNumber, is_squarefree
from quadwalk.walk import WalkConfig, summarize, trial_matrix, w2sq_exact, w2sq_fourier
from quadwalk.zeta import SurdValue, dedekind_special, module_cycle, zeta_module_neg, zeta_terms

PHI = QuadIrrational(1, 1, 2, 5)
SQRT2 = QuadIrrational(0, 1, 1, 2)
ALPHA69 = QuadIrrational(19, 3, 26, 69)

# calibration constants
SLOPE_TOL = 0.05
A_E_TOL = 0.15
A_V_TOL = 0.25
THM3_SIGMAS = 3.0
THM3_SLACK = 5.0  # times 1/N
CROSS_PATH_REL = 1e-12
SERIES_TOL = 1e-3
BECK_FACTOR = 2.0
MC_SEED = 7
MC_TRIALS = 10_000
MC_GRID = tuple(2**k for k in range(10, 17))


def sqrt(d):
    return QuadIrrational(0, 1, 1, d)


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_criterion_01_exact_zeta_values():
    def work():
        cyc = module_cycle(ALPHA69)
        return zeta_terms(cyc, 1), zeta_module_neg(cyc, 1), zeta_module_neg(cyc, 3)

    (terms, z1, z3), dt = timed(work)
    want = [Fraction(19, 48), Fraction(31, 144), Fraction(241, 720), Fraction(89, 240), Fraction(7, 20)]
    ok = terms == want and z1 == Fraction(5, 3) and z3 == Fraction(1997, 6) and dt < 1.0
    assert record(1, ok, f"zeta(A,-1)={z1}, zeta(A,-3)={z3}, j-terms {'match' if terms == want else terms} ({dt:.2f} s)")


C1C2_VALUES = [
    (sqrt(2), (Fraction(1, 48), Fraction(11, 17280), 2, "1+√2")),
    (sqrt(3), (Fraction(1, 36), Fraction(23, 19440), 3, "2+√3")),
    (sqrt(5), (Fraction(1, 100), Fraction(43, 54000), 5, "(1+√5)/2")),
    (sqrt(6), (Fraction(1, 24), Fraction(29, 8640), 6, "5+2√6")),
    (sqrt(7), (Fraction(1, 21), Fraction(113, 26460), 7, "8+3√7")),
    (sqrt(10), (Fraction(47, 1200), Fraction(2897, 432000), 10, "3+√10")),
    (sqrt(11), (Fraction(7, 132), Fraction(2153, 261360), 11, "10+3√11")),
    (sqrt(13), (Fraction(1, 52), Fraction(1247, 365040), 13, "(3+√13)/2")),
    (sqrt(14), (Fraction(5, 84), Fraction(2503, 211680), 14, "15+4√14")),
    (PHI, (Fraction(1, 150), Fraction(1, 6750), 5, "(1+√5)/2")),
]


def test_criterion_02_c1_c2_values():
    def work():
        bad = []
        for alpha, (k1, k2, d, eta) in C1C2_VALUES:
            c1, c2 = c1_c2_exact(alpha)
            got = (c1.canonical[0], c2.canonical[0], c1.d, str(c1.eta))
            if got != (k1, k2, d, eta) or c2.d != d or str(c2.eta) != eta:
                bad.append((str(alpha), got))
        return bad

    bad, dt = timed(work)
    ok = not bad and dt < 5.0
    assert record(2, ok, f"{len(C1C2_VALUES) - len(bad)}/{len(C1C2_VALUES)} (c1, c2) entries exact ({dt:.2f} s) {bad or ''}")


def q(a, b, d):
    return QuadNumber(Fraction(a), Fraction(b), d)


EPSILON_VALUES = {
    8: (q(1, 1, 2), 2),
    12: (q(2, 1, 3), 1),
    20: (q(Fraction(1, 2), Fraction(1, 2), 5), 6),
    24: (q(5, 2, 6), 1),
    28: (q(8, 3, 7), 1),
    32: (q(1, 1, 2), 2),
    40: (q(3, 1, 10), 2),
    44: (q(10, 3, 11), 1),
    5: (q(Fraction(1, 2), Fraction(1, 2), 5), 2),
    13: (q(Fraction(3, 2), Fraction(1, 2), 13), 2),
    17: (q(4, 1, 17), 2),
    21: (q(Fraction(5, 2), Fraction(1, 2), 21), 1),
    29: (q(Fraction(5, 2), Fraction(1, 2), 29), 2),
    33: (q(23, 4, 33), 1),
    37: (q(6, 1, 37), 2),
}


def test_criterion_03_pell_units():
    def work():
        bad = []
        for D, (base, k) in EPSILON_VALUES.items():
            expanded = base**k
            u = pell_smallest(D)
            if u.eps != expanded or u.t0**2 - D * u.u0**2 != 4:
                bad.append(D)
        return bad

    bad, dt = timed(work)
    ok = not bad and dt < 1.0
    assert record(3, ok, f"{len(EPSILON_VALUES) - len(bad)}/15 discriminants match the expanded powers ({dt:.2f} s) {bad or ''}")


DEDEKIND_VALUES = {
    2: ((1, 96), (11, 138240)),
    3: ((1, 108), (23, 349920)),
    5: ((2, 375), (4, 84375)),
    6: ((1, 144), (29, 622080)),
    7: ((1, 147), (113, 2593080)),
    10: ((7, 1200), (1577, 43200000)),
    11: ((7, 1452), (2153, 63249120)),
    13: ((2, 507), (116, 3855735)),
    14: ((5, 1176), (2503, 82978560)),
    15: ((1, 225), (179, 6075000)),
    17: ((4, 867), (328, 11275335)),
    19: ((1, 228), (14933, 562986720)),
    21: ((4, 1323), (88, 3750705)),
    22: ((23, 5808), (24889, 1011985920)),
    23: ((5, 1587), (7093, 302228280)),
}


def test_criterion_04_dedekind_values():
    def work():
        bad = []
        for d, ((a2, b2), (a4, b4)) in DEDEKIND_VALUES.items():
            if dedekind_special(d, 2) != SurdValue(Fraction(a2, b2), d, 4):
                bad.append((d, 2))
            if dedekind_special(d, 4) != SurdValue(Fraction(a4, b4), d, 8):
                bad.append((d, 4))
        return bad

    bad, dt = timed(work)
    ok = not bad and dt < 1.0
    assert record(4, ok, f"{30 - len(bad)}/30 (d, s) values exact ({dt:.2f} s) {bad or ''}")


def test_criterion_05_sqrt30():
    alpha = sqrt(30)
    c1, c2 = c1_c2_exact(alpha)
    sp = c1_c2_special_paths(alpha)
    want1, want2 = Fraction(121, 1800), Fraction(28224541, 1944000)
    eps_ok = (pell_smallest(120).t0, pell_smallest(120).u0) == (22, 2)
    c1_ok = c1.canonical[0] == want1 and sp.c1.canonical[0] == want1
    c2_ok = c2.canonical[0] == want2 and sp.c2.canonical[0] == want2
    rel1 = abs(float(c1) - float(sp.c1)) / float(c1)
    rel2 = abs(float(c2) - float(sp.c2)) / float(c2)
    agree = rel1 <= CROSS_PATH_REL and rel2 <= CROSS_PATH_REL
    ok = eps_ok and c1_ok and c2_ok and agree and sp.path == "genus-iii"
    detail = (
        f"c1 {'matches' if c1_ok else 'differs'}; c2 stated {want2}·√30/log(11+2√30), "
        f"both paths give {c2.canonical[0]} and {sp.c2.canonical[0]}; cross-path rel diff {max(rel1, rel2):.1e}"
    )
    assert record(5, ok, detail)


def test_criterion_06_oracle_equivalence():
    def work():
        bad = []
        for D in (5, 8, 12, 13, 120, 621):
            reps = class_number(D).representatives
            for n in range(1, 201):
                if sum(primary_reps(Q, n)[0] for Q in reps) != class_rep_sum(D, n):
                    bad.append((D, n))
                for Q in reps:
                    if primary_reps(Q, -n)[0] != primary_reps(-Q, n)[0]:
                        bad.append((D, -n))
        return bad

    bad, dt = timed(work)
    ok = not bad and dt < 30.0
    assert record(6, ok, f"6 discriminants x 200 n, {len(bad)} mismatches ({dt:.2f} s)")


def random_alphas(count, seed=2024):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        p, q_, r = rng.randint(-50, 50), rng.randint(-50, 50), rng.randint(-50, 50)
        d = rng.randint(2, 50)
        if q_ == 0 or r == 0 or not is_squarefree(d):
            continue
        out.append(QuadIrrational(p, q_, r, d))
    return out


def test_criterion_07_invariance():
    bad = []
    alphas = random_alphas(20)
    for a in alphas:
        c = c1_c2_exact(a)
        for b in (a + 1, -a, a.reciprocal()):
            if c1_c2_exact(b) != c:
                bad.append((str(a), str(b)))
    assert record(7, not bad, f"{len(alphas)} random alphas, {len(bad)} invariance failures")


def test_criterion_08_series_vs_exact():
    def work():
        rows = []
        for alpha in (PHI, SQRT2, ALPHA69):
            for theta in (2, 4):
                res = c_theta_series(alpha, theta, tol=SERIES_TOL)
                rows.append((str(alpha), theta, abs(res.value - c_theta_exact(alpha, theta)), res.tail_bound))
        return rows

    rows, dt = timed(work)
    worst = max(r[2] for r in rows)
    ok = worst <= SERIES_TOL and dt < 60.0
    assert record(8, ok, f"max |series - exact| = {worst:.2e} over 6 cases ({dt:.1f} s)")


def test_criterion_09_diophantine_slope():
    def work():
        out = []
        for alpha, theta in ((PHI, 2), (SQRT2, 2), (PHI, 4)):
            s = dsum_slope(alpha, float(theta), 10**3, 10**6)
            out.append((str(alpha), theta, s / c_theta_exact(alpha, theta)))
        return out

    rows, dt = timed(work)
    ok = all(abs(r - 1) <= SLOPE_TOL for _, _, r in rows) and dt < 120.0
    detail = ", ".join(f"{a} θ={t}: ratio {r:.3f}" for a, t, r in rows)
    assert record(9, ok, f"{detail} ({dt:.1f} s)")


def test_criterion_10_beck():
    rep = beck_sequence(10, 2, 3)
    factor = rep.separation(2)
    odd = [round(c.ratio_theta2, 2) for c in rep.checkpoints if c.block == "odd"]
    even = [round(c.ratio_theta2, 2) for c in rep.checkpoints if c.block == "even"]
    ok = factor >= BECK_FACTOR
    assert record(10, ok, f"min even / max odd = {factor:.3f}; even {even}, odd {odd}")


@pytest.fixture(scope="module")
def walk_run():
    cfg = WalkConfig(StepLaw.parse("-1:1/2,1:1/2"), PHI, MC_GRID, MC_TRIALS, MC_SEED)
    (W, dt) = timed(lambda: trial_matrix(cfg))
    return cfg, summarize(cfg, W), dt


def test_criterion_11_monte_carlo_slopes(walk_run):
    _, st, dt = walk_run
    pred = st.prediction
    rE = st.A_E / pred.A_E
    rV = st.A_V / pred.A_V
    ok = abs(rE - 1) <= A_E_TOL and abs(rV - 1) <= A_V_TOL
    detail = (
        f"A_E={st.A_E:.6f}±{st.fit_E.slope_se:.6f} vs c1={pred.A_E:.6f} (ratio {rE:.3f}); "
        f"A_V={st.A_V:.3e}±{st.fit_V.slope_se:.1e} vs c2={pred.A_V:.3e} (ratio {rV:.3f}); {dt:.0f} s"
    )
    assert record(11, ok, detail)


def test_criterion_12_finite_n_main_terms(walk_run):
    cfg, st, _ = walk_run
    worst = 0.0
    ok = True
    for i, N in enumerate(cfg.N_grid):
        main, _ = thm3_main_terms(cfg.law, cfg.alpha, N)
        allowed = THM3_SIGMAS * st.se_mean[i] + THM3_SLACK / N
        gap = abs(st.mean[i] - main)
        worst = max(worst, gap / allowed)
        ok &= gap <= allowed
    assert record(12, ok, f"max |mean - main term| / (3 SE + 5/N) = {worst:.3f} over {len(cfg.N_grid)} grid points")


def test_criterion_13_evaluator_cross_check():
    rng = np.random.default_rng(13)
    bound = 1 / (math.pi**2 * 10**5)

    def work():
        worst = 0.0
        fails = 0
        for _ in range(1000):
            x = rng.random(int(rng.integers(1, 1001)))
            v, tail = w2sq_fourier(x, 10**5, method="nufft")
            diff = abs(w2sq_exact(x) - v)
            worst = max(worst, diff)
            fails += diff > bound
        return worst, fails

    (worst, fails), dt = timed(work)
    ok = fails == 0 and dt < 30.0
    assert record(13, ok, f"1000 sets, max diff {worst:.2e} <= {bound:.2e}: {fails} violations ({dt:.1f} s)")


def test_criterion_14_determinism():
    cfg = WalkConfig(StepLaw.parse("-1:1/2,1:1/2"), PHI, (256, 1024, 4096), 200, 99)
    mats = {n: trial_matrix(cfg, threads=n).tobytes() for n in (1, 4, 16)}
    outs = {}
    for n in (1, 4, 16):
        buf = io.StringIO()
        dispatch(
            ["walk", "--alpha", "phi", "--law=-1:1/2,1:1/2", "--ngrid", "256:4096:x4", "--trials", "200",
             "--seed", "99", "--format", "json", "--threads", str(n)],
            stdout=buf,
        )
        outs[n] = buf.getvalue()
    ok = len(set(mats.values())) == 1 and len(set(outs.values())) == 1 and json.loads(outs[1])["trials"] == 200
    assert record(14, ok, "trial matrices and JSON output identical across 1, 4, 16 threads" if ok else "outputs differ")
