"""Monte Carlo for the lattice walk S_n * alpha mod 1 and its W2 distance to uniform."""
from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .constants import StepLaw, WalkPrediction, require_walk_law, thm3_main_terms, walk_prediction
from .errors import PreconditionError
from .qirr import QuadIrrational, floor_surd

FRAC_BITS = 192
MAX_TABLE = 1 << 27


def char_fn(law: StepLaw, x: float) -> complex:
    return law.char_fn(x)


class FracTable:
    """{k alpha} for |k| <= K, from a 192-bit fixed-point value of alpha."""

    def __init__(self, alpha: QuadIrrational, K: int):
        if 2 * K + 1 > MAX_TABLE:
            raise PreconditionError(f"walk range {K} too large for the position table")
        self.alpha = alpha
        self.K = K
        one = 1 << FRAC_BITS
        A = floor_surd(alpha.p * one, alpha.q * one, alpha.d, alpha.r) % one
        shift = FRAC_BITS - 53
        mask = one - 1
        vals = np.empty(2 * K + 1, dtype=np.float64)
        scale = 2.0**-53
        acc = (-K * A) & mask
        for i in range(2 * K + 1):
            vals[i] = (acc >> shift) * scale
            acc = (acc + A) & mask
        vals.setflags(write=False)
        self.values = vals

    def __call__(self, S: np.ndarray) -> np.ndarray:
        return self.values[S + self.K]


def _stream(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), trial_index])))


class _Sampler:
    """Exact sampling from a law with rational probabilities."""

    def __init__(self, law: StepLaw):
        den = math.lcm(*(p.denominator for _, p in law.support))
        self.den = den
        self.values = np.array([v for v, _ in law.support], dtype=np.int64)
        self.cum = np.cumsum([p.numerator * (den // p.denominator) for _, p in law.support])

    def draw(self, rng: np.random.Generator, N: int) -> np.ndarray:
        u = rng.integers(0, self.den, size=N)
        return self.values[np.searchsorted(self.cum, u, side="right")]


def walk_positions(law: StepLaw, N: int, seed: int, trial_index: int) -> np.ndarray:
    """S_1 .. S_N as int64 for the (seed, trial_index) stream."""
    steps = _Sampler(law).draw(_stream(seed, trial_index), N)
    return np.cumsum(steps)


def simulate(
    law: StepLaw, alpha: QuadIrrational, N: int, seed: int, trial_index: int, table: FracTable | None = None
) -> np.ndarray:
    """Fractional parts of S_n alpha for n = 1..N."""
    if N < 1:
        raise PreconditionError("N must be positive")
    S = walk_positions(law, N, seed, trial_index)
    if table is None:
        table = FracTable(alpha, N * max(abs(v) for v in law.values))
    return table(S)


def w2sq_sorted(xs: np.ndarray) -> float:
    N = xs.size
    e = xs - (2 * np.arange(1, N + 1) - 1) / (2 * N)
    return 1 / (12 * N * N) + float(np.var(e))


def w2sq_exact(points) -> float:
    """Squared periodic W2 distance between the empirical measure and Lebesgue measure.

    With F the empirical CDF, this is the integral of (F - x - c)^2 minimised
    over c; between order statistics everything is polynomial, which gives
    1/(12 N^2) plus the population variance of x_(i) - (2i - 1)/(2N).
    """
    xs = np.sort(np.asarray(points, dtype=np.float64))
    if xs.size == 0:
        raise PreconditionError("need at least one point")
    return w2sq_sorted(xs)


def _fourier_coeffs_direct(x: np.ndarray, M: int, block: int = 2048) -> np.ndarray:
    out = np.empty(M, dtype=np.complex128)
    for lo in range(1, M + 1, block):
        m = np.arange(lo, min(M + 1, lo + block))
        out[lo - 1 : lo - 1 + m.size] = np.exp(-2j * np.pi * np.outer(m, x)).mean(axis=1)
    return out


_plans = threading.local()


def _nufft_plan(M: int):
    import finufft

    cache = _plans.__dict__.setdefault("by_cut", {})
    if M not in cache:
        cache.clear()
        cache[M] = finufft.Plan(1, (2 * M + 2,), eps=1e-9, isign=-1, upsampfac=1.25, nthreads=1)
    return cache[M]


def _fourier_coeffs_nufft(x: np.ndarray, M: int) -> np.ndarray:
    plan = _nufft_plan(M)
    plan.setpts(2 * np.pi * x)
    f = plan.execute(np.full(x.size, 1 / x.size, dtype=np.complex128))
    # modes run from -(M+1) to M
    return f[M + 2 :]


def w2sq_fourier(points, M_cut: int, method: str = "auto") -> tuple[float, float]:
    """Truncated Fourier series for W2^2 and the bound 1/(pi^2 M_cut) on what was dropped."""
    if M_cut < 1:
        raise PreconditionError("M_cut must be >= 1")
    x = np.asarray(points, dtype=np.float64)
    if method == "auto":
        method = "direct" if x.size * M_cut <= 2_000_000 else "nufft"
    if method == "nufft":
        try:
            coeffs = _fourier_coeffs_nufft(x, M_cut)
        except ImportError:
            coeffs = _fourier_coeffs_direct(x, M_cut)
    else:
        coeffs = _fourier_coeffs_direct(x, M_cut)
    m = np.arange(1, M_cut + 1, dtype=np.float64)
    # pairwise summation; its error is far below the truncation bound
    value = float(np.sum(2 * np.abs(coeffs) ** 2 / (4 * np.pi**2 * m * m)))
    return value, 1 / (math.pi**2 * M_cut)


# ---------------------------------------------------------------- experiments


@dataclass(frozen=True)
class WalkConfig:
    law: StepLaw
    alpha: QuadIrrational
    N_grid: tuple[int, ...]
    trials: int
    seed: int
    fourier_cut: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "N_grid", tuple(int(n) for n in self.N_grid))
        if self.trials < 1:
            raise PreconditionError("trials must be >= 1")
        if not self.N_grid or any(b <= a for a, b in zip(self.N_grid, self.N_grid[1:])) or self.N_grid[0] < 1:
            raise PreconditionError("N_grid must be strictly increasing positive integers")


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    chi2: float
    residuals: tuple[float, ...]

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        return self.slope - z * self.slope_se, self.slope + z * self.slope_se


def weighted_fit(x, y, sigma) -> LinearFit:
    """Weighted least squares y = slope * x + intercept."""
    x, y, sigma = (np.asarray(v, dtype=np.float64) for v in (x, y, sigma))
    w = 1 / sigma**2
    X = np.column_stack([x, np.ones_like(x)])
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    beta = cov @ (X.T @ (w * y))
    resid = y - X @ beta
    return LinearFit(
        float(beta[0]),
        float(beta[1]),
        float(math.sqrt(cov[0, 0])),
        float(math.sqrt(cov[1, 1])),
        float(np.sum(w * resid**2)),
        tuple(float(r) for r in resid),
    )


@dataclass
class WalkStats:
    config: WalkConfig
    N_grid: tuple[int, ...]
    mean: np.ndarray
    var: np.ndarray
    se_mean: np.ndarray
    se_var: np.ndarray
    fit_E: LinearFit
    fit_V: LinearFit
    prediction: WalkPrediction | None
    thm3: list[tuple[float, float]] = field(default_factory=list)
    fourier_check: dict | None = None

    @property
    def A_E(self) -> float:
        return self.fit_E.slope

    @property
    def A_V(self) -> float:
        return self.fit_V.slope

    def rows(self) -> list[dict]:
        out = []
        for i, N in enumerate(self.N_grid):
            row = {
                "N": N,
                "mean_w2": float(self.mean[i]),
                "se_mean": float(self.se_mean[i]),
                "var_w2": float(self.var[i]),
                "se_var": float(self.se_var[i]),
            }
            if self.thm3:
                row["thm3_mean"], row["thm3_var"] = self.thm3[i]
            out.append(row)
        return out


def _trial_w2(grid, xs_source) -> np.ndarray:
    """W2^2 of each prefix in the grid, merging sorted runs as the prefix grows."""
    out = np.empty(len(grid))
    sorted_prefix = np.empty(0)
    prev = 0
    for i, N in enumerate(grid):
        new = np.sort(xs_source[prev:N])
        sorted_prefix = np.sort(np.concatenate([sorted_prefix, new]), kind="stable")
        out[i] = w2sq_sorted(sorted_prefix)
        prev = N
    return out


def _moments(W: np.ndarray):
    T = W.shape[0]
    mean = W.mean(axis=0)
    c = W - mean
    m2 = (c**2).mean(axis=0)
    m4 = (c**4).mean(axis=0)
    var = m2 * T / max(T - 1, 1)
    se_mean = np.sqrt(var / T)
    se_var = np.sqrt(np.maximum(m4 - m2**2, 0) / T)
    return mean, var, se_mean, se_var


def resolve_threads(threads: int | None) -> int:
    if threads:
        return max(1, int(threads))
    env = os.environ.get("QUADWALK_THREADS")
    if env:
        return max(1, int(env))
    return 1


def trial_matrix(config: WalkConfig, threads: int | None = None, points_fn=None) -> np.ndarray:
    """trials x len(N_grid) matrix of W2^2 values, row t from stream (seed, t)."""
    grid = config.N_grid
    N_max = grid[-1]
    if points_fn is None:
        table = FracTable(config.alpha, N_max * max(abs(v) for v in config.law.values))

        def points_fn(t):
            return simulate(config.law, config.alpha, N_max, config.seed, t, table)

    def one(t):
        return _trial_w2(grid, points_fn(t))

    W = np.empty((config.trials, len(grid)))
    n = resolve_threads(threads)
    if n == 1:
        for t in range(config.trials):
            W[t] = one(t)
    else:
        with ThreadPoolExecutor(n) as ex:
            for t, row in enumerate(ex.map(one, range(config.trials))):
                W[t] = row
    return W


def summarize(config: WalkConfig, W: np.ndarray, with_predictions: bool = True) -> WalkStats:
    grid = np.array(config.N_grid, dtype=np.float64)
    mean, var, se_mean, se_var = _moments(W)
    logN = np.log(grid)
    fit_E = weighted_fit(logN, grid * mean, grid * se_mean)
    fit_V = weighted_fit(logN, grid**2 * var, grid**2 * np.maximum(se_var, 1e-300))
    pred = walk_prediction(config.law, config.alpha) if with_predictions else None
    thm3 = [thm3_main_terms(config.law, config.alpha, int(N)) for N in config.N_grid] if with_predictions else []
    return WalkStats(config, config.N_grid, mean, var, se_mean, se_var, fit_E, fit_V, pred, thm3)


def run_experiment(config: WalkConfig, threads: int | None = None) -> WalkStats:
    require_walk_law(config.law)
    W = trial_matrix(config, threads)
    stats = summarize(config, W)
    if config.fourier_cut:
        table = FracTable(config.alpha, config.N_grid[-1] * max(abs(v) for v in config.law.values))
        pts = simulate(config.law, config.alpha, config.N_grid[-1], config.seed, 0, table)
        worst = 0.0
        for i, N in enumerate(config.N_grid):
            fv, tail = w2sq_fourier(pts[:N], config.fourier_cut)
            worst = max(worst, abs(fv - W[0, i]))
        stats.fourier_check = {"trial": 0, "max_abs_diff": worst, "tail_bound": 1 / (math.pi**2 * config.fourier_cut)}
    return stats


def run_iid_experiment(N_grid, trials: int, seed: int, threads: int | None = None) -> WalkStats:
    """Same estimators on i.i.d. uniform points, as a no-log-growth control."""
    law = StepLaw(((-1, Fraction(1, 2)), (1, Fraction(1, 2))))
    config = WalkConfig(law, QuadIrrational(1, 1, 2, 5), tuple(N_grid), trials, seed)
    N_max = config.N_grid[-1]

    def points_fn(t):
        return _stream(seed, t).random(N_max)

    W = trial_matrix(config, threads, points_fn)
    return summarize(config, W, with_predictions=False)
