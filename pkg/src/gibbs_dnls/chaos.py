"""Statistical checks on the quartic functional and Gaussian chaos.

Covers four kinds of evidence:
 - moment-ratio checks for polynomial chaos (hypercontractive growth),
 - large-deviation tail fits of field observables,
 - coupled-draw Cauchy rates for the truncated quartic functional,
 - the deterministic lattice kernel sum behind the convolution bound.

All randomness flows through sampling's counter-based streams; fits are
plain least squares on log survival / log norms and are deterministic
given the assembled statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .observables import batch_f_quartic, batch_X
from .sampling import (
    SeedSpec,
    _raw_uniforms,
    bootstrap_indices,
    phi_block,
    sample_gaussian,
    sample_phi,
)

__all__ = [
    "TailFit",
    "RateFit",
    "hermite_P",
    "chaos_ratio",
    "random_coeff_table",
    "f_decompose",
    "y3_sum",
    "cauchy_rate",
    "tail_survival",
    "kernel_tail_sum",
]


@dataclass(frozen=True)
class TailFit:
    """Empirical survival curve with a stretched-exponential fit.

    The regression is log P(S > lambda) ~ intercept - rate * lambda^theta
    over the thresholds with at least 50 exceedances (below that the
    relative error of the empirical survival makes the fit meaningless).
    rate > 0 means decay.
    """

    lambdas: tuple
    survival: tuple
    counts: tuple
    theta: float
    rate: float
    intercept: float
    r_squared: float
    total: int

    def __post_init__(self):
        s = np.asarray(self.survival)
        if np.any(s < 0) or np.any(s > 1):
            raise ValueError("survival probabilities must lie in [0,1]")
        if np.any(np.diff(s) > 0):
            raise ValueError("survival must be non-increasing")

    def to_json_dict(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "survival": list(self.survival),
            "counts": list(self.counts),
            "theta": self.theta,
            "rate": self.rate,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "total": self.total,
        }

    def to_csv(self) -> str:
        lines = ["lambda,count,survival"]
        for lam, cnt, s in zip(self.lambdas, self.counts, self.survival):
            lines.append(f"{lam!r},{cnt},{s!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RateFit:
    """Log-log rate fit of a norm sequence against the band."""

    bands: tuple
    values: tuple
    slope: float
    ci_low: float
    ci_high: float

    def __post_init__(self):
        b = np.asarray(self.bands)
        if len(b) >= 2 and np.any(np.diff(b) <= 0):
            raise ValueError("bands must be strictly increasing")
        if np.any(np.asarray(self.values) <= 0):
            raise ValueError("values must be positive")

    def to_json_dict(self) -> dict:
        return {
            "bands": list(self.bands),
            "values": list(self.values),
            "slope": self.slope,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
        }

    def to_csv(self) -> str:
        lines = ["band,value"]
        for b, v in zip(self.bands, self.values):
            lines.append(f"{b},{v!r}")
        return "\n".join(lines) + "\n"


def hermite_P(n: int, x):
    """Physicists' Hermite polynomial by the two-term recurrence.

    P_0 = 1, P_1 = 2x, P_{n+1} = 2x P_n - 2n P_{n-1}.  Guarded to
    n <= 30: coefficients grow like 2^n n! and lose meaning in float64
    well past that.
    """
    n = int(n)
    if n < 0:
        raise ValueError("order must be non-negative")
    if n > 30:
        raise ValueError("order above 30 not supported (coefficient overflow)")
    x = np.asarray(x, dtype=np.float64)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = 2.0 * x
    for m in range(1, n):
        p, p_prev = 2.0 * x * p - 2.0 * m * p_prev, p
    return p if p.ndim else float(p)


def chaos_ratio(k: int, d: int, coeffs: dict, p: float, sample_count: int,
                seed: int) -> tuple:
    """Empirical L^p/L^2 ratio of a degree-k Gaussian polynomial vs its bound.

    The polynomial is S = sum over ordered multi-indices (n_1 <= ... <= n_k,
    entries in 1..d) of coeffs[idx] * g_{n_1} ... g_{n_k} with iid complex
    standard Gaussians g.  Returns (ratio, bound) with
    bound = sqrt(k+1) * (p-1)^{k/2}; the ratio can exceed the bound only
    by Monte Carlo noise.
    """
    k = int(k)
    d = int(d)
    if k < 1:
        raise ValueError("degree k must be at least 1")
    if not coeffs:
        raise ValueError("empty coefficient table")
    if p < 2:
        raise ValueError("p must be at least 2")
    for idx in coeffs:
        if len(idx) != k:
            raise ValueError(f"multi-index {idx} does not have length {k}")
        if any(not 1 <= m <= d for m in idx):
            raise ValueError(f"multi-index {idx} outside 1..{d}")
        if any(a > b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"multi-index {idx} is not non-decreasing")
    count = int(sample_count)
    g = sample_gaussian(SeedSpec(int(seed), 0), count * d).reshape(count, d)
    S = np.zeros(count, dtype=np.complex128)
    for idx, c in coeffs.items():
        prod = np.ones(count, dtype=np.complex128)
        for m in idx:
            prod = prod * g[:, m - 1]
        S += complex(c) * prod
    absS = np.abs(S)
    lp = float(np.mean(absS ** p) ** (1.0 / p))
    l2 = float(np.sqrt(np.mean(absS ** 2)))
    bound = float(np.sqrt(k + 1) * (p - 1.0) ** (k / 2.0))
    return lp / l2, bound


# stream indices reserved for coefficient-table generation; the bootstrap
# stream (2^64 - 1) lives in sampling
_TABLE_INDEX_STREAM = 2 ** 64 - 2
_TABLE_VALUE_STREAM = 2 ** 64 - 3


def random_coeff_table(k: int, d: int, terms: int, seed: int) -> dict:
    """Deterministic random coefficient table for chaos_ratio.

    Draws `terms` ordered multi-indices of length k with entries in 1..d
    and complex Gaussian coefficients, both from reserved counter streams
    of the master seed, so tables are reproducible and independent of the
    evaluation samples.  Colliding indices accumulate.
    """
    k = int(k)
    d = int(d)
    terms = int(terms)
    if k < 1 or d < 1 or terms < 1:
        raise ValueError("k, d and terms must all be positive")
    u = _raw_uniforms(SeedSpec(int(seed), _TABLE_INDEX_STREAM), terms * k)
    digits = np.minimum(np.floor(u * d).astype(int) + 1, d).reshape(terms, k)
    values = sample_gaussian(SeedSpec(int(seed), _TABLE_VALUE_STREAM), terms)
    table: dict = {}
    for row, val in zip(digits, values):
        idx = tuple(sorted(int(m) for m in row))
        table[idx] = table.get(idx, 0j) + complex(val)
    return table


def _pair_sums(n: np.ndarray, a: np.ndarray) -> complex:
    """sum over ordered pairs n1 != n2 of 2i (n1+n2) a_{n1} a_{n2}."""
    sa = np.sum(a)
    sna = np.sum(n * a)
    diag = np.sum(n * a * a)
    return 2j * (2.0 * sna * sa - 2.0 * diag)


def f_decompose(N: int, seed) -> tuple:
    """Split the quartic sum of one Gaussian draw into its chaos pieces.

    For the draw phi_N(seed) with c_n = g_n/<n>, the full convolution sum
    i * f_N splits over index quadruples (n_1, n_2, m_1, m_2) with
    m_1 + m_2 = n_1 + n_2 into

      S1: quadruples where {m_1, m_2} = {n_1, n_2} as multisets,
      S2: everything else (computed here as an explicit lattice sum,
          cubic in the band - keep N modest).

    S1 further splits, writing |g_n|^2 = 1 + G_n and b_n = <n>^{-2}, into
    X (the diagonal n_1 = n_2), Y1 (quadratic in G), Y2 (linear in G) and
    Y3 (constant, identically zero by n -> -n symmetry).  Each unordered
    off-diagonal pair occurs in four quadruple arrangements, so the pair
    terms carry weight 2i(n_1+n_2) per ordered pair and the diagonal
    carries 2in; those weights make S1 = X + Y1 + Y2 + Y3 exact.

    Returns (S1, S2, X, Y1, Y2); S1 + S2 = i * f_N(draw).
    """
    N = int(N)
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed), 0)
    u = sample_phi(N, seed)
    c = u.coeffs
    n = np.arange(-N, N + 1, dtype=np.float64)
    a = c.real ** 2 + c.imag ** 2          # |c_n|^2
    b = 1.0 / (n * n + 1.0)                # <n>^{-2}
    G = a / b - 1.0                        # |g_n|^2 - 1

    X = 2j * np.sum(n * a * a)
    S1 = _pair_sums(n, a) + X
    Y1 = _pair_sums(n, G * b)
    # linear-in-G pair term: expand (n1+n2)(G1+G2) over the full grid,
    # remove the diagonal (which contributes 4 n G b^2 per n)
    sb = np.sum(b)
    sgb = np.sum(G * b)
    snb = np.sum(n * b)
    sngb = np.sum(n * G * b)
    Y2 = 2j * (2.0 * sngb * sb + 2.0 * snb * sgb - 4.0 * np.sum(n * G * b * b))

    # off-multiset quadruples, fully explicit over the lattice
    ni = np.arange(-N, N + 1)
    n1 = ni[:, None, None]
    n2 = ni[None, :, None]
    m1 = ni[None, None, :]
    m2 = n1 + n2 - m1
    valid = np.abs(m2) <= N
    same = ((m1 == n1) & (m2 == n2)) | ((m1 == n2) & (m2 == n1))
    mask = valid & ~same
    m2c = np.clip(m2 + N, 0, 2 * N)
    term = (
        1j * (n1 + n2)
        * c[n1 + N] * c[n2 + N]
        * np.conj(c[m1 + N]) * np.conj(c[m2c])
    )
    S2 = complex(np.sum(np.where(mask, term, 0.0)))

    return complex(S1), S2, complex(X), complex(Y1), complex(Y2)


def y3_sum(N: int) -> complex:
    """The constant pair term, summed so the cancellation is exact.

    Terms come in (n_1,n_2) vs (-n_1,-n_2) mirror pairs with equal
    magnitude and opposite sign; adding each pair as a unit yields an
    exact floating-point zero rather than roundoff dust.
    """
    N = int(N)
    total = 0.0
    for n1 in range(-N, N + 1):
        b1 = 1.0 / (n1 * n1 + 1.0)
        for n2 in range(-N, N + 1):
            if n2 == n1:
                continue
            # take each mirror orbit once, from its positive representative
            if (n1, n2) < (-n1, -n2):
                continue
            b2 = 1.0 / (n2 * n2 + 1.0)
            w = 2.0 * (n1 + n2) * b1 * b2
            wm = 2.0 * (-(n1 + n2)) * b1 * b2
            total += w + wm
    return complex(0.0, total)


_RATE_MODES = ("f_full", "X_only")


def cauchy_rate(bands, sample_count: int, seed: int, mode: str = "f_full",
                resamples: int = 200) -> RateFit:
    """Coupled-draw L^2(d mu) distance between truncations at N and 2N.

    For each N the same Gaussian draw at band 2N is evaluated at both
    truncations (restriction = column slice), the root mean square of the
    difference estimates the norm, and the log-log slope over the bands
    is fitted with a bootstrap confidence interval.  mode selects the
    full functional or only its diagonal X part.
    """
    bands = [int(b) for b in bands]
    if len(bands) < 2:
        raise ValueError("need at least two bands for a rate")
    if any(b2 <= b1 for b1, b2 in zip(bands, bands[1:])):
        raise ValueError("bands must be strictly increasing")
    count = int(sample_count)
    if count < 100:
        raise ValueError("sample_count below 100: confidence interval meaningless")
    if mode not in _RATE_MODES:
        raise ValueError(f"mode must be one of {_RATE_MODES}")

    evaluate = batch_f_quartic if mode == "f_full" else batch_X
    sq_diffs = []
    block = 1000
    for j, N in enumerate(bands):
        first = j * count  # disjoint stream range per band pair
        d2 = np.empty(count)
        for lo in range(0, count, block):
            hi = min(lo + block, count)
            rows = phi_block(int(seed), first + lo, hi - lo, 2 * N)
            inner = rows[:, N: 3 * N + 1]  # columns |n| <= N
            d = evaluate(rows) - evaluate(inner)
            d2[lo:hi] = d * d
        sq_diffs.append(d2)

    values = [float(np.sqrt(np.mean(d2))) for d2 in sq_diffs]
    logb = np.log(np.asarray(bands, dtype=np.float64))
    slope = float(np.polyfit(logb, np.log(values), 1)[0])

    idx = bootstrap_indices(int(seed), count, int(resamples))
    slopes = np.empty(idx.shape[0])
    for r in range(idx.shape[0]):
        vals_r = [np.sqrt(np.mean(d2[idx[r]])) for d2 in sq_diffs]
        slopes[r] = np.polyfit(logb, np.log(vals_r), 1)[0]
    lo, hi = np.percentile(slopes, [2.5, 97.5])

    return RateFit(tuple(bands), tuple(values), slope, float(lo), float(hi))


def tail_survival(observable, N: int, lambdas, sample_count: int, seed: int,
                  condition=None, theta: float = 2.0,
                  block: int = 8000) -> TailFit:
    """Empirical survival of a field observable with a lambda^theta fit.

    observable and condition act on coefficient blocks (rows at band N)
    and return a value per row / a boolean keep-mask per row; samples
    stream through in blocks so million-sample runs stay in memory.
    theta in {1/2, 1, 2} selects the candidate tail shape.
    """
    lambdas = np.asarray(sorted(float(x) for x in lambdas))
    if len(lambdas) < 2:
        raise ValueError("need at least two thresholds")
    if theta not in (0.5, 1.0, 2.0):
        raise ValueError("theta must be one of 1/2, 1, 2")
    count = int(sample_count)
    exceed = np.zeros(len(lambdas), dtype=np.int64)
    kept = 0
    for lo in range(0, count, block):
        hi = min(lo + block, count)
        rows = phi_block(int(seed), lo, hi - lo, int(N))
        if condition is not None:
            rows = rows[condition(rows)]
            if rows.shape[0] == 0:
                continue
        vals = observable(rows)
        kept += len(vals)
        # one sort per block, then positions of the thresholds
        vals = np.sort(vals)
        exceed += len(vals) - np.searchsorted(vals, lambdas, side="right")
    if kept == 0:
        raise ValueError("condition rejected every sample")
    if exceed[0] < 50:
        raise ValueError(
            f"only {exceed[0]} exceedances at the smallest threshold; "
            f"insufficient tail data"
        )
    survival = exceed / kept
    # fit window: thresholds that still have >= 50 exceedances
    win = exceed >= 50
    z = lambdas[win] ** theta
    y = np.log(survival[win])
    slope, intercept = np.polyfit(z, y, 1)
    resid = y - (slope * z + intercept)
    sstot = np.sum((y - np.mean(y)) ** 2)
    r2 = 1.0 - float(np.sum(resid ** 2) / sstot) if sstot > 0 else 0.0
    return TailFit(
        lambdas=tuple(float(x) for x in lambdas),
        survival=tuple(float(s) for s in survival),
        counts=tuple(int(c) for c in exceed),
        theta=float(theta),
        rate=float(-slope),
        intercept=float(intercept),
        r_squared=r2,
        total=kept,
    )


def kernel_tail_sum(n: int, N: int, eps: float = 0.25) -> tuple:
    """Exact two-sided tail of the convolution kernel, with its scaled ratio.

    Computes sum over integers n_1 with |n_1| >= N and |n - n_1| >= N of
    <n_1>^{-2} <n - n_1>^{-2}, summing small terms first; the range cutoff
    leaves out only terms below 1e-15 each (total well under 1e-14).
    Returns (sum, sum * N^{3/2-eps} * <n>^{3/2+eps}); the scaled ratio
    staying bounded over (n, N) sweeps is the content of the kernel bound.
    """
    n = int(n)
    N = int(N)
    if N < 1:
        raise ValueError("N must be at least 1")
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    R = 100000 + abs(n)
    n1 = np.arange(-R, R + 1, dtype=np.float64)
    mask = (np.abs(n1) >= N) & (np.abs(n - n1) >= N)
    n1 = n1[mask]
    terms = 1.0 / ((n1 * n1 + 1.0) * ((n - n1) ** 2 + 1.0))
    total = float(np.sum(np.sort(terms)))
    ratio = total * N ** (1.5 - eps) * (n * n + 1.0) ** ((1.5 + eps) / 2.0)
    return total, ratio
