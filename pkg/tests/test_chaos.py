"""Chaos moments, the quartic decomposition, rates, tails, kernel sums."""

import numpy as np
import pytest

from gibbs_dnls.chaos import (
    RateFit,
    TailFit,
    cauchy_rate,
    chaos_ratio,
    f_decompose,
    hermite_P,
    kernel_tail_sum,
    random_coeff_table,
    tail_survival,
    y3_sum,
)
from gibbs_dnls.observables import batch_f_quartic, batch_mass, batch_re_coeff, batch_X
from gibbs_dnls.sampling import SeedSpec, phi_block, sample_phi
from gibbs_dnls.functionals import f_quartic


# --- Hermite recurrence ----------------------------------------------------

def test_hermite_low_orders():
    assert hermite_P(0, 0.3) == 1.0
    assert hermite_P(1, 0.3) == pytest.approx(0.6)
    assert hermite_P(2, 1.0) == pytest.approx(2.0)      # 4x^2 - 2
    assert hermite_P(3, 2.0) == pytest.approx(40.0)     # 8x^3 - 12x


def test_hermite_array_and_guards():
    x = np.linspace(-1, 1, 5)
    assert hermite_P(2, x).shape == (5,)
    with pytest.raises(ValueError):
        hermite_P(-1, 0.0)
    with pytest.raises(ValueError):
        hermite_P(31, 0.0)


def test_hermite_orthogonality_quadrature():
    # 40-node Gauss-Hermite quadrature under weight e^{-x^2}
    x, w = np.polynomial.hermite.hermgauss(40)
    inner = np.sum(w * hermite_P(2, x) * hermite_P(3, x))
    assert abs(inner) <= 1e-8
    # squared norm of P_2 under the same weight: 2^2 2! sqrt(pi)
    norm2 = np.sum(w * hermite_P(2, x) ** 2)
    assert norm2 == pytest.approx(8.0 * np.sqrt(np.pi), rel=1e-10)


# --- chaos moment ratios ---------------------------------------------------

def test_chaos_ratio_validation():
    with pytest.raises(ValueError):
        chaos_ratio(0, 4, {(1,): 1.0}, 4, 100, 1)
    with pytest.raises(ValueError):
        chaos_ratio(1, 4, {}, 4, 100, 1)
    with pytest.raises(ValueError):
        chaos_ratio(1, 4, {(1,): 1.0}, 1.5, 100, 1)
    with pytest.raises(ValueError):
        chaos_ratio(2, 4, {(1,): 1.0}, 4, 100, 1)       # wrong length
    with pytest.raises(ValueError):
        chaos_ratio(1, 4, {(5,): 1.0}, 4, 100, 1)       # out of range
    with pytest.raises(ValueError):
        chaos_ratio(2, 4, {(3, 1): 1.0}, 4, 100, 1)     # not sorted


def _ratio_stats(k, d, table, p, seeds, count=50000):
    vals = [chaos_ratio(k, d, table, p, count, s)[0] for s in seeds]
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(len(vals)))


def test_chaos_spot_single_gaussian():
    # S = g_1, p = 4: exact ratio (E|g|^4)^{1/4} = 2^{1/4}
    mean, se = _ratio_stats(1, 4, {(1,): 1.0}, 4.0, range(10))
    assert abs(mean - 2.0 ** 0.25) <= 3.0 * se


def test_chaos_spot_squared_gaussian():
    # S = g_1^2, p = 4: E|S|^4 = E|g|^8 = 24, E|S|^2 = E|g|^4 = 2
    # ratio 24^{1/4} / 2^{1/2} = 6^{1/4}
    mean, se = _ratio_stats(2, 4, {(1, 1): 1.0}, 4.0, range(10))
    assert abs(mean - 6.0 ** 0.25) <= 3.0 * se


def test_chaos_spot_product_pair():
    # S = g_1 g_2, p = 4: E|S|^4 = 2*2 = 4, E|S|^2 = 1, ratio = sqrt(2)
    mean, se = _ratio_stats(2, 4, {(1, 2): 1.0}, 4.0, range(10))
    assert abs(mean - np.sqrt(2.0)) <= 3.0 * se


def test_chaos_bound_value():
    _, bound = chaos_ratio(3, 4, {(1, 2, 3): 1.0}, 6.0, 100, 0)
    assert bound == pytest.approx(np.sqrt(4.0) * 5.0 ** 1.5)


def test_random_coeff_table():
    t1 = random_coeff_table(2, 8, 12, 77)
    t2 = random_coeff_table(2, 8, 12, 77)
    assert t1 == t2
    assert 1 <= len(t1) <= 12
    for idx in t1:
        assert len(idx) == 2
        assert all(1 <= m <= 8 for m in idx)
        assert idx[0] <= idx[1]
    assert random_coeff_table(2, 8, 12, 78) != t1
    with pytest.raises(ValueError):
        random_coeff_table(0, 8, 12, 1)


# --- quartic decomposition -------------------------------------------------

def test_f_decompose_reconstruction():
    # two independent computations of the same integral, 50 draws
    worst = 0.0
    for s in range(50):
        S1, S2, X, Y1, Y2 = f_decompose(12, s)
        f = f_quartic(sample_phi(12, SeedSpec(s, 0)), 12)
        worst = max(worst, abs((S1 + S2).imag - f) / max(abs(f), 1e-12))
        assert abs((S1 + S2).real) <= 1e-12 * max(1.0, abs(f))
    assert worst <= 1e-9


def test_f_decompose_chaos_split():
    for s in range(10):
        S1, S2, X, Y1, Y2 = f_decompose(8, s)
        Y3 = y3_sum(8)
        assert abs(S1 - (X + Y1 + Y2 + Y3)) <= 1e-12 * max(1.0, abs(S1))


def test_f_decompose_degenerate_band():
    # a single mode admits no off-multiset quadruples
    S1, S2, X, Y1, Y2 = f_decompose(0, 3)
    assert S2 == 0


def test_y3_exact_zero():
    for N in (1, 4, 16, 32):
        assert y3_sum(N) == 0j


def test_micro_second_moment():
    # band-1 fields: E[f^2] = 42 by direct moment expansion of the
    # quartic sum (complex Gaussian moments E|g|^{2m} = m!)
    count = 300000
    rows = phi_block(4242, 0, count, 1)
    f = batch_f_quartic(rows)
    f2 = f * f
    se = np.std(f2) / np.sqrt(count)
    assert abs(np.mean(f2) - 42.0) <= 4.0 * se


# --- Cauchy rates ----------------------------------------------------------

def test_cauchy_rate_validation():
    with pytest.raises(ValueError):
        cauchy_rate([8], 200, 1)
    with pytest.raises(ValueError):
        cauchy_rate([8, 8], 200, 1)
    with pytest.raises(ValueError):
        cauchy_rate([8, 16], 50, 1)
    with pytest.raises(ValueError):
        cauchy_rate([8, 16], 200, 1, mode="bogus")


def test_cauchy_rate_fit_shape():
    fit = cauchy_rate([4, 8], 200, 5, mode="X_only", resamples=50)
    assert fit.bands == (4, 8)
    assert all(v > 0 for v in fit.values)
    assert fit.ci_low <= fit.slope <= fit.ci_high
    d = fit.to_json_dict()
    assert d["slope"] == fit.slope
    assert fit.to_csv().startswith("band,value\n")


def test_x_difference_second_moment_closed_form():
    # E (X_2N - X_N)^2 = 160 sum_{n=N+1}^{2N} n^2/(n^2+1)^4, from the
    # independence of |g_n|^2 across modes and Var|g|^4 = 20
    N = 8
    n = np.arange(N + 1, 2 * N + 1, dtype=np.float64)
    want = 160.0 * np.sum(n * n / (n * n + 1.0) ** 4)
    count = 40000
    rows = phi_block(909, 0, count, 2 * N)
    d = batch_X(rows) - batch_X(rows[:, N: 3 * N + 1])
    d2 = d * d
    se = np.std(d2) / np.sqrt(count)
    assert abs(np.mean(d2) - want) <= 4.0 * se


def test_rate_fit_validation():
    with pytest.raises(ValueError):
        RateFit((8, 4), (1.0, 1.0), -1.0, -1.5, -0.5)
    with pytest.raises(ValueError):
        RateFit((4, 8), (1.0, -1.0), -1.0, -1.5, -0.5)


# --- tail fits -------------------------------------------------------------

def test_tail_erfc_control():
    # |Re c_0| is N(0, 1/2): P(|Re c_0| > lam) = erfc(lam) exactly
    import math
    lambdas = [0.5, 0.75, 1.0, 1.25, 1.5]
    fit = tail_survival(lambda rows: np.abs(batch_re_coeff(rows, 0)),
                        0, lambdas, 100000, 161)
    assert fit.theta == 2.0
    assert fit.rate > 0
    assert fit.r_squared >= 0.95
    for lam, s, c in zip(fit.lambdas, fit.survival, fit.counts):
        if c >= 50:
            p = math.erfc(lam)
            assert abs(s - p) <= 5.0 * np.sqrt(p * (1 - p) / fit.total)


def test_tail_survival_monotone_and_serialized():
    fit = tail_survival(batch_mass, 4, [1.0, 1.5, 2.0, 2.5], 20000, 19)
    assert all(b <= a for a, b in zip(fit.survival, fit.survival[1:]))
    csv = fit.to_csv()
    assert csv.startswith("lambda,count,survival\n")
    assert csv.endswith("\n")
    d = fit.to_json_dict()
    assert d["total"] == 20000


def test_tail_survival_errors():
    with pytest.raises(ValueError, match="exceedances"):
        tail_survival(batch_mass, 2, [50.0, 60.0], 2000, 3)
    with pytest.raises(ValueError, match="rejected"):
        tail_survival(batch_mass, 2, [0.5, 1.0], 2000, 3,
                      condition=lambda rows: batch_mass(rows) < 1e-9)
    with pytest.raises(ValueError):
        tail_survival(batch_mass, 2, [1.0], 2000, 3)
    with pytest.raises(ValueError):
        tail_survival(batch_mass, 2, [0.5, 1.0], 2000, 3, theta=3.0)


def test_tail_fit_validation():
    with pytest.raises(ValueError):
        TailFit((1.0, 2.0), (0.1, 0.2), (10, 20), 2.0, 1.0, 0.0, 0.9, 100)


# --- kernel sums -----------------------------------------------------------

def test_kernel_tail_sum_against_direct_loop():
    # independent summation path: plain accumulation over a wide window
    for n, N in ((0, 4), (5, 8)):
        total = 0.0
        for n1 in range(-150000, 150001):
            if abs(n1) >= N and abs(n - n1) >= N:
                total += 1.0 / ((n1 * n1 + 1.0) * ((n - n1) ** 2 + 1.0))
        got, _ = kernel_tail_sum(n, N)
        assert got == pytest.approx(total, rel=1e-9)


def test_kernel_tail_sum_frozen_values():
    got, _ = kernel_tail_sum(0, 4)
    assert got == pytest.approx(0.013673950845816721, rel=1e-12)
    got, _ = kernel_tail_sum(5, 8)
    assert got == pytest.approx(0.0007064630323090487, rel=1e-12)


def test_kernel_symmetry_and_monotonicity():
    for N in (4, 8, 16):
        a, _ = kernel_tail_sum(7, N)
        b, _ = kernel_tail_sum(-7, N)
        assert a == b
    s4, _ = kernel_tail_sum(0, 4)
    s8, _ = kernel_tail_sum(0, 8)
    assert s8 < s4


def test_kernel_validation():
    with pytest.raises(ValueError):
        kernel_tail_sum(0, 0)
    with pytest.raises(ValueError):
        kernel_tail_sum(0, 4, eps=0.75)
    with pytest.raises(ValueError):
        kernel_tail_sum(0, 4, eps=0.0)
