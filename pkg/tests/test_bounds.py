import math
from fractions import Fraction

import numpy as np
import pytest

from bfcert.bounds import (BoundReport, bsc_failure_bound, capability, chilappagari_bound, delta_z,
                           dfr_bound, dfr_bound_girth6_regular, dfr_bound_qc, dfr_bound_regular_odd,
                           log2_int, max_col_intersection, mu_z, optimize_threshold, t_majority, t_mu,
                           theorem2_radius)
from bfcert.codes import (array_shifts, build_explicit, build_monomial, build_qc2,
                          distinct_row_profiles, random_qc2_girth6)
from bfcert.errors import DomainError, GuardError
from bfcert.montecarlo import exhaustive_dfr


def girth6_monomial(v, w=None, p=31):
    w = w or v + 2
    return build_monomial(p, array_shifts(p, v, w))


def test_log2_int_large_values():
    assert log2_int(1) == 0.0
    assert log2_int(2 ** 1000) == pytest.approx(1000.0)
    assert log2_int(3 * 2 ** 2000) == pytest.approx(2000 + math.log2(3))
    with pytest.raises(ValueError):
        log2_int(0)


def test_bound_report_clamps_and_logs():
    rep = BoundReport(3, 2, 50, 10, "th4")
    assert rep.bound == 1 and rep.log2_bound == 0.0
    rep = BoundReport(3, 2, 1, 8, "th4")
    assert rep.bound == Fraction(1, 8) and rep.log2_bound == pytest.approx(-3)
    assert BoundReport(3, 2, 0, 8, "th4").log2_bound == -math.inf


def test_t_mu_odd_girth6():
    H = girth6_monomial(13)
    t, ranges = t_mu(distinct_row_profiles(H), 13)
    assert t == 6 and ranges[6] == (7, 8)


def test_t_mu_even_girth6():
    H = girth6_monomial(14)
    t, ranges = t_mu(distinct_row_profiles(H), 14)
    assert t == 7 and ranges[7] == (8, 8)


def test_mu_and_delta(small_qc):
    prof = distinct_row_profiles(small_qc)
    assert max_col_intersection(prof) == 1
    assert mu_z(prof, 0) == 0
    assert mu_z(prof, 2) == 2


def test_capability_orders_radii(small_qc, toy_qc):
    for H in (small_qc, toy_qc, girth6_monomial(9)):
        cap = capability(H)
        assert cap.t_majority <= cap.t_mu
        for t, (lo, hi) in cap.threshold_range.items():
            assert lo <= hi
    assert t_majority(13, 1) == 6
    assert t_majority(5, 0, cap=40) == 40


def test_delta_z_and_theorem2_radius(toy_qc):
    assert delta_z(toy_qc, 1) == max_col_intersection(toy_qc)
    assert delta_z(toy_qc, 0) == 0
    # the XOR bound is never worse than the union bound
    assert theorem2_radius(toy_qc) >= capability(toy_qc).t_mu
    with pytest.raises(GuardError):
        delta_z(build_qc2(40, [0, 1], [0, 3]), 1)


def test_theorem_radius_corrects_everything_exhaustively(toy_qc):
    cap = capability(toy_qc)
    for t in range(1, cap.t_mu + 1):
        lo, hi = cap.threshold_range[t]
        for b in range(lo, hi + 1):
            assert exhaustive_dfr(toy_qc, t, b)[0] == 0


def test_chilappagari_values():
    assert chilappagari_bound(13, 6) == 3
    assert chilappagari_bound(20, 4) == 0
    assert chilappagari_bound(7, 8) == 3
    assert chilappagari_bound(8, 8) == 3
    assert chilappagari_bound(2, 10) == 0
    for v in range(1, 60):
        assert chilappagari_bound(v, 6) == math.ceil((v + 2) / 4) - 1
        assert chilappagari_bound(v, 8) == math.ceil(v / 2) - 1
        assert chilappagari_bound(v, 10) == math.ceil((v * v + 4) / 8) - 1
    with pytest.raises(DomainError):
        chilappagari_bound(5, 12)


def test_zero_region(small_qc):
    prof = distinct_row_profiles(small_qc)
    assert dfr_bound(prof, 1, 2).numerator == 0
    assert dfr_bound(prof, 2, 2).numerator > 0


def test_exhaustive_dominance_on_tiny_codes():
    codes = [build_qc2(7, [0, 1, 3], [0, 2, 3]), build_qc2(10, [0, 1, 3], [0, 4, 6]),
             build_qc2(8, [0, 2], [1, 5]), build_explicit([[0, 1, 2, 3], [2, 3, 4, 5], [0, 5, 6, 7],
                                                             [1, 4, 6], [2, 7, 5]], n=8)]
    for H in codes:
        prof = distinct_row_profiles(H)
        for b in range(1, H.v_star + 1):
            for t in range(0, min(H.n, 7) + 1):
                fails, total = exhaustive_dfr(H, t, b)
                rep = dfr_bound(prof, t, b)
                assert total == rep.denominator
                assert fails <= min(rep.numerator, total)


def test_per_bit_thresholds():
    H = build_explicit([[0, 1, 2, 3], [2, 3, 4, 5], [0, 5, 6, 7], [1, 4, 6], [2, 7, 5]], n=8)
    b = tuple(max(1, int(w) // 2 + 1) for w in H.column_weights)
    prof = distinct_row_profiles(H)
    for t in range(0, 5):
        fails, _ = exhaustive_dfr(H, t, b)
        assert fails <= dfr_bound(prof, t, b).numerator
    with pytest.raises(DomainError):
        dfr_bound(prof, 2, (9,) * 8)


def test_regular_odd_forms_agree():
    H = girth6_monomial(5, 9, p=13)
    prof = distinct_row_profiles(H)
    for t in range(1, 16):
        a = dfr_bound(prof, t, 3).numerator
        assert a == dfr_bound_regular_odd(prof, 5, t).numerator
        assert a == dfr_bound_girth6_regular(H.n, 5, 9, t).numerator


def test_regular_odd_rejects_even_weight():
    H = girth6_monomial(4)
    with pytest.raises(DomainError):
        dfr_bound_regular_odd(distinct_row_profiles(H), 4, 3)
    with pytest.raises(DomainError):
        dfr_bound_girth6_regular(100, 4, 6, 3)


def test_girth6_closed_form_zero_below_half():
    assert dfr_bound_girth6_regular(1006, 13, 26, 6).numerator == 0
    assert dfr_bound_girth6_regular(1006, 13, 26, 7).numerator > 0


def test_qc_shortcut_equals_generic(toy_qc, small_qc):
    for H in (toy_qc, small_qc):
        flat = distinct_row_profiles(H, use_structure=False)
        for t in range(0, 8):
            for b in range(1, H.v_star + 1):
                assert dfr_bound_qc(H, t, b).numerator == dfr_bound(flat, t, b).numerator
    with pytest.raises(DomainError):
        dfr_bound_qc(girth6_monomial(3), 2, 2)
    with pytest.raises(DomainError):
        dfr_bound_qc(small_qc, 2, 4)


def test_optimize_threshold_picks_minimum(small_qc):
    prof = distinct_row_profiles(small_qc)
    for t in (2, 4, 6):
        b, rep = optimize_threshold(prof, 3, t)
        nums = [dfr_bound(prof, t, x).numerator for x in range(1, 4)]
        assert rep.numerator == min(nums)
        assert b == 1 + nums.index(min(nums))


def test_bound_monotone_in_threshold_cache_reuse(small_qc):
    prof = distinct_row_profiles(small_qc)
    cache = {}
    first = dfr_bound(prof, 5, 2, cache=cache).numerator
    assert cache
    assert dfr_bound(prof, 5, 2, cache=cache).numerator == first


def test_bsc_bound_limits(small_qc):
    prof = distinct_row_profiles(small_qc)
    assert bsc_failure_bound(prof, 0.0, 2) == 0.0
    tiny = bsc_failure_bound(prof, 1e-7, 2)
    assert 0 <= tiny < 1e-10
    assert bsc_failure_bound(prof, 1e-4, 2) < bsc_failure_bound(prof, 1e-2, 2)
    assert bsc_failure_bound(prof, 1.0, 2) == 1.0
    with pytest.raises(DomainError):
        bsc_failure_bound(prof, 1.5, 2)


def test_bsc_bound_equals_weighted_sum_on_tiny_code():
    from scipy.stats import binom

    H = build_qc2(7, [0, 1, 3], [0, 2, 3])
    prof = distinct_row_profiles(H)
    rho = 0.05
    direct = sum(float(dfr_bound(prof, l, 2).bound) * binom.pmf(l, H.n, rho) for l in range(H.n + 1))
    assert bsc_failure_bound(prof, rho, 2) == pytest.approx(direct, rel=1e-9, abs=1e-30)


def test_random_supports_bound_is_exact_integer():
    S0, S1 = random_qc2_girth6(61, 5, np.random.default_rng(0))
    H = build_qc2(61, S0, S1)
    rep = dfr_bound_qc(H, 10, 3)
    assert isinstance(rep.numerator, int) and rep.denominator == math.comb(122, 10)
