"""Kernel tests: Pochhammer symbols, digamma, Stirling numbers, sums."""

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treeload.specialfn import (
    EULER_GAMMA,
    DomainError,
    BoundError,
    PrecisionPolicy,
    SignedLogReal,
    compensated_sum,
    digamma,
    pochhammer_int,
    pochhammer_frac,
    stirling_first,
    StirlingTable,
    sum_term,
    sum_term_signed,
)


class TestSignedLogReal:
    def test_round_trip(self):
        # exp(log x) wobbles by about |log x| ulps relatively
        for x in (3.5, -2.25e-100, 1e200, -7.0):
            slr = SignedLogReal.from_float(x)
            rel = max(1e-15, abs(slr.log_magnitude) * 3e-16)
            assert slr.to_float() == pytest.approx(x, rel=rel)

    def test_zero(self):
        assert SignedLogReal.from_float(0.0).sign == 0
        assert SignedLogReal(0).to_float() == 0.0

    def test_multiplication(self):
        a = SignedLogReal.from_float(-3.0)
        b = SignedLogReal.from_float(0.5)
        assert (a * b).to_float() == pytest.approx(-1.5)
        assert (a * SignedLogReal(0)).sign == 0


class TestPochhammerInt:
    def test_empty_product(self):
        assert pochhammer_int(3.0, 0).to_float() == 1.0

    def test_zero_at_nonpositive_integer(self):
        assert pochhammer_int(-1.0, 2).sign == 0
        assert pochhammer_int(0.0, 5).sign == 0
        # not enough factors to reach the zero
        assert pochhammer_int(-3.0, 2).to_float() == pytest.approx(6.0)

    def test_half_integer(self):
        assert pochhammer_int(0.5, 3).to_float() == pytest.approx(1.875)

    def test_negative_non_integer(self):
        # (-0.5)_2 = (-0.5)(0.5)
        assert pochhammer_int(-0.5, 2).to_float() == pytest.approx(-0.25)

    def test_large_order_matches_product(self):
        # above the internal product cutoff the log-gamma route takes over
        x = -2.3
        n = 300
        direct = SignedLogReal.from_float(1.0)
        sign, log_mag = 1, 0.0
        for j in range(n):
            f = x + j
            sign *= 1 if f > 0 else -1
            log_mag += math.log(abs(f))
        got = pochhammer_int(x, n)
        assert got.sign == sign
        assert got.log_magnitude == pytest.approx(log_mag, rel=1e-13)

    @given(st.floats(-20, 20).filter(lambda x: abs(x - round(x)) > 1e-3),
           st.integers(0, 80))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, x, n):
        lhs = pochhammer_int(x, n + 1)
        rhs = pochhammer_int(x, n) * SignedLogReal.from_float(x + n)
        if rhs.sign == 0:
            assert lhs.sign == 0
        else:
            assert lhs.sign == rhs.sign
            assert lhs.log_magnitude == pytest.approx(rhs.log_magnitude,
                                                      abs=1e-10)


class TestPochhammerFrac:
    def test_order_zero(self):
        assert pochhammer_frac(3.7, 0.0) == pytest.approx(1.0)

    def test_unit(self):
        assert pochhammer_frac(1.0, 1.0) == pytest.approx(1.0)

    def test_half(self):
        # Gamma(2)/Gamma(1.5) = 2/sqrt(pi), from high-precision evaluation
        assert pochhammer_frac(1.5, 0.5) == pytest.approx(
            1.1283791670955126, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            pochhammer_frac(-1.0, 0.5)
        with pytest.raises(DomainError):
            pochhammer_frac(1.0, 2.0)


class TestDigamma:
    def test_at_one(self):
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-13)

    def test_at_two(self):
        assert digamma(2.0) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-13)

    def test_harmonic_oracle(self):
        # digamma(n+1) - digamma(1) equals the n-th harmonic number
        h10 = sum(1.0 / k for k in range(1, 11))
        assert digamma(11.0) - digamma(1.0) == pytest.approx(h10, abs=1e-12)

    def test_against_mpmath(self):
        for x in (0.1, 0.37, 1.0, 5.5, 123.0, 1e6):
            assert digamma(x) == pytest.approx(float(mpmath.digamma(x)),
                                               abs=1e-12)

    @given(st.floats(0.1, 1e6))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, x):
        assert digamma(x + 1.0) - digamma(x) == pytest.approx(
            1.0 / x, rel=1e-10, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            digamma(0.0)


class TestStirlingFirst:
    def test_diagonal(self):
        for n in (0, 1, 5, 30):
            assert stirling_first(n, n) == 1

    def test_zero_column(self):
        for n in (1, 4, 17):
            assert stirling_first(n, 0) == 0

    def test_known_values(self):
        # from the recurrence s(n+1,k) = s(n,k-1) - n s(n,k), s(1,1) = 1
        assert stirling_first(3, 2) == -3
        assert stirling_first(4, 1) == -6

    def test_recurrence_exact(self):
        table = StirlingTable(n_max=40)
        for n in range(1, 39):
            for k in range(1, n + 1):
                lhs = table.value(n + 1, k)
                rhs = table.value(n, k - 1) - n * table.value(n, k)
                assert lhs == rhs

    def test_rising_factorial_expansion(self):
        # (x)_m = sum_k |s(m,k)| x^k, checked against the direct product
        for m in range(1, 13):
            for x in (-0.7, 0.3, 1.5):
                direct = 1.0
                for j in range(m):
                    direct *= x + j
                series = sum(abs(stirling_first(m, k)) * x ** k
                             for k in range(m + 1))
                assert series == pytest.approx(direct, rel=1e-12, abs=1e-12)

    def test_bound(self):
        table = StirlingTable(n_max=10)
        with pytest.raises(BoundError):
            table.value(11, 3)


class TestCompensatedSum:
    def test_exact_cancellation(self):
        terms = [SignedLogReal.from_float(1.0), SignedLogReal.from_float(-1.0)]
        total, ratio = compensated_sum(terms)
        assert total == 0.0 and ratio == 0.0

    def test_single_term(self):
        total, ratio = compensated_sum([SignedLogReal.from_float(1.875)])
        assert total == pytest.approx(1.875)
        assert ratio == pytest.approx(1.0)

    def test_alternating_series_inverse_e(self):
        terms = [SignedLogReal.from_float((-1.0) ** k / math.factorial(k))
                 for k in range(21)]
        total, _ = compensated_sum(terms)
        assert abs(total - math.exp(-1.0)) <= 1e-15


def _cancellation_ratio(n, q, alpha):
    """|S| / max|term| of the reduced alternating sum, from float terms."""
    terms = []
    for k in range(q):
        poch = pochhammer_int(1.0 - alpha - alpha * k, n - 1)
        if poch.sign == 0:
            continue
        terms.append(SignedLogReal(
            poch.sign * (-1 if k % 2 else 1),
            poch.log_magnitude - math.lgamma(k + 1.0) - math.lgamma(q - k)))
    if not terms:
        return 1.0
    return compensated_sum(terms)[1]


class TestSumTerm:
    def test_base_cases(self):
        for alpha in (0.2, 0.5, 1.0):
            assert sum_term(0, 0, alpha) == 1.0
        assert sum_term(1, 1, 0.5) == pytest.approx(0.5)
        assert sum_term(2, 1, 0.5) == pytest.approx(0.25)

    def test_zero_beyond_support(self):
        assert sum_term(1, 2, 0.5) == 0.0
        assert sum_term(0, 3, 0.3) == 0.0
        assert sum_term(5, 0, 0.5) == 0.0
        assert sum_term(0, 0, 0.7) == 1.0

    def test_reduced_equals_defining_sum(self):
        # defining form: sum_k (-1)^k (-alpha k)_n / (k! (q-k)!)
        for alpha in (0.3, 0.5, 0.75):
            for n in range(1, 12):
                for q in range(1, n + 1):
                    ref = mpmath.mpf(0)
                    with mpmath.workprec(200):
                        a = mpmath.mpf(alpha)
                        for k in range(q + 1):
                            x = -a * k
                            if x == int(x) and x <= 0 and x + n - 1 >= 0:
                                continue
                            ref += ((-1) ** k * mpmath.rf(x, n)
                                    / (mpmath.factorial(k)
                                       * mpmath.factorial(q - k)))
                        ref = float(ref)
                    assert sum_term(n, q, alpha) == pytest.approx(
                        ref, rel=1e-10, abs=1e-14)

    def test_default_policy_matches_forced_escalation(self):
        # the default evaluation (whatever route it picks) must agree with a
        # forced extended-precision evaluation to relative 1e-9
        force_mp = PrecisionPolicy(cancellation_threshold=0.999999)
        default = PrecisionPolicy()
        checked = 0
        for n in (10, 25, 40, 60):
            for q in range(1, n + 1, 3):
                got = sum_term_signed(n, q, 0.5, default)
                ref = sum_term_signed(n, q, 0.5, force_mp)
                if ref.sign == 0:
                    assert got.sign == 0
                    continue
                checked += 1
                assert got.sign == ref.sign
                assert got.log_magnitude == pytest.approx(
                    ref.log_magnitude, abs=1e-9)
        assert checked > 20

    def test_domain(self):
        with pytest.raises(DomainError):
            sum_term(3, 1, 0.0)
        with pytest.raises(DomainError):
            sum_term(-1, 0, 0.5)
