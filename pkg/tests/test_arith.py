"""Unit tests for continued fractions and number-theoretic helpers."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qws import arith


class TestContinuedFractions:
    def test_golden_ratio_coefficients_are_ones(self):
        phi = (1 + math.sqrt(5)) / 2
        coeffs = list(arith.continued_fraction(phi, max_terms=10))
        assert coeffs == [1] * 10

    def test_convergents_of_sqrt2(self):
        coeffs = list(arith.continued_fraction(math.sqrt(2), max_terms=5))
        assert coeffs == [1, 2, 2, 2, 2]
        assert list(arith.convergents(coeffs)) == [(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]

    def test_rational_input_terminates(self):
        assert list(arith.continued_fraction(3.25)) == [3, 4]

    @given(st.integers(-50, 50), st.integers(1, 200))
    def test_rationalize_recovers_small_fractions(self, p, q):
        assert arith.rationalize(p / q) == Fraction(p, q)

    def test_rationalize_respects_denominator_bound(self):
        assert arith.rationalize(math.pi, max_denominator=100, tol=1e-8) is None
        assert arith.rationalize(math.pi, max_denominator=100, tol=1e-2) == Fraction(22, 7)

    @given(st.integers(-50, 50), st.integers(1, 200))
    def test_scaled_rationalize_recovers_small_fractions(self, p, q):
        assert arith.rationalize(p / q, scaled=True) == Fraction(p, q)

    @pytest.mark.parametrize("x", [math.sqrt(2) - 1, (math.sqrt(5) - 1) / 2, math.pi])
    def test_scaled_rationalize_rejects_irrationals(self, x):
        # a fixed residual bound is met by a convergent with q around 10^4
        assert arith.rationalize(x) is not None
        assert arith.rationalize(x, scaled=True) is None

    def test_scaled_real_gcd(self):
        assert arith.real_gcd([2.0, 3.0], scaled=True) == pytest.approx(1.0)
        assert arith.real_gcd([1.0, (1 + math.sqrt(5)) / 2], scaled=True) is None

    def test_rationalize_rejects_non_finite(self):
        assert arith.rationalize(float("nan")) is None
        assert arith.rationalize(float("inf")) is None


class TestIntegers:
    @pytest.mark.parametrize(
        "n,expected",
        [(1, (1, 1)), (8, (2, 2)), (12, (3, 2)), (45, (5, 3)), (49, (1, 7)), (30, (30, 1))],
    )
    def test_squarefree_decomposition(self, n, expected):
        assert arith.squarefree_decomposition(n) == expected

    def test_squarefree_decomposition_rejects_zero(self):
        with pytest.raises(ValueError):
            arith.squarefree_decomposition(0)

    def test_nearest_integer(self):
        assert arith.nearest_integer(2.0000000001, 1e-8) == 2
        assert arith.nearest_integer(2.1, 1e-8) is None

    def test_perfect_squares_and_lcm(self):
        assert arith.is_perfect_square(144)
        assert not arith.is_perfect_square(145)
        assert not arith.is_perfect_square(-4)
        assert arith.lcm([4, 6, 10]) == 60

    def test_real_gcd(self):
        g = arith.real_gcd([2 * math.sqrt(5), 3 * math.sqrt(5)])
        assert g == pytest.approx(math.sqrt(5))
        assert arith.real_gcd([4.0, 6.0, 0.0]) == pytest.approx(2.0)
        assert arith.real_gcd([1.0, math.pi], max_denominator=1000) is None
        assert arith.real_gcd([0.0]) is None

    def test_fibonacci(self):
        assert list(arith.fibonacci(8)) == [0, 1, 1, 2, 3, 5, 8, 13]
