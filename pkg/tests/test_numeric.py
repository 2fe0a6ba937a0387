import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rgvss.numeric import (
    NegativeRatioError,
    Ratio,
    add,
    binom,
    div,
    mul,
    parse_ratio,
    ratio,
    sub,
    to_decimal_str,
)

small = st.builds(ratio, st.integers(0, 500), st.integers(1, 500))


def test_ratio_reduces():
    r = ratio(15, 96)
    assert (r.numerator, r.denominator) == (5, 32)


def test_ratio_value_equal_to_unreduced_print():
    # 6/105 as printed for (2,4), t=3
    assert ratio(6, 105) == Fraction(6, 105)
    assert (ratio(6, 105).numerator, ratio(6, 105).denominator) == (2, 35)


def test_ratio_zero_is_canonical():
    z = ratio(0, 7)
    assert (z.numerator, z.denominator) == (0, 1)
    assert z.fraction_str == "0/1"


def test_ratio_errors():
    with pytest.raises(ZeroDivisionError):
        ratio(1, 0)
    with pytest.raises(NegativeRatioError):
        ratio(-1, 3)
    with pytest.raises(NegativeRatioError):
        ratio(1, -3)


def test_arithmetic_examples():
    assert add(ratio(7, 24), ratio(5, 24)) == ratio(1, 2)
    assert sub(ratio(7, 24), ratio(5, 24)) == ratio(1, 12)
    assert div(ratio(1, 12), ratio(29, 24)) == ratio(2, 29)
    assert mul(ratio(2, 3), ratio(3, 4)) == ratio(1, 2)


def test_sub_negative_is_an_error():
    with pytest.raises(NegativeRatioError):
        sub(ratio(5, 24), ratio(7, 24))
    with pytest.raises(NegativeRatioError):
        ratio(1, 3) - 1


def test_div_by_zero():
    with pytest.raises(ZeroDivisionError):
        div(ratio(1, 2), ratio(0, 1))


def test_results_stay_ratio():
    r = ratio(1, 2)
    for value in (r + r, r * r, r / r, 1 - r, 2 * r, r**3, r - ratio(1, 4)):
        assert isinstance(value, Ratio)


def test_binom():
    assert binom(3, 2) == 3
    assert binom(5, 0) == 1
    assert binom(4, 6) == 0
    assert binom(4, -1) == 0


@pytest.mark.parametrize("n", range(21))
def test_binom_row_sums(n):
    assert sum(binom(n, k) for k in range(n + 1)) == 2**n
    assert all(binom(n, k) == binom(n, n - k) for k in range(n + 1))


def test_big_terms_do_not_overflow():
    big = ratio(binom(200, 100), 2**199)
    assert big * big == Fraction(binom(200, 100) ** 2, 2**398)


@given(small, small)
def test_reduced_after_ops(a, b):
    for r in (a + b, a * b):
        assert math.gcd(r.numerator, r.denominator) == 1
    if b:
        assert math.gcd((a / b).numerator, (a / b).denominator) == 1


@given(small, small, small)
def test_add_mul_commutative_associative(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)


def test_rendering():
    assert str(ratio(2, 29)) == "2/29"
    assert str(ratio(0, 5)) == "0"
    assert to_decimal_str(ratio(2, 29)) == "0.0689655"
    assert to_decimal_str(ratio(1, 4)) == "0.25"
    assert to_decimal_str(ratio(2, 3), digits=3) == "0.667"
    assert to_decimal_str(ratio(0, 1)) == "0"


def test_parse_ratio():
    assert parse_ratio("9/96") == ratio(3, 32)
    assert parse_ratio(" 4 ") == 4
    with pytest.raises(ValueError):
        parse_ratio("a/b")
