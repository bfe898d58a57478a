import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.errors import DomainError, UsageError
from src.exact_core import (
    RationalInterval,
    format_fraction,
    format_interval,
    parse_fraction,
    parse_fraction_list,
    rational_sqrt,
    sqrt_enclosure,
    to_rational,
)

fractions = st.fractions(max_denominator=1 << 16)


def test_parse_fraction_accepts_signed_ratios_and_integers():
    assert parse_fraction("3/5") == Fraction(3, 5)
    assert parse_fraction("-7/21") == Fraction(-1, 3)
    assert parse_fraction(" +4 ") == Fraction(4)


@pytest.mark.parametrize("text", ["0.1", "1/0", "", "a/b", "1/-2", "1e3"])
def test_parse_fraction_rejects_malformed_text(text):
    with pytest.raises(UsageError):
        parse_fraction(text)


def test_parse_fraction_list_splits_on_commas():
    assert parse_fraction_list("1/2,-1/3,0") == [Fraction(1, 2), Fraction(-1, 3), Fraction(0)]
    with pytest.raises(UsageError):
        parse_fraction_list(",")


def test_to_rational_refuses_floats_and_bools():
    with pytest.raises(UsageError):
        to_rational(0.5)
    with pytest.raises(UsageError):
        to_rational(True)
    assert to_rational("2/4") == Fraction(1, 2)


def test_format_fraction_is_canonical():
    assert format_fraction(Fraction(6, -4)) == "-3/2"
    assert format_fraction(Fraction(8, 4)) == "2"


def test_rational_sqrt_detects_squares():
    assert rational_sqrt(Fraction(16, 25)) == Fraction(4, 5)
    assert rational_sqrt(0) == 0
    assert rational_sqrt(2) is None
    with pytest.raises(DomainError):
        rational_sqrt(-1)


def _assert_canonical(x: Fraction):
    assert x.denominator > 0
    assert math.gcd(x.numerator, x.denominator) == 1
    assert parse_fraction(format_fraction(x)) == x


@settings(max_examples=200, derandomize=True)
@given(a=fractions, b=fractions)
def test_field_operations_cancel_and_stay_canonical(a, b):
    total = (a + b) - b
    assert total == a
    _assert_canonical(total)
    if b != 0:
        ratio = (a * b) / b
        assert ratio == a
        _assert_canonical(ratio)


@settings(max_examples=200, derandomize=True)
@given(x=fractions)
def test_rational_sqrt_of_a_square_is_its_absolute_value(x):
    assert rational_sqrt(x * x) == abs(x)


@settings(max_examples=200, derandomize=True)
@given(x=st.fractions(min_value=0, max_denominator=1 << 16))
def test_rational_sqrt_squares_back_when_it_answers(x):
    root = rational_sqrt(x)
    if root is not None:
        assert root * root == x
        assert root >= 0


def test_sqrt_enclosure_of_two():
    enclosure = sqrt_enclosure(2, Fraction(1, 10**6))
    assert enclosure.width <= Fraction(1, 10**6)
    assert enclosure.lo * enclosure.lo < 2 < enclosure.hi * enclosure.hi


def test_sqrt_enclosure_is_degenerate_for_perfect_squares():
    assert sqrt_enclosure(Fraction(9, 4), Fraction(1, 10)) == RationalInterval.point(Fraction(3, 2))


@settings(max_examples=200, derandomize=True)
@given(x=st.fractions(min_value=0, max_value=1000, max_denominator=1 << 12))
def test_sqrt_enclosure_brackets_the_root(x):
    width = Fraction(1, 1 << 20)
    enclosure = sqrt_enclosure(x, width)
    assert enclosure.width <= width
    assert enclosure.lo >= 0
    assert enclosure.lo * enclosure.lo <= x <= enclosure.hi * enclosure.hi


@settings(max_examples=200, derandomize=True)
@given(a=fractions, b=fractions, c=fractions, d=fractions)
def test_interval_arithmetic_contains_pointwise_results(a, b, c, d):
    left = RationalInterval(min(a, b), max(a, b))
    right = RationalInterval(min(c, d), max(c, d))
    for x in (left.lo, left.mid, left.hi):
        for y in (right.lo, right.mid, right.hi):
            assert (left + right).contains(x + y)
            assert (left - right).contains(x - y)
            assert (left * right).contains(x * y)
            assert left.square().contains(x * x)


def test_reciprocal_of_interval_containing_zero_fails():
    with pytest.raises(DomainError):
        RationalInterval(-1, 1).reciprocal()
    assert RationalInterval(2, 4).reciprocal() == RationalInterval(Fraction(1, 4), Fraction(1, 2))


def test_interval_rejects_inverted_endpoints():
    with pytest.raises(DomainError):
        RationalInterval(1, 0)


def test_rounded_out_widens_to_dyadics():
    rounded = RationalInterval(Fraction(1, 3), Fraction(2, 3)).rounded_out(4)
    assert rounded == RationalInterval(Fraction(5, 16), Fraction(11, 16))


def test_format_interval():
    assert format_interval(RationalInterval(Fraction(-1, 2), 3)) == "[-1/2, 3]"
