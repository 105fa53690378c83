from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from aclab import oracle
from aclab.errors import ParseError
from aclab.scalars import (GaussianRational, divisor_count, format_gaussian, format_rational, gcd_all,
                           gaussian_from_json, gaussian_to_json, height, iroot, parse_gaussian,
                           parse_rational, power_at_least, radical_sign)

fractions = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 1000)
gaussians = st.builds(GaussianRational, fractions, fractions)


def test_parse_and_format_rationals():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational("-4") == -4
    assert format_rational(Fraction(-2, 4)) == "-1/2"
    with pytest.raises(ParseError):
        parse_rational("1/0")
    with pytest.raises(ParseError):
        parse_rational("abc")


@given(gaussians)
def test_gaussian_text_and_json_roundtrip(z):
    assert parse_gaussian(format_gaussian(z)) == z
    assert gaussian_from_json(gaussian_to_json(z)) == z


@given(gaussians, gaussians, gaussians)
def test_gaussian_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if not b.is_zero():
        assert (a / b) * b == a


def test_gaussian_equals_plain_numbers():
    assert GaussianRational(3) == 3
    assert hash(GaussianRational(Fraction(1, 2))) == hash(Fraction(1, 2))
    assert GaussianRational(0, 1) * GaussianRational(0, 1) == -1


def test_gcd_all_examples():
    assert gcd_all([Fraction(1, 2), Fraction(1, 3)]) == Fraction(1, 6)
    assert gcd_all([4, 6, 0]) == 2


@given(st.lists(fractions.filter(lambda f: f != 0), min_size=1, max_size=6))
def test_gcd_all_divides_every_value(values):
    g = gcd_all(values)
    assert g > 0
    assert all((v / g).denominator == 1 for v in values)
    # largest: the quotients share no common factor
    assert gcd_all([v / g for v in values]) == 1


@given(st.integers(1, 3000))
def test_divisor_count_matches_scan(n):
    assert divisor_count(n) == oracle.divisor_count(n)


@given(st.integers(1, 400), st.integers(1, 400))
def test_divisor_count_is_multiplicative_on_coprimes(a, b):
    from math import gcd
    if gcd(a, b) == 1:
        assert divisor_count(a * b) == divisor_count(a) * divisor_count(b)


@given(fractions)
def test_height(f):
    assert height(f) == oracle.height(f)
    assert height(f) >= 1 or f == 0


@given(st.integers(0, 10**12), st.integers(1, 5))
def test_iroot_is_floor_root(x, k):
    r = iroot(x, k)
    assert r ** k <= x < (r + 1) ** k


@given(st.fractions(min_value=Fraction(1, 30), max_value=100, max_denominator=30),
       st.integers(2, 50), st.fractions(min_value=-2, max_value=2, max_denominator=8))
def test_power_at_least_agrees_with_floats_away_from_ties(value, base, exp):
    got = power_at_least(value, base, exp)
    lhs, rhs = float(value), base ** float(exp)
    if abs(lhs - rhs) > 1e-9 * max(lhs, rhs):
        assert got == (lhs >= rhs)


def test_power_at_least_exact_ties():
    assert power_at_least(Fraction(2), 4, Fraction(1, 2))
    assert not power_at_least(Fraction(2) - Fraction(1, 10**30), 4, Fraction(1, 2))


def test_radical_sign_exact():
    # sqrt(2) - 1 > 0 ; 1 - sqrt(4) < 0 ; 2 - sqrt(4) == 0
    assert radical_sign([(Fraction(1), Fraction(1, 2)), (Fraction(-1), Fraction(0))], 2) == 1
    assert radical_sign([(Fraction(1), Fraction(0)), (Fraction(-1), Fraction(1, 2))], 4) == -1
    assert radical_sign([(Fraction(2), Fraction(0)), (Fraction(-1), Fraction(1, 2))], 4) == 0
