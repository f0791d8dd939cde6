"""Exact radical arithmetic, certified comparisons, exp enclosures."""
from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from leftschemes import Rad, exp_bounds, exp_lt, sqrt_bounds
from leftschemes.radicals import frac_sqrt_bounds, squarefree_decompose

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=64)
radicands = st.integers(min_value=1, max_value=500)


def test_squarefree_decompose():
    assert squarefree_decompose(1) == (1, 1)
    assert squarefree_decompose(8) == (2, 2)
    assert squarefree_decompose(12) == (2, 3)
    assert squarefree_decompose(49) == (7, 1)
    assert squarefree_decompose(360) == (6, 10)
    with pytest.raises(ValueError):
        squarefree_decompose(0)


@given(radicands)
def test_squarefree_reconstructs(n):
    u, d = squarefree_decompose(n)
    assert u * u * d == n
    for p in range(2, 23):
        assert d % (p * p) != 0


def test_rad_canonical_form():
    assert Rad.sqrt(8) == Rad.rational(2) * Rad.sqrt(2)
    assert Rad.sqrt(9) == Rad.rational(3)
    assert Rad.inv_sqrt(4).rational_value() == Fraction(1, 2)
    # 1/sqrt(2) = sqrt(2)/2
    assert Rad.inv_sqrt(2) == Rad.sqrt(2) * Rad.rational(Fraction(1, 2))


def test_rad_arithmetic_identities():
    r2 = Rad.sqrt(2)
    one = Rad.rational(1)
    assert (one + r2) * (one + r2) == Rad.rational(3) + Rad.rational(2) * r2
    assert r2 * Rad.sqrt(8) == Rad.rational(4)
    assert Rad.sqrt(6) == r2 * Rad.sqrt(3)
    assert ((one + r2) * (one - r2)).rational_value() == Fraction(-1)


def test_rad_certified_order():
    # sqrt(2) + sqrt(3) > sqrt(5) + 1/10, decided exactly.
    lhs = Rad.sqrt(2) + Rad.sqrt(3)
    rhs = Rad.sqrt(5) + Rad.rational(Fraction(1, 10))
    assert rhs <= lhs
    assert not lhs <= rhs
    assert Rad.inv_sqrt(5) <= Rad.inv_sqrt(4)


def test_rad_str_and_float():
    v = Rad.rational(Fraction(3, 4)) + Rad.inv_sqrt(2)
    assert str(v) == "3/4 + 1/2*sqrt(2)"
    assert math.isclose(float(v), 0.75 + 0.5 * math.sqrt(2))


@given(rationals, rationals)
def test_rad_rational_embedding(a, b):
    assert (Rad.rational(a) + Rad.rational(b)).rational_value() == a + b
    assert (Rad.rational(a) * Rad.rational(b)).rational_value() == a * b


@given(radicands)
def test_sqrt_square_roundtrip(n):
    s = Rad.sqrt(n)
    assert (s * s).rational_value() == n


@given(radicands, st.integers(min_value=4, max_value=40))
def test_sqrt_bounds_enclose(n, prec):
    lo, hi = sqrt_bounds(n, prec)
    assert lo * lo <= n <= hi * hi
    assert hi - lo == Fraction(1, 1 << prec)


def test_frac_sqrt_bounds():
    lo, hi = frac_sqrt_bounds(Fraction(1, 2), 30)
    assert lo * lo <= Fraction(1, 2) <= hi * hi
    with pytest.raises(ValueError):
        frac_sqrt_bounds(Fraction(-1, 2), 10)


@given(rationals, rationals)
def test_rad_order_total_on_rationals(a, b):
    ra, rb = Rad.rational(a), Rad.rational(b)
    assert (ra <= rb) == (a <= b)


def test_exp_bounds_enclose():
    for x in (Fraction(0), Fraction(1), Fraction(1, 2), Fraction(7, 3)):
        lo, hi = exp_bounds(x, 16)
        assert lo <= hi
        assert float(lo) <= math.exp(float(x)) <= float(hi)
    with pytest.raises(ValueError):
        exp_bounds(Fraction(-1), 8)


def test_exp_lt_decides():
    assert exp_lt(Fraction(1, 2), Fraction(2))          # e^0.5 ~ 1.6487
    assert not exp_lt(Fraction(8, 9), Fraction(2))      # e^(8/9) ~ 2.4325
    assert exp_lt(Fraction(0), Fraction(2))
    assert not exp_lt(Fraction(0), Fraction(1))
    assert not exp_lt(Fraction(1), Fraction(-3))
