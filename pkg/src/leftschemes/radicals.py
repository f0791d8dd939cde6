"""Exact arithmetic over real quadratic radicals.

Values are finite sums q0 + sum_i qi*sqrt(di) with rational coefficients and
squarefree radicands. The canonical form (no zero coefficients, radicands
squarefree) makes equality a dictionary comparison; square roots of distinct
squarefree integers are linearly independent over Q, so a nonzero canonical
form never evaluates to zero and signs can be decided by refining verified
integer-sqrt enclosures.
"""
from __future__ import annotations

import functools
from fractions import Fraction
from math import gcd, isqrt
from typing import Union

Rational = Union[int, Fraction]

_SIGN_PREC_CAP = 1 << 14


@functools.lru_cache(maxsize=None)
def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (u, d) with n == u*u*d and d squarefree, for n >= 1."""
    if n < 1:
        raise ValueError("radicand must be a positive integer, got %r" % (n,))
    u, d = 1, 1
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            u *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    d *= m
    return u, d


def sqrt_bounds(d: int, prec: int) -> tuple[Fraction, Fraction]:
    """Enclosure of sqrt(d) with width 2**-prec, as exact fractions."""
    s = isqrt(d << (2 * prec))
    return Fraction(s, 1 << prec), Fraction(s + 1, 1 << prec)


def frac_sqrt_bounds(x: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Enclosure of sqrt(x) for a nonnegative fraction x."""
    if x < 0:
        raise ValueError("cannot take sqrt of negative value %s" % x)
    a, b = x.numerator, x.denominator
    s = isqrt((a * b) << (2 * prec))
    return Fraction(s, b << prec), Fraction(s + 1, b << prec)


class Rad:
    """An exact real number sum_d coeff[d]*sqrt(d) over squarefree d >= 1."""

    __slots__ = ("_t",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self._t: dict[int, Fraction] = {}
        if terms:
            for d, c in terms.items():
                if c:
                    self._t[d] = Fraction(c)

    @staticmethod
    def rational(q: Rational) -> "Rad":
        return Rad({1: Fraction(q)})

    @staticmethod
    def sqrt(n: int) -> "Rad":
        """sqrt(n) for a positive integer n, reduced to canonical form."""
        u, d = squarefree_decompose(n)
        return Rad({d: Fraction(u)})

    @staticmethod
    def inv_sqrt(n: int) -> "Rad":
        """1/sqrt(n) == sqrt(n)/n for a positive integer n."""
        u, d = squarefree_decompose(n)
        return Rad({d: Fraction(1, u * d)})

    def terms(self) -> list[tuple[int, Fraction]]:
        return sorted(self._t.items())

    @property
    def is_zero(self) -> bool:
        return not self._t

    @property
    def is_rational(self) -> bool:
        return all(d == 1 for d in self._t)

    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("value %s is irrational" % self)
        return self._t.get(1, Fraction(0))

    def rational_part(self) -> Fraction:
        return self._t.get(1, Fraction(0))

    @staticmethod
    def _coerce(other) -> "Rad":
        if isinstance(other, Rad):
            return other
        if isinstance(other, (int, Fraction)):
            return Rad.rational(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        o = Rad._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        t = dict(self._t)
        for d, c in o._t.items():
            t[d] = t.get(d, Fraction(0)) + c
        return Rad(t)

    __radd__ = __add__

    def __neg__(self):
        return Rad({d: -c for d, c in self._t.items()})

    def __sub__(self, other):
        o = Rad._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return Rad._coerce(other) - self

    def __mul__(self, other):
        o = Rad._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        t: dict[int, Fraction] = {}
        for d1, c1 in self._t.items():
            for d2, c2 in o._t.items():
                # sqrt(d1)*sqrt(d2) == g*sqrt((d1/g)*(d2/g)) with g = gcd:
                # both factors squarefree keeps the product squarefree.
                g = gcd(d1, d2)
                d = (d1 // g) * (d2 // g)
                t[d] = t.get(d, Fraction(0)) + c1 * c2 * g
        return Rad(t)

    __rmul__ = __mul__

    def inverse(self) -> "Rad":
        """Multiplicative inverse; supported for at most two terms."""
        items = self.terms()
        if not items:
            raise ZeroDivisionError("inverse of zero")
        if len(items) == 1:
            d, c = items[0]
            # 1/(c*sqrt(d)) == sqrt(d)/(c*d)
            return Rad({d: Fraction(1, 1) / (c * d)})
        if len(items) == 2 and items[0][0] == 1:
            (_, a), (d, b) = items
            den = a * a - b * b * d
            if den == 0:
                raise ZeroDivisionError("inverse of zero")
            return Rad({1: a / den, d: -b / den})
        raise NotImplementedError("inverse only implemented for <= 2 terms")

    def __eq__(self, other):
        o = Rad._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._t == o._t

    def __hash__(self):
        return hash(tuple(self.terms()))

    def interval(self, prec: int) -> tuple[Fraction, Fraction]:
        lo = Fraction(0)
        hi = Fraction(0)
        for d, c in self._t.items():
            if d == 1:
                lo += c
                hi += c
                continue
            slo, shi = sqrt_bounds(d, prec)
            if c >= 0:
                lo += c * slo
                hi += c * shi
            else:
                lo += c * shi
                hi += c * slo
        return lo, hi

    def sign(self) -> int:
        """Exact sign in {-1, 0, 1}."""
        if not self._t:
            return 0
        if self.is_rational:
            c = self._t[1]
            return (c > 0) - (c < 0)
        prec = 8
        while prec <= _SIGN_PREC_CAP:
            lo, hi = self.interval(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
        # Unreachable for canonical nonzero forms; kept as a hard stop.
        raise ArithmeticError("sign undecided at precision cap for %s" % self)

    def _cmp(self, other) -> int:
        o = Rad._coerce(other)
        if o is NotImplemented:
            raise TypeError("cannot compare Rad with %r" % (other,))
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        lo, hi = self.interval(64)
        return float((lo + hi) / 2)

    def __repr__(self):
        if not self._t:
            return "Rad(0)"
        parts = []
        for d, c in self.terms():
            parts.append(str(c) if d == 1 else "%s*sqrt(%d)" % (c, d))
        return "Rad(%s)" % " + ".join(parts)

    def __str__(self):
        return repr(self)[4:-1]


RAD_ZERO = Rad()
RAD_ONE = Rad.rational(1)


def exp_bounds(x: Fraction, terms: int) -> tuple[Fraction, Fraction]:
    """Two-sided enclosure of exp(x) for x >= 0 via the Taylor series.

    The tail after N terms is bounded by t_N * 1/(1 - x/N) once N > x,
    where t_N is the first omitted term.
    """
    if x < 0:
        raise ValueError("exp_bounds expects x >= 0")
    n = max(terms, int(x) * 2 + 4)
    total = Fraction(0)
    t = Fraction(1)
    for k in range(n):
        total += t
        t = t * x / (k + 1)
    # t is now x**n/n! and n > x by choice of n.
    tail = t / (1 - x / n)
    return total, total + tail


def exp_lt(x: Fraction, bound: Fraction) -> bool:
    """Exactly decide exp(x) < bound for rational x >= 0 and rational bound.

    exp(x) is irrational for rational x != 0, so refinement terminates.
    """
    if bound <= 0:
        return False
    if x == 0:
        return Fraction(1) < bound
    n = 8
    while True:
        lo, hi = exp_bounds(x, n)
        if hi < bound:
            return True
        if lo > bound:
            return False
        n *= 2
        if n > 1 << 12:
            raise ArithmeticError("exp comparison undecided: exp(%s) vs %s" % (x, bound))
