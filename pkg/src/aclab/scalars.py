"""Exact scalars: rationals, Gaussian rationals, heights and divisor counts.

Rationals are plain :class:`fractions.Fraction` values (always reduced, with a
positive denominator).  :class:`GaussianRational` pairs two of them.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

from .errors import EmptyGenerator, InvalidArgument, ParseError

Rational = Fraction
Number = Union[int, Fraction, "GaussianRational"]

__all__ = [
    "Rational",
    "GaussianRational",
    "as_rational",
    "as_gaussian",
    "height",
    "gaussian_height",
    "gcd_all",
    "divisor_count",
    "format_rational",
    "parse_rational",
    "parse_gaussian",
    "gaussian_to_json",
    "gaussian_from_json",
    "iroot",
    "radical_sign",
    "power_at_least",
]


def as_rational(x) -> Fraction:
    """Coerce int / Fraction / "p/q" text to a Fraction; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidArgument("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, GaussianRational):
        if x.im:
            raise InvalidArgument(f"{x} is not real")
        return x.re
    if isinstance(x, float):
        raise InvalidArgument("floating-point input is not accepted; use 'p/q' text")
    # numpy integers and similar
    try:
        return Fraction(int(x)) if int(x) == x else Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"cannot interpret {x!r} as a rational") from exc


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts.  Immutable."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", as_rational(re))
        object.__setattr__(self, "im", as_rational(im))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, str):
            return parse_gaussian(x)
        if isinstance(x, complex):
            raise InvalidArgument("floating-point complex input is not accepted")
        return cls(as_rational(x), 0)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def is_integer(self) -> bool:
        return self.re.denominator == 1 and self.im.denominator == 1

    def __bool__(self):
        return not self.is_zero()

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        if not o.im and not self.im:
            return GaussianRational(self.re * o.re, 0)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero GaussianRational")
        if not o.im:
            return GaussianRational(self.re / o.re, self.im / o.re)
        den = o.re * o.re + o.im * o.im
        return GaussianRational((self.re * o.re + self.im * o.im) / den,
                                (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return o / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # -- comparison / hashing ----------------------------------------------
    def __eq__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        h = self._hash
        if h is None:
            # agree with hash(Fraction) for real values so that mixed dict keys work
            h = hash(self.re) if not self.im else hash((self.re, self.im))
            object.__setattr__(self, "_hash", h)
        return h

    def sort_key(self):
        return (self.re, self.im)

    def __lt__(self, other):
        o = _maybe(other)
        if o is None:
            return NotImplemented
        return self.sort_key() < o.sort_key()

    def __repr__(self):
        return f"GaussianRational({format_gaussian(self)!r})"

    def __str__(self):
        return format_gaussian(self)

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))


def _maybe(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return GaussianRational(x, 0)
    return None


def as_gaussian(x) -> GaussianRational:
    return GaussianRational.coerce(x)


# ---------------------------------------------------------------------------
# text / JSON encodings

_RAT = r"\d+(?:/\d+)?"
_REAL_RE = re.compile(rf"^[+-]?{_RAT}$")
_IMAG_RE = re.compile(rf"^([+-]?)({_RAT})?[ij]$")
_CPLX_RE = re.compile(rf"^([+-]?{_RAT})([+-])({_RAT})?[ij]$")


def parse_rational(text: str) -> Fraction:
    s = text.strip().replace(" ", "")
    if not _REAL_RE.match(s):
        raise ParseError(f"not a rational literal: {text!r}")
    try:
        return Fraction(s)
    except ZeroDivisionError as exc:
        raise ParseError(f"zero denominator in {text!r}") from exc


def format_rational(x: Fraction) -> str:
    x = as_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_gaussian(text: str) -> GaussianRational:
    """Parse ``"p/q"``, ``"3i"``, ``"-i"`` or ``"1/2-3/4i"``."""
    s = text.strip().replace(" ", "")
    try:
        if _REAL_RE.match(s):
            return GaussianRational(Fraction(s), 0)
        m = _IMAG_RE.match(s)
        if m:
            mag = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            return GaussianRational(0, -mag if m.group(1) == "-" else mag)
        m = _CPLX_RE.match(s)
        if m:
            mag = Fraction(m.group(3)) if m.group(3) else Fraction(1)
            return GaussianRational(Fraction(m.group(1)), -mag if m.group(2) == "-" else mag)
    except ZeroDivisionError as exc:
        raise ParseError(f"zero denominator in {text!r}") from exc
    raise ParseError(f"not a Gaussian rational literal: {text!r}")


def format_gaussian(z: GaussianRational) -> str:
    if not z.im:
        return format_rational(z.re)
    im = z.im
    mag = "" if abs(im) == 1 else format_rational(abs(im))
    if not z.re:
        return ("-" if im < 0 else "") + mag + "i"
    return format_rational(z.re) + ("-" if im < 0 else "+") + mag + "i"


def gaussian_to_json(z) -> dict:
    z = as_gaussian(z)
    out = {"re": format_rational(z.re)}
    if z.im:
        out["im"] = format_rational(z.im)
    return out


def gaussian_from_json(obj) -> GaussianRational:
    """Inverse of :func:`gaussian_to_json`; bare ints and strings also accepted."""
    if isinstance(obj, dict):
        extra = set(obj) - {"re", "im"}
        if extra:
            raise ParseError(f"unexpected keys {sorted(extra)} in Gaussian rational")
        return GaussianRational(_rat_json(obj.get("re", 0)), _rat_json(obj.get("im", 0)))
    if isinstance(obj, str):
        return parse_gaussian(obj)
    if isinstance(obj, int) and not isinstance(obj, bool):
        return GaussianRational(obj)
    raise ParseError(f"cannot decode Gaussian rational from {obj!r}")


def _rat_json(v) -> Fraction:
    if isinstance(v, str):
        return parse_rational(v)
    if isinstance(v, int) and not isinstance(v, bool):
        return Fraction(v)
    raise ParseError(f"cannot decode rational from {v!r}")


# ---------------------------------------------------------------------------
# number theory

def height(f) -> int:
    """max(|numerator|, denominator) of the reduced fraction."""
    f = as_rational(f)
    return max(abs(f.numerator), f.denominator)


def gaussian_height(z) -> int:
    z = as_gaussian(z)
    return max(height(z.re), height(z.im))


def gcd_all(values: Iterable) -> Fraction:
    """Positive generator of the additive group spanned by rational values.

    >>> gcd_all([Fraction(1, 2), Fraction(1, 3)])
    Fraction(1, 6)
    """
    vals = [as_rational(v) for v in values]
    nz = [v for v in vals if v]
    if not nz:
        raise EmptyGenerator("gcd of an all-zero family is undefined")
    den = reduce(math.lcm, (v.denominator for v in nz), 1)
    num = reduce(math.gcd, (abs(v.numerator * (den // v.denominator)) for v in nz), 0)
    return Fraction(num, den)


def divisor_count(n: int) -> int:
    if n < 1:
        raise InvalidArgument("divisor_count needs n >= 1")
    count = 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        count *= e + 1
        p += 1 if p == 2 else 2
    if n > 1:
        count *= 2
    return count


# ---------------------------------------------------------------------------
# exact comparisons against powers r**e with rational e

def iroot(x: int, k: int) -> int:
    """floor(x ** (1/k)) for x >= 0."""
    if x < 0 or k < 1:
        raise InvalidArgument("iroot needs x >= 0, k >= 1")
    if x < 2:
        return x
    y = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        z = ((k - 1) * y + x // y ** (k - 1)) // k
        if z >= y:
            break
        y = z
    while y ** k > x:
        y -= 1
    while (y + 1) ** k <= x:
        y += 1
    return y


def power_at_least(value: Fraction, base: int, exponent: Fraction) -> bool:
    """Exact test of ``value >= base ** exponent`` for value >= 0, base >= 1."""
    value = as_rational(value)
    exponent = as_rational(exponent)
    if value < 0:
        return False
    p, q = exponent.numerator, exponent.denominator
    # value**q >= base**p
    lhs = value ** q
    if p >= 0:
        return lhs >= base ** p
    return lhs * base ** (-p) >= 1


def radical_sign(terms: Sequence[tuple], base: int, max_bits: int = 8192) -> int:
    """Sign of ``sum(c * base**e for c, e in terms)`` for rational c, e and base >= 1.

    Exact when every ``base**e`` is rational; otherwise decided by rigorous
    interval refinement of ``t = base**(1/N)``.  A value that stays
    undecided at ``max_bits`` of precision is reported as 0.
    """
    if base < 1:
        raise InvalidArgument("base must be >= 1")
    merged: dict[Fraction, Fraction] = {}
    for c, e in terms:
        c, e = as_rational(c), as_rational(e)
        if c:
            merged[e] = merged.get(e, Fraction(0)) + c
    merged = {e: c for e, c in merged.items() if c}
    if not merged:
        return 0
    if base == 1:
        s = sum(merged.values())
        return (s > 0) - (s < 0)
    N = reduce(math.lcm, (e.denominator for e in merged), 1)
    powers = {int(e * N): c for e, c in merged.items()}
    kmin = min(powers)
    poly = {k - kmin: c for k, c in powers.items()}
    t = iroot(base, N)
    if t ** N == base:
        s = sum(c * Fraction(t) ** k for k, c in poly.items())
        return (s > 0) - (s < 0)
    bits = 64
    while bits <= max_bits:
        S = 1 << bits
        lo = iroot(base * S ** N, N)
        hi = lo + 1
        tlo, thi = Fraction(lo, S), Fraction(hi, S)
        low = high = Fraction(0)
        for k, c in poly.items():
            a, b = tlo ** k, thi ** k
            if c > 0:
                low += c * a
                high += c * b
            else:
                low += c * b
                high += c * a
        if low > 0:
            return 1
        if high < 0:
            return -1
        bits *= 2
    return 0
