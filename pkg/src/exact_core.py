"""Exact rational scalars and certified interval enclosures.

Every quantity in the library is a :class:`fractions.Fraction`, which already
keeps itself in canonical form (positive denominator, gcd 1) after each
operation.  Irrational values, in practice square roots arising in norms and
in ``1/sqrt(1 - v**2)``, are carried as :class:`RationalInterval` enclosures
with rational endpoints, so no floating point value ever enters a certified
computation.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Union

from .errors import DomainError, UsageError

logger = logging.getLogger(__name__)

RationalScalar = Fraction
RationalLike = Union[int, str, Fraction]

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)(?:/(\d+))?\s*$")


def parse_fraction(text: str) -> Fraction:
    """Parse ``"p/q"`` (or ``"p"``) with an optional sign.

    Decimal notation is rejected on purpose: ``"0.1"`` is not a fraction.
    """

    match = _FRACTION_RE.match(str(text))
    if not match:
        raise UsageError(f"Malformed fraction {text!r}; expected p/q")
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise UsageError(f"Malformed fraction {text!r}; zero denominator")
    return Fraction(int(match.group(1)), denominator)


def parse_fraction_list(text: str) -> List[Fraction]:
    """Parse a comma separated list such as ``"1/2,-1/3,0"``."""

    parts = [part for part in str(text).split(",") if part.strip()]
    if not parts:
        raise UsageError(f"Expected a comma separated list of fractions, got {text!r}")
    return [parse_fraction(part) for part in parts]


def to_rational(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise UsageError(f"Cannot use {value!r} as an exact rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_fraction(value)
    raise UsageError(f"Cannot use {value!r} as an exact rational")


def format_fraction(value: RationalLike) -> str:
    # Fraction.__str__ already prints "p" when q == 1.
    return str(to_rational(value))


def format_fractions(values: Iterable[RationalLike]) -> List[str]:
    return [format_fraction(v) for v in values]


def rational_sqrt(x: RationalLike) -> Optional[Fraction]:
    """Return ``r`` with ``r*r == x`` when ``x`` is the square of a rational."""

    x = to_rational(x)
    if x < 0:
        raise DomainError(f"rational_sqrt of negative value {x}")
    # Canonical form: x is a square iff numerator and denominator both are.
    num_root = math.isqrt(x.numerator)
    den_root = math.isqrt(x.denominator)
    if num_root * num_root == x.numerator and den_root * den_root == x.denominator:
        return Fraction(num_root, den_root)
    return None


def sqrt_enclosure(x: RationalLike, width: RationalLike) -> "RationalInterval":
    """Certified enclosure of ``sqrt(x)`` no wider than ``width``.

    Perfect squares give the degenerate interval.  Otherwise the bracket
    ``[isqrt(p*q)/q, (isqrt(p*q)+1)/q]`` is refined by bisection, testing each
    midpoint exactly against ``x``.
    """

    x = to_rational(x)
    width = to_rational(width)
    if x < 0:
        raise DomainError(f"sqrt_enclosure of negative value {x}")
    if width <= 0:
        raise DomainError(f"sqrt_enclosure width must be positive, got {width}")

    exact = rational_sqrt(x)
    if exact is not None:
        return RationalInterval(exact, exact)

    num, den = x.numerator, x.denominator
    root = math.isqrt(num * den)
    lo = Fraction(root, den)
    hi = Fraction(root + 1, den)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if mid * mid < x:
            lo = mid
        else:
            hi = mid
    return RationalInterval(lo, hi)


def _as_interval(value: Union["RationalInterval", RationalLike]) -> "RationalInterval":
    if isinstance(value, RationalInterval):
        return value
    return RationalInterval.point(value)


@dataclass(frozen=True)
class RationalInterval:
    """Closed interval ``[lo, hi]`` with rational endpoints.

    Arithmetic is exact on the endpoints, so the usual interval rules are
    already outward-rounding: the real result of an operation on members lies
    inside the result.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", to_rational(self.lo))
        object.__setattr__(self, "hi", to_rational(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"Invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: RationalLike) -> "RationalInterval":
        q = to_rational(value)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, value: RationalLike) -> bool:
        q = to_rational(value)
        return self.lo <= q <= self.hi

    def __add__(self, other):
        o = _as_interval(other)
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self) -> "RationalInterval":
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = _as_interval(other)
        return RationalInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        o = _as_interval(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalInterval":
        if self.lo <= 0 <= self.hi:
            raise DomainError(f"Cannot invert interval {self} containing zero")
        return RationalInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _as_interval(other).reciprocal()

    def __rtruediv__(self, other):
        return _as_interval(other) * self.reciprocal()

    def square(self) -> "RationalInterval":
        lo_sq, hi_sq = self.lo * self.lo, self.hi * self.hi
        if self.lo >= 0:
            return RationalInterval(lo_sq, hi_sq)
        if self.hi <= 0:
            return RationalInterval(hi_sq, lo_sq)
        return RationalInterval(Fraction(0), max(lo_sq, hi_sq))

    def sqrt(self, width: RationalLike) -> "RationalInterval":
        if self.hi < 0:
            raise DomainError(f"sqrt of negative interval {self}")
        lower = sqrt_enclosure(max(self.lo, Fraction(0)), width).lo
        upper = sqrt_enclosure(self.hi, width).hi
        return RationalInterval(lower, upper)

    def abs_hi(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def rounded_out(self, bits: int) -> "RationalInterval":
        """Widen to dyadic endpoints with denominator ``2**bits``."""

        scale = 1 << bits
        return RationalInterval(
            Fraction(math.floor(self.lo * scale), scale),
            Fraction(math.ceil(self.hi * scale), scale),
        )

    def __str__(self) -> str:
        return format_interval(self)


def format_interval(interval: RationalInterval) -> str:
    return f"[{format_fraction(interval.lo)}, {format_fraction(interval.hi)}]"
