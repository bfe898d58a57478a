"""Rational points on unit spheres.

Rational points are dense on every unit sphere.  The witness used here is the
inverse stereographic projection from the pole ``(-1, 0, ..., 0)``, which maps
rational parameters to rational points.  The nearest-direction search picks
dyadic parameters close to the chart preimage of the target, doubling the
denominator each round until an interval certificate shows the distance is
below ``eps``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Sequence, Tuple

from .errors import DomainError, SearchExhaustedError, UsageError
from .exact_core import (
    RationalInterval,
    RationalLike,
    format_fractions,
    rational_sqrt,
    sqrt_enclosure,
    to_rational,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_DENOMINATOR_BITS = 64

TargetEnclosure = Callable[[Fraction], Sequence[RationalInterval]]


@dataclass(frozen=True)
class RationalSpherePoint:
    coords: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        coords = tuple(to_rational(c) for c in self.coords)
        if not coords:
            raise UsageError("Sphere points need at least one coordinate")
        if sum((c * c for c in coords), Fraction(0)) != 1:
            raise DomainError(f"Point {format_fractions(coords)} is not on the unit sphere")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __getitem__(self, index: int) -> Fraction:
        return self.coords[index]

    def __iter__(self):
        return iter(self.coords)

    def to_list(self) -> List[str]:
        return format_fractions(self.coords)


def stereographic(params: Sequence[RationalLike]) -> RationalSpherePoint:
    """``t -> ((1-s)/(1+s), 2t_1/(1+s), ..., 2t_{n-1}/(1+s))`` with ``s = |t|**2``."""

    t = [to_rational(v) for v in params]
    s = sum((v * v for v in t), Fraction(0))
    denom = 1 + s
    return RationalSpherePoint(((1 - s) / denom,) + tuple(2 * v / denom for v in t))


def inverse_stereographic(point: RationalSpherePoint) -> Tuple[Fraction, ...]:
    if point[0] == -1:
        raise DomainError("The projection pole has no chart preimage")
    return tuple(c / (1 + point[0]) for c in point.coords[1:])


def _start_bits(eps: Fraction) -> int:
    # roughly log2(1/eps), plus slack for the chart's Lipschitz constant
    return max(4, (eps.denominator // eps.numerator).bit_length() + 2)


def nearest_point_on_sphere(
    enclose: TargetEnclosure,
    eps: RationalLike,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> RationalSpherePoint:
    """Rational unit point within ``eps`` of a (possibly irrational) unit target.

    ``enclose(width)`` must return coordinate enclosures of the target no wider
    than roughly ``width``; it is called again with a smaller width each round.
    Targets with a negative first coordinate are handled in the opposite-pole
    chart, so the excluded pole never needs the chart itself.
    """

    eps = to_rational(eps)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    eps_sq = eps * eps

    for bits in range(_start_bits(eps), max_bits + 1):
        width = Fraction(1, 1 << (bits + 4))
        target = [iv.rounded_out(bits + 8) for iv in enclose(width)]
        flip = target[0].mid < 0
        chart = [-target[0]] + target[1:] if flip else target
        denom = 1 + chart[0]
        if denom.lo <= 0:
            continue
        scale = 1 << bits
        params = [Fraction(round((iv / denom).mid * scale), scale) for iv in chart[1:]]
        coords = stereographic(params).coords
        if flip:
            coords = (-coords[0],) + coords[1:]
        dist_sq = sum(((t - c).square() for t, c in zip(target, coords)), RationalInterval.point(0))
        if dist_sq.hi < eps_sq:
            logger.debug("sphere search certified at %s bits", bits)
            return RationalSpherePoint(coords)

    raise SearchExhaustedError(f"No certified rational point within {eps} using denominators up to 2**{max_bits}")


def nearest_rational_direction(
    target: Sequence[RationalLike],
    eps: RationalLike,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> RationalSpherePoint:
    """Rational unit vector within ``eps`` of ``target / |target|``.

    When ``|target|`` is rational the normalised target is returned exactly.
    """

    coords = [to_rational(c) for c in target]
    if not coords:
        raise UsageError("Target direction needs at least one coordinate")
    norm_sq = sum((c * c for c in coords), Fraction(0))
    if norm_sq == 0:
        raise DomainError("Cannot normalise the zero vector")

    root = rational_sqrt(norm_sq)
    if root is not None:
        return RationalSpherePoint(tuple(c / root for c in coords))

    largest = max(abs(c) for c in coords)

    def enclose(width: Fraction) -> List[RationalInterval]:
        # d(c/N) = |c| dN / N**2, so shrink the norm enclosure accordingly.
        norm = sqrt_enclosure(norm_sq, width * norm_sq / (1 + largest))
        return [c / norm for c in coords]

    return nearest_point_on_sphere(enclose, eps, max_bits)
