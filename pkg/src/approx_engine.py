"""Certified rational approximations of boosts, rotations and Poincare maps.

Targets are given parametrically (a rational speed, rational directions for
planar rotations, a rational velocity vector) because real-valued
transformations cannot be ingested exactly.  Every irrational entry of a
target is handled as a :class:`RationalInterval`, and each approximation
comes back with an :class:`ApproxCertificate` holding a rational upper bound
on the Frobenius distance between target and output.  Outputs satisfy their
structural identity (``M^T eta M = eta`` or ``A^T A = I``) exactly,
independently of the bound.

Approximations walk a fixed dyadic ladder of internal tolerances ``delta``
and return the first rung whose certificate clears ``eps``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .errors import DomainError, SearchExhaustedError, UsageError
from .exact_core import (
    RationalInterval,
    RationalLike,
    format_fraction,
    format_fractions,
    rational_sqrt,
    sqrt_enclosure,
    to_rational,
)
from .minkowski_linalg import (
    IntervalMatrix,
    LorentzMatrix,
    PoincareMap,
    RationalMatrix,
    SpacetimeVec,
    embed_spatial,
    embed_spatial_intervals,
    frobenius_distance_bound,
    interval_matmul,
    lift_intervals,
)
from .rational_sphere import (
    DEFAULT_MAX_DENOMINATOR_BITS,
    nearest_point_on_sphere,
    nearest_rational_direction,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Target descriptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PythagoreanSpeed:
    """Rational ``w`` with rational ``r = sqrt(1 - w**2)``."""

    w: Fraction
    r: Fraction

    def __post_init__(self) -> None:
        w, r = to_rational(self.w), to_rational(self.r)
        if w * w + r * r != 1 or not (0 <= w < 1) or r <= 0:
            raise DomainError(f"({w}, {r}) is not a Pythagorean speed")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_speed(cls, w: RationalLike) -> "PythagoreanSpeed":
        w = to_rational(w)
        if not (0 <= w < 1):
            raise DomainError(f"Pythagorean speeds lie in [0, 1), got {w}")
        r = rational_sqrt(1 - w * w)
        if r is None:
            raise DomainError(f"sqrt(1 - {w}**2) is irrational")
        return cls(w, r)

    @property
    def gamma(self) -> Fraction:
        return 1 / self.r

    def to_dict(self) -> dict:
        return {"w": format_fraction(self.w), "r": format_fraction(self.r)}


@dataclass(frozen=True)
class BoostSpec:
    """Boost ``B_v`` along spatial axis 1 (coordinate 2)."""

    speed: Fraction

    def __post_init__(self) -> None:
        speed = to_rational(self.speed)
        if abs(speed) >= 1:
            raise DomainError("speed must satisfy |v| < 1")
        object.__setattr__(self, "speed", speed)

    def to_dict(self) -> dict:
        return {"kind": "boost", "speed": format_fraction(self.speed)}


@dataclass(frozen=True)
class PlanarRotation:
    """Rotation in the spatial plane ``(i, j)`` (1-based) taking axis ``i`` toward ``toward``.

    With ``radial`` set, ``toward[0]`` holds the square of a nonnegative first
    component, so directions such as ``(sqrt(a), b)`` stay expressible.
    """

    plane: Tuple[int, int]
    toward: Tuple[Fraction, Fraction]
    radial: bool = False

    def __post_init__(self) -> None:
        i, j = (int(k) for k in self.plane)
        if i == j or i < 1 or j < 1:
            raise UsageError(f"Rotation plane needs two distinct axes >= 1, got {self.plane}")
        a, b = (to_rational(v) for v in self.toward)
        if a == 0 and b == 0:
            raise DomainError("Rotation target direction must be nonzero")
        if self.radial and a < 0:
            raise DomainError(f"Radial rotation needs a nonnegative squared component, got {a}")
        object.__setattr__(self, "plane", (i, j))
        object.__setattr__(self, "toward", (a, b))
        object.__setattr__(self, "radial", bool(self.radial))

    def rational_toward(self) -> Optional[Tuple[Fraction, Fraction]]:
        """The target direction as a rational pair, or ``None`` for an irrational radial component."""

        a, b = self.toward
        if not self.radial:
            return a, b
        root = rational_sqrt(a)
        return None if root is None else (root, b)

    def inverse(self) -> "PlanarRotation":
        a, b = self.toward
        return PlanarRotation(self.plane, (a, -b), self.radial)

    def to_dict(self) -> dict:
        data = {"plane": list(self.plane), "toward": format_fractions(self.toward)}
        if self.radial:
            data["radial"] = True
        return data


@dataclass(frozen=True)
class OrthogonalSpec:
    """``T = R_1 R_2 ... R_k S`` with planar rotations ``R_i`` and sign flips ``S``."""

    rotations: Tuple[PlanarRotation, ...] = ()
    flips: Optional[Tuple[bool, ...]] = None

    def validate(self, n: int) -> None:
        for rot in self.rotations:
            if max(rot.plane) > n:
                raise UsageError(f"Rotation plane {rot.plane} outside dimension {n}")
        if self.flips is not None and len(self.flips) != n:
            raise UsageError(f"Flip mask has length {len(self.flips)}, expected {n}")

    @classmethod
    def axis_toward(cls, direction: Sequence[RationalLike]) -> "OrthogonalSpec":
        """Rotation chain ``R(1,2) R(1,3) ... R(1,n)`` sending spatial axis 1 to ``direction / |direction|``.

        Axis ``k >= 3`` is brought in by a radial rotation whose squared first
        component is the squared length of the preceding coordinates.
        """

        v = [to_rational(c) for c in direction]
        if not v or all(c == 0 for c in v):
            raise DomainError("Cannot turn an axis toward the zero vector")
        if len(v) == 1:
            return cls((), (v[0] < 0,))
        rotations = []
        if v[1] != 0 or v[0] < 0:
            rotations.append(PlanarRotation((1, 2), (v[0], v[1])))
        radius_sq = v[0] * v[0] + v[1] * v[1]
        for k in range(2, len(v)):
            if v[k] != 0:
                rotations.append(PlanarRotation((1, k + 1), (radius_sq, v[k]), radial=True))
                radius_sq += v[k] * v[k]
        return cls(tuple(rotations))

    @classmethod
    def from_dict(cls, data: dict) -> "OrthogonalSpec":
        rotations = tuple(
            PlanarRotation(tuple(r["plane"]), tuple(r["toward"]), bool(r.get("radial", False)))
            for r in data.get("rotations", [])
        )
        flips = data.get("flips")
        return cls(rotations, tuple(bool(f) for f in flips) if flips is not None else None)

    def flip_matrix(self, n: int) -> RationalMatrix:
        mask = self.flips or (False,) * n
        return RationalMatrix.diagonal([-1 if flip else 1 for flip in mask])

    def to_dict(self) -> dict:
        return {
            "kind": "orthogonal",
            "rotations": [rot.to_dict() for rot in self.rotations],
            "flips": list(self.flips) if self.flips is not None else None,
        }


@dataclass(frozen=True)
class PoincareSpec:
    """``x -> post . B_v . pre . x + translation`` (orthogonal parts act on space)."""

    translation: SpacetimeVec
    boost: BoostSpec
    pre: OrthogonalSpec = field(default_factory=OrthogonalSpec)
    post: OrthogonalSpec = field(default_factory=OrthogonalSpec)

    @classmethod
    def identity(cls, dim: int) -> "PoincareSpec":
        return cls(SpacetimeVec.origin(dim), BoostSpec(Fraction(0)))

    @classmethod
    def boost_toward(
        cls,
        translation: SpacetimeVec,
        speed: RationalLike,
        plane: Tuple[int, int],
        toward: Tuple[RationalLike, RationalLike],
    ) -> "PoincareSpec":
        """``O B_v O^-1`` with ``O`` rotating axis ``plane[0]`` toward ``toward``."""

        rotation = PlanarRotation(plane, tuple(toward))
        return cls(
            translation,
            BoostSpec(to_rational(speed)),
            pre=OrthogonalSpec((rotation.inverse(),)),
            post=OrthogonalSpec((rotation,)),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "PoincareSpec":
        """Inverse of :meth:`to_dict`; also accepts a bare ``"speed"`` key."""

        try:
            speed = data["boost"]["speed"] if "boost" in data else data["speed"]
            translation = SpacetimeVec(tuple(data["translation"]))
        except (KeyError, TypeError) as exc:
            raise UsageError(f"Poincare spec needs translation and speed: {exc}") from exc
        return cls(
            translation,
            BoostSpec(to_rational(speed)),
            pre=OrthogonalSpec.from_dict(data.get("pre") or {}),
            post=OrthogonalSpec.from_dict(data.get("post") or {}),
        )

    def to_dict(self) -> dict:
        return {
            "kind": "poincare",
            "translation": self.translation.to_list(),
            "boost": self.boost.to_dict(),
            "pre": self.pre.to_dict(),
            "post": self.post.to_dict(),
        }


@dataclass(frozen=True)
class VelocitySpec:
    velocity: Tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {"kind": "velocity", "velocity": format_fractions(self.velocity)}


TargetSpec = Union[BoostSpec, OrthogonalSpec, PoincareSpec, VelocitySpec]


@dataclass(frozen=True)
class ApproxCertificate:
    output: RationalMatrix
    target_spec: TargetSpec
    delta: Fraction
    error_bound: Fraction

    def to_dict(self) -> dict:
        return {
            "target": self.target_spec.to_dict(),
            "output": self.output.to_json(),
            "delta": format_fraction(self.delta),
            "error_bound": format_fraction(self.error_bound),
        }


# ---------------------------------------------------------------------------
# Exact building blocks
# ---------------------------------------------------------------------------


def _check_dim(d: int) -> None:
    if d < 2:
        raise UsageError(f"Dimension must be >= 2, got {d}")


def _boost_rows(gamma: Fraction, off: Fraction, d: int) -> RationalMatrix:
    rows = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    rows[0][0] = rows[1][1] = gamma
    rows[0][1] = rows[1][0] = off
    return RationalMatrix.of(rows)


def boost_matrix(speed: PythagoreanSpeed, d: int) -> LorentzMatrix:
    """``B_w``: block ``[[1/r, -w/r], [-w/r, 1/r]]`` on coordinates 1 and 2."""

    _check_dim(d)
    return LorentzMatrix(_boost_rows(speed.gamma, -speed.w * speed.gamma, d))


def velocity_boost_matrix(speed: PythagoreanSpeed, d: int) -> LorentzMatrix:
    """``B_w^-1``: sends ``(1, 0, ..., 0)`` to ``gamma * (1, w, 0, ..., 0)``."""

    _check_dim(d)
    return LorentzMatrix(_boost_rows(speed.gamma, speed.w * speed.gamma, d))


def planar_rotation_matrix(cos: Fraction, sin: Fraction, plane: Tuple[int, int], n: int) -> RationalMatrix:
    i, j = plane[0] - 1, plane[1] - 1
    rows = [[Fraction(int(a == b)) for b in range(n)] for a in range(n)]
    rows[i][i] = rows[j][j] = cos
    rows[i][j] = -sin
    rows[j][i] = sin
    return RationalMatrix.of(rows)


# ---------------------------------------------------------------------------
# Interval forms of the real targets
# ---------------------------------------------------------------------------


def _gamma_enclosure(speed_sq: Fraction, width: Fraction) -> RationalInterval:
    one_minus = 1 - speed_sq
    return 1 / sqrt_enclosure(one_minus, width * one_minus / 4)


def _identity_intervals(n: int) -> List[List[RationalInterval]]:
    return [[RationalInterval.point(int(i == j)) for j in range(n)] for i in range(n)]


def target_boost_enclosure(v: RationalLike, d: int, width: RationalLike) -> IntervalMatrix:
    v, width = to_rational(v), to_rational(width)
    gamma = _gamma_enclosure(v * v, width)
    rows = _identity_intervals(d)
    rows[0][0] = rows[1][1] = gamma
    rows[0][1] = rows[1][0] = -(gamma * v)
    return tuple(tuple(row) for row in rows)


def _unit_direction_enclosure(a: Fraction, b: Fraction, width: Fraction) -> Tuple[RationalInterval, RationalInterval]:
    norm_sq = a * a + b * b
    norm = sqrt_enclosure(norm_sq, width * norm_sq / (1 + max(abs(a), abs(b))))
    return a / norm, b / norm


def _toward_enclosure(rotation: PlanarRotation, width: Fraction) -> Tuple[RationalInterval, RationalInterval]:
    pair = rotation.rational_toward()
    if pair is not None:
        return _unit_direction_enclosure(*pair, width)
    a_sq, b = rotation.toward
    norm_sq = a_sq + b * b
    inner = width * min(norm_sq, Fraction(1)) / 8
    a = sqrt_enclosure(a_sq, inner)
    norm = sqrt_enclosure(norm_sq, inner)
    return a / norm, b / norm


def target_rotation_enclosure(rotation: PlanarRotation, n: int, width: RationalLike) -> IntervalMatrix:
    cos, sin = _toward_enclosure(rotation, to_rational(width))
    i, j = rotation.plane[0] - 1, rotation.plane[1] - 1
    rows = _identity_intervals(n)
    rows[i][i] = rows[j][j] = cos
    rows[i][j] = -sin
    rows[j][i] = sin
    return tuple(tuple(row) for row in rows)


def target_orthogonal_enclosure(spec: OrthogonalSpec, n: int, width: RationalLike) -> IntervalMatrix:
    result = lift_intervals(RationalMatrix.identity(n))
    for rotation in spec.rotations:
        result = interval_matmul(result, target_rotation_enclosure(rotation, n, width))
    return interval_matmul(result, lift_intervals(spec.flip_matrix(n)))


def target_speed_boost_enclosure(speed_sq: RationalLike, d: int, width: RationalLike) -> IntervalMatrix:
    """Boost along axis 1 sending ``(1, 0, ..., 0)`` to ``gamma * (1, sqrt(speed_sq), 0, ..., 0)``."""

    speed_sq, width = to_rational(speed_sq), to_rational(width)
    gamma = _gamma_enclosure(speed_sq, width)
    rows = _identity_intervals(d)
    rows[0][0] = rows[1][1] = gamma
    rows[0][1] = rows[1][0] = gamma * sqrt_enclosure(speed_sq, width * (1 - speed_sq) / 4)
    return tuple(tuple(row) for row in rows)


def target_poincare_enclosure(spec: PoincareSpec, d: int, width: RationalLike) -> IntervalMatrix:
    n = d - 1
    post = embed_spatial_intervals(target_orthogonal_enclosure(spec.post, n, width))
    pre = embed_spatial_intervals(target_orthogonal_enclosure(spec.pre, n, width))
    boost = target_boost_enclosure(spec.boost.speed, d, width)
    return interval_matmul(interval_matmul(post, boost), pre)


def target_velocity_boost_enclosure(velocity: Sequence[RationalLike], width: RationalLike) -> IntervalMatrix:
    """Pure boost whose unit time image has velocity ``velocity``."""

    v = [to_rational(c) for c in velocity]
    d = len(v) + 1
    q = sum((c * c for c in v), Fraction(0))
    rows = _identity_intervals(d)
    if q == 0:
        return tuple(tuple(row) for row in rows)
    gamma = _gamma_enclosure(q, to_rational(width))
    rows[0][0] = gamma
    for a in range(1, d):
        rows[0][a] = rows[a][0] = gamma * v[a - 1]
        for b in range(1, d):
            rows[a][b] = rows[a][b] + (gamma - 1) * (v[a - 1] * v[b - 1] / q)
    return tuple(tuple(row) for row in rows)


def boost_error_bound(v: RationalLike, speed: PythagoreanSpeed, width: RationalLike) -> Fraction:
    """Upper bound on ``sqrt(2|g(v) - g(w)|**2 + 2|v g(v) - w g(w)|**2)``, ``g(x) = 1/sqrt(1 - x**2)``."""

    v, width = to_rational(v), to_rational(width)
    gamma_v = _gamma_enclosure(v * v, width)
    gamma_w = speed.gamma
    first = gamma_v - gamma_w
    second = gamma_v * v - speed.w * gamma_w
    total = 2 * first.square() + 2 * second.square()
    return sqrt_enclosure(total.hi, width).hi


def operator_norm_bound_boost(v: RationalLike, width: RationalLike = Fraction(1, 1024)) -> Fraction:
    """Certified upper bound on ``||B_v|| = sqrt((1 + |v|) / (1 - |v|))``."""

    a = abs(to_rational(v))
    return sqrt_enclosure((1 + a) / (1 - a), width).hi


# ---------------------------------------------------------------------------
# Approximation algorithms
# ---------------------------------------------------------------------------


def _positive(eps: RationalLike, name: str = "eps") -> Fraction:
    value = to_rational(eps)
    if value <= 0:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


def _floor(max_bits: int) -> Fraction:
    return Fraction(1, 1 << max_bits)


def _speed_candidate(speed_sq: Fraction, delta: Fraction, max_bits: int) -> Optional[PythagoreanSpeed]:
    """Pythagorean ``w`` with ``|sqrt(speed_sq) - w| < delta``, or ``None`` if ``delta`` is too coarse."""

    root = rational_sqrt(speed_sq)
    if root is not None:
        r = rational_sqrt(1 - speed_sq)
        if r is not None:
            return PythagoreanSpeed(root, r)

    one_minus = 1 - speed_sq

    def enclose(width: Fraction) -> List[RationalInterval]:
        return [sqrt_enclosure(one_minus, width), sqrt_enclosure(speed_sq, width)]

    point = nearest_point_on_sphere(enclose, delta, max_bits)
    r, w = point.coords
    if r <= 0:
        return None
    return PythagoreanSpeed(abs(w), r)


def _approx_speed_boost(
    speed_sq: Fraction, delta: Fraction, d: int, max_bits: int
) -> Optional[Tuple[PythagoreanSpeed, RationalMatrix, Fraction]]:
    speed = _speed_candidate(speed_sq, delta, max_bits)
    if speed is None:
        return None
    matrix = velocity_boost_matrix(speed, d).matrix
    if speed.w * speed.w == speed_sq:
        return speed, matrix, Fraction(0)
    width = delta / 64
    return speed, matrix, frobenius_distance_bound(target_speed_boost_enclosure(speed_sq, d, width), matrix, width)


def _signed_boost(speed: PythagoreanSpeed, negative: bool, d: int) -> LorentzMatrix:
    return velocity_boost_matrix(speed, d) if negative else boost_matrix(speed, d)


def approx_boost(
    spec: Union[BoostSpec, RationalLike],
    eps: RationalLike,
    d: int,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> Tuple[PythagoreanSpeed, ApproxCertificate]:
    """Rational boost ``B_w`` with certified ``||B_v - B_w||_F < eps`` and ``|v - w| < eps``.

    Negative speeds are served by symmetry: the returned speed is ``|w|`` and
    the output matrix is ``B_{-|w|}``.  ``delta`` walks the fixed ladder
    ``1/2, 1/4, ...`` and the first rung whose certificate clears ``eps`` wins,
    so a smaller ``eps`` never returns a larger bound.
    """

    _check_dim(d)
    if not isinstance(spec, BoostSpec):
        spec = BoostSpec(to_rational(spec))
    eps = _positive(eps)
    negative = spec.speed < 0
    a = abs(spec.speed)

    r = rational_sqrt(1 - a * a)
    if r is not None:
        speed = PythagoreanSpeed(a, r)
        output = _signed_boost(speed, negative, d).matrix
        return speed, ApproxCertificate(output, spec, Fraction(0), Fraction(0))

    delta = Fraction(1, 2)
    while delta >= _floor(max_bits):
        speed = _speed_candidate(a * a, delta, max_bits)
        if speed is not None and abs(a - speed.w) < eps:
            bound = boost_error_bound(a, speed, delta / 64)
            if bound < eps:
                output = _signed_boost(speed, negative, d).matrix
                logger.info("approx_boost v=%s -> w=%s (delta=%s)", spec.speed, speed.w, delta)
                return speed, ApproxCertificate(output, spec, delta, bound)
        delta /= 2
    raise SearchExhaustedError(f"No certified rational boost within {eps} of v={spec.speed}")


def _approx_rotation(
    rotation: PlanarRotation, budget: Fraction, n: int, max_bits: int
) -> Tuple[RationalMatrix, Fraction]:
    pair = rotation.rational_toward()
    if pair is not None:
        point = nearest_rational_direction(pair, budget / 2, max_bits)
    else:
        point = nearest_point_on_sphere(lambda width: list(_toward_enclosure(rotation, width)), budget / 2, max_bits)
    matrix = planar_rotation_matrix(point[0], point[1], rotation.plane, n)
    target = target_rotation_enclosure(rotation, n, budget / 64)
    return matrix, frobenius_distance_bound(target, matrix, budget / 64)


def compose_with_bound(
    factors: Sequence[Tuple[RationalMatrix, RationalLike, RationalLike]],
) -> Tuple[RationalMatrix, Fraction]:
    """Exact product ``F_1 F_2 ... F_k`` and a certified bound on its distance to the target product.

    Each factor is ``(output, error_bound, target_norm_bound)`` where
    ``error_bound`` bounds ``||target - output||_F`` and ``target_norm_bound``
    bounds the operator norm of the target.  A Frobenius upper bound of the
    target is accepted as well (``||X||_op <= ||X||_F``), it only loosens the
    result.  The bound is folded from the left with
    ``||BA - B'A'||_F <= e_A ||B|| + e_A e_B + e_B ||A||``.
    """

    if not factors:
        raise UsageError("compose_with_bound needs at least one factor")
    first, err, norm = factors[0]
    product = first
    err, norm = to_rational(err), to_rational(norm)
    if err < 0 or norm < 0:
        raise UsageError("Bounds must be nonnegative")
    for matrix, factor_err, factor_norm in factors[1:]:
        factor_err, factor_norm = to_rational(factor_err), to_rational(factor_norm)
        if factor_err < 0 or factor_norm < 0:
            raise UsageError("Bounds must be nonnegative")
        product = product @ matrix
        err = factor_err * norm + factor_err * err + err * factor_norm
        norm = norm * factor_norm
    return product, err


def approx_orthogonal(
    spec: OrthogonalSpec,
    eps: RationalLike,
    n: int,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> Tuple[RationalMatrix, ApproxCertificate]:
    """Exactly orthogonal rational ``A`` with certified ``||T - A||_F < eps``."""

    if n < 1:
        raise UsageError(f"Orthogonal maps need dimension >= 1, got {n}")
    spec.validate(n)
    eps = _positive(eps)
    flips = spec.flip_matrix(n)
    if not spec.rotations:
        return flips, ApproxCertificate(flips, spec, Fraction(0), Fraction(0))

    # the ladder of budgets does not depend on eps
    budget = Fraction(1, 2 * len(spec.rotations))
    while budget >= _floor(max_bits):
        factors = [
            (matrix, bound, Fraction(1))
            for matrix, bound in (_approx_rotation(rot, budget, n, max_bits) for rot in spec.rotations)
        ]
        factors.append((flips, Fraction(0), Fraction(1)))
        product, total = compose_with_bound(factors)
        if total < eps:
            logger.info("approx_orthogonal n=%s rotations=%s bound certified", n, len(spec.rotations))
            return product, ApproxCertificate(product, spec, budget, total)
        budget /= 2
    raise SearchExhaustedError(f"No certified orthogonal map within {eps}")


def approx_poincare(
    spec: PoincareSpec,
    eps: RationalLike,
    d: int,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> Tuple[PoincareMap, ApproxCertificate]:
    """Rational Poincare map ``L* + translation`` with certified ``||L - L*||_F < eps``.

    Each linear factor (post rotation, boost, pre rotation) is approximated to
    the current rung ``budget``, which starts at ``1 / (3 (||B|| + 2))`` and
    halves until the folded bound clears ``eps``.  The translation is rational
    and carried exactly.
    """

    _check_dim(d)
    if spec.translation.dim != d:
        raise UsageError(f"Translation has dimension {spec.translation.dim}, expected {d}")
    n = d - 1
    spec.pre.validate(n)
    spec.post.validate(n)
    eps = _positive(eps)

    boost_norm = operator_norm_bound_boost(spec.boost.speed)
    budget = 1 / (3 * (boost_norm + 2))
    while budget >= _floor(max_bits):
        post, post_cert = approx_orthogonal(spec.post, budget, n, max_bits)
        _, boost_cert = approx_boost(spec.boost, budget, d, max_bits)
        pre, pre_cert = approx_orthogonal(spec.pre, budget, n, max_bits)
        product, total = compose_with_bound(
            [
                (embed_spatial(post), post_cert.error_bound, Fraction(1)),
                (boost_cert.output, boost_cert.error_bound, boost_norm),
                (embed_spatial(pre), pre_cert.error_bound, Fraction(1)),
            ]
        )
        if total < eps:
            mapping = PoincareMap(LorentzMatrix(product), spec.translation)
            logger.info("approx_poincare d=%s certified (budget=%s)", d, budget)
            return mapping, ApproxCertificate(product, spec, budget, total)
        budget /= 2
    raise SearchExhaustedError(f"No certified Poincare map within {eps}")


def observer_with_velocity(
    vbar: Sequence[RationalLike],
    eps: RationalLike,
    d: int,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> Tuple[PoincareMap, Tuple[Fraction, ...], ApproxCertificate]:
    """Rational Lorentz map ``L*`` certified within ``eps`` of the pure boost with velocity ``vbar``.

    The target boost is factored as ``O B_|v| O^-1`` where ``O`` turns spatial
    axis 1 toward ``vbar`` (see :meth:`OrthogonalSpec.axis_toward`).  ``O`` goes
    through :func:`approx_orthogonal`, ``B_|v|`` through a Pythagorean speed
    search, and the three factor bounds are folded by
    :func:`compose_with_bound`.  ``delta`` starts at
    ``1 / (3 (||B|| + 2))`` and halves until ``sqrt(2)`` times the composed bound
    clears ``eps``, which also certifies the velocity miss ``|achieved - vbar|``.
    """

    _check_dim(d)
    v = tuple(to_rational(c) for c in vbar)
    if len(v) != d - 1:
        raise UsageError(f"Velocity has {len(v)} components, expected {d - 1}")
    q = sum((c * c for c in v), Fraction(0))
    if q >= 1:
        raise DomainError("speed must satisfy |v| < 1")
    eps = _positive(eps)
    spec = VelocitySpec(v)

    if q == 0:
        identity = RationalMatrix.identity(d)
        return PoincareMap.identity(d), v, ApproxCertificate(identity, spec, Fraction(0), Fraction(0))

    n = d - 1
    turn = OrthogonalSpec.axis_toward(v)
    boost_norm = operator_norm_bound_boost(sqrt_enclosure(q, (1 - q) / 8).hi)
    delta = 1 / (3 * (boost_norm + 2))
    while delta >= _floor(max_bits):
        found = _approx_speed_boost(q, delta, d, max_bits)
        # the folded bound is never below the boost factor's own error
        if found is not None and found[2] < eps:
            _, boost, boost_err = found
            rotation, rotation_cert = approx_orthogonal(turn, delta, n, max_bits)
            outer = embed_spatial(rotation)
            product, bound = compose_with_bound(
                [
                    (outer, rotation_cert.error_bound, Fraction(1)),
                    (boost, boost_err, boost_norm),
                    (outer.transpose(), rotation_cert.error_bound, Fraction(1)),
                ]
            )
            achieved = achieved_velocity(product)
            miss_sq = sum(((a - b) ** 2 for a, b in zip(v, achieved)), Fraction(0))
            # the time component is >= 1, so the miss is at most sqrt(2) * bound
            if 2 * bound * bound < eps * eps and miss_sq < eps * eps:
                logger.info("observer_with_velocity d=%s certified (delta=%s)", d, delta)
                certificate = ApproxCertificate(product, spec, delta, bound)
                return PoincareMap.linear_only(LorentzMatrix(product)), achieved, certificate
        delta /= 2
    raise SearchExhaustedError(f"No rational observer within {eps} of velocity {format_fractions(v)}")


def achieved_velocity(linear: RationalMatrix) -> Tuple[Fraction, ...]:
    """``spatial(M 1) / time(M 1)`` read off the first column."""

    column = linear.column(0)
    if column[0] == 0:
        raise DomainError("Unit time vector is mapped to a simultaneous direction")
    return tuple(c / column[0] for c in column[1:])
