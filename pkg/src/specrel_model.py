"""The rational model of SpecRel_d.

Inertial observers are rational Poincare maps, photons are rational lines of
slope 1.  Observer ``Id`` sees body ``b`` at ``x`` iff ``x`` lies on
``b``'s line (an observer's line is the image of the time axis), and every
other observer ``m`` sees ``b`` at ``x`` iff ``Id`` sees ``b`` at ``m(x)``.

A :class:`Model` holds a finite registry of named bodies; the predicates are
evaluated exactly, and witnesses (photons through lightlike pairs, sentinel
photons separating events) are constructed on demand instead of enumerating
the infinite carrier.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .errors import DomainError, ScenarioError, SpecRelError, UsageError
from .exact_core import RationalLike, rational_sqrt, to_rational
from .minkowski_linalg import (
    LorentzMatrix,
    PoincareMap,
    RationalMatrix,
    SpacetimeVec,
    minkowski_form,
)
from .utils import load_yaml

logger = logging.getLogger(__name__)

ID_NAME = "Id"


class BodyKind(str, Enum):
    OBSERVER = "observer"
    PHOTON = "photon"


@dataclass(frozen=True)
class RationalLine:
    """``{anchor + lam * direction}``, stored in canonical form.

    The direction is scaled so its first nonzero coordinate (the pivot) is 1,
    and the anchor is the line's point with pivot coordinate 0.  For every
    timelike or lightlike line the pivot is time, so the anchor is the point at
    time 0 and the direction reads ``(1, velocity)``.
    """

    anchor: SpacetimeVec
    direction: SpacetimeVec

    def __post_init__(self) -> None:
        if self.anchor.dim != self.direction.dim:
            raise UsageError(f"Dimension mismatch: {self.anchor.dim} vs {self.direction.dim}")
        pivot = next((i for i, c in enumerate(self.direction) if c != 0), None)
        if pivot is None:
            raise DomainError("A line needs a nonzero direction")
        direction = self.direction.scale(1 / self.direction[pivot])
        anchor = self.anchor - direction.scale(self.anchor[pivot])
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "anchor", anchor)

    @property
    def pivot(self) -> int:
        return next(i for i, c in enumerate(self.direction) if c != 0)

    @property
    def dim(self) -> int:
        return self.anchor.dim

    def point_at(self, lam: RationalLike) -> SpacetimeVec:
        return self.anchor + self.direction.scale(lam)

    def contains(self, x: SpacetimeVec) -> bool:
        offset = x - self.anchor
        return offset == self.direction.scale(offset[self.pivot])

    def is_slope_one(self) -> bool:
        return self.pivot == 0 and sum((c * c for c in self.direction.spatial), Fraction(0)) == 1

    def image(self, mapping: PoincareMap) -> "RationalLine":
        return RationalLine(
            mapping.apply(self.anchor),
            SpacetimeVec(mapping.matrix.apply_vec(self.direction.coords)),
        )

    def to_dict(self) -> dict:
        return {"anchor": self.anchor.to_list(), "direction": self.direction.to_list()}


@dataclass(frozen=True)
class Photon:
    """Slope-1 line: direction ``(1, u)`` with ``u`` a rational unit vector."""

    anchor: SpacetimeVec
    direction: SpacetimeVec
    verified: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        if self.anchor.dim != self.direction.dim:
            raise UsageError(f"Dimension mismatch: {self.anchor.dim} vs {self.direction.dim}")
        if self.verified:
            spatial_sq = sum((c * c for c in self.direction.spatial), Fraction(0))
            if self.direction.time != 1 or spatial_sq != 1:
                raise DomainError("Photon direction must be (1, u) with |u| = 1 (slope 1)")
        if self.direction.time != 0:
            canonical = self.anchor - self.direction.scale(self.anchor.time / self.direction.time)
            object.__setattr__(self, "anchor", canonical)

    @classmethod
    def from_spatial(cls, anchor: SpacetimeVec, spatial: Sequence[RationalLike]) -> "Photon":
        return cls(anchor, SpacetimeVec((Fraction(1),) + tuple(spatial)))

    @classmethod
    def through(cls, x: SpacetimeVec, y: SpacetimeVec) -> "Photon":
        """The photon through two distinct lightlike-separated points."""

        if x == y or minkowski_form(x, y) != 0:
            raise DomainError("Points are not distinct and lightlike separated")
        return cls(x, (y - x).scale(1 / (y.time - x.time)))

    @classmethod
    def unchecked(cls, anchor: SpacetimeVec, direction: SpacetimeVec) -> "Photon":
        return cls(anchor, direction, verified=False)

    @property
    def dim(self) -> int:
        return self.anchor.dim

    def line(self) -> RationalLine:
        return RationalLine(self.anchor, self.direction)

    def contains(self, x: SpacetimeVec) -> bool:
        return self.line().contains(x)


@dataclass(frozen=True)
class Body:
    name: str
    kind: BodyKind
    mapping: Optional[PoincareMap] = None
    photon: Optional[Photon] = None

    def __post_init__(self) -> None:
        if self.kind is BodyKind.OBSERVER and (self.mapping is None or self.photon is not None):
            raise UsageError(f"Observer {self.name!r} needs exactly a Poincare map payload")
        if self.kind is BodyKind.PHOTON and (self.photon is None or self.mapping is not None):
            raise UsageError(f"Photon {self.name!r} needs exactly a line payload")

    @classmethod
    def of_observer(cls, name: str, mapping: PoincareMap) -> "Body":
        return cls(name, BodyKind.OBSERVER, mapping=mapping)

    @classmethod
    def of_photon(cls, name: str, photon: Photon) -> "Body":
        return cls(name, BodyKind.PHOTON, photon=photon)

    @property
    def is_observer(self) -> bool:
        return self.kind is BodyKind.OBSERVER

    @property
    def dim(self) -> int:
        return self.mapping.dim if self.mapping is not None else self.photon.dim

    def id_frame_line(self) -> RationalLine:
        """The body's worldline according to ``Id``."""

        if self.mapping is not None:
            direction = SpacetimeVec(self.mapping.matrix.column(0))
            return RationalLine(self.mapping.translation, direction)
        return self.photon.line()


def _observer_map(m: Union[Body, PoincareMap]) -> PoincareMap:
    if isinstance(m, PoincareMap):
        return m
    if not m.is_observer:
        raise UsageError(f"Body {m.name!r} is not an inertial observer")
    return m.mapping


def worldview(m: Union[Body, PoincareMap], b: Body, x: SpacetimeVec) -> bool:
    """``W(m, b, x)``: does observer ``m`` see body ``b`` at ``x``?"""

    return b.id_frame_line().contains(_observer_map(m).apply(x))


def worldview_transform(m: Union[Body, PoincareMap], k: Union[Body, PoincareMap]) -> PoincareMap:
    """``w_mk = k^-1 o m``."""

    return _observer_map(k).inverse().compose(_observer_map(m))


def worldline(m: Union[Body, PoincareMap], b: Body) -> RationalLine:
    """``wl_m(b)``: the preimage under ``m`` of ``b``'s line in ``Id``'s frame."""

    return b.id_frame_line().image(_observer_map(m).inverse())


def connecting_photon(m: Union[Body, PoincareMap], x: SpacetimeVec, y: SpacetimeVec) -> Optional[Photon]:
    """A photon ``p`` with ``W(m, p, x)`` and ``W(m, p, y)``, if one exists."""

    mapping = _observer_map(m)
    p, q = mapping.apply(x), mapping.apply(y)
    if p == q:
        return Photon.from_spatial(p, [1] + [0] * (p.dim - 2))
    if minkowski_form(p, q) != 0:
        return None
    return Photon.through(p, q)


def sentinel_photons(point: SpacetimeVec) -> Tuple[Body, Body]:
    """The photons through ``point`` along +-axis 2; they meet only at ``point``."""

    axis = [Fraction(1)] + [Fraction(0)] * (point.dim - 2)
    forward = Photon.from_spatial(point, axis)
    backward = Photon.from_spatial(point, [-c for c in axis])
    return Body.of_photon("sentinel+", forward), Body.of_photon("sentinel-", backward)


@dataclass(frozen=True)
class Model:
    """Finite registry of bodies over ``Q^d``, always containing ``Id``."""

    dimension: int
    bodies: Tuple[Body, ...]

    def __post_init__(self) -> None:
        if self.dimension < 2:
            raise UsageError(f"Dimension must be >= 2, got {self.dimension}")
        names = [b.name for b in self.bodies]
        if len(set(names)) != len(names):
            raise ScenarioError("Body names must be unique")
        for body in self.bodies:
            if body.dim != self.dimension:
                raise ScenarioError(f"{body.kind.value} {body.name!r}: dimension {body.dim} != {self.dimension}")
        identity = next((b for b in self.bodies if b.name == ID_NAME), None)
        if identity is None or not identity.is_observer:
            raise ScenarioError("Model must register the identity observer 'Id'")
        if not identity.mapping.same_map(PoincareMap.identity(self.dimension)):
            raise ScenarioError("observer 'Id': must be the identity map")

    @classmethod
    def empty(cls, dimension: int) -> "Model":
        return cls(dimension, (Body.of_observer(ID_NAME, PoincareMap.identity(dimension)),))

    @property
    def identity(self) -> Body:
        return self.body(ID_NAME)

    def body(self, name: str) -> Body:
        for body in self.bodies:
            if body.name == name:
                return body
        raise UsageError(f"No body named {name!r} in the model")

    def observers(self) -> List[Body]:
        return [b for b in self.bodies if b.is_observer]

    def photons(self) -> List[Body]:
        return [b for b in self.bodies if not b.is_observer]

    def with_body(self, body: Body) -> "Model":
        return Model(self.dimension, self.bodies + (body,))

    def with_observer(self, name: str, mapping: PoincareMap) -> "Model":
        return self.with_body(Body.of_observer(name, mapping))

    def with_photon(self, name: str, photon: Photon) -> "Model":
        return self.with_body(Body.of_photon(name, photon))

    def to_scenario(self) -> Dict[str, Any]:
        observers = []
        photons = []
        for body in self.bodies:
            if body.name == ID_NAME:
                continue
            if body.is_observer:
                observers.append({"name": body.name, **body.mapping.to_dict()})
            else:
                photons.append(
                    {
                        "name": body.name,
                        "anchor": body.photon.anchor.to_list(),
                        "direction": [str(c) for c in body.photon.direction.spatial],
                    }
                )
        return {"dimension": self.dimension, "observers": observers, "photons": photons}

    @classmethod
    def from_scenario(cls, data: Dict[str, Any]) -> "Model":
        try:
            dimension = int(data["dimension"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"Scenario needs an integer 'dimension': {exc}") from exc
        model = cls.empty(dimension)
        for entry in data.get("observers", []):
            name = entry.get("name", "?")
            try:
                matrix = RationalMatrix.of(entry["matrix"])
                translation = SpacetimeVec(tuple(entry.get("translation", [0] * dimension)))
                mapping = PoincareMap(LorentzMatrix(matrix), translation)
            except DomainError as exc:
                raise ScenarioError(f"observer {name!r}: matrix violates M^T eta M = eta") from exc
            except (KeyError, SpecRelError) as exc:
                raise ScenarioError(f"observer {name!r}: {exc}") from exc
            if name == ID_NAME:
                if not mapping.same_map(PoincareMap.identity(dimension)):
                    raise ScenarioError("observer 'Id': must be the identity map")
                continue
            model = model.with_observer(name, mapping)
        for entry in data.get("photons", []):
            name = entry.get("name", "?")
            try:
                photon = Photon.from_spatial(SpacetimeVec(tuple(entry["anchor"])), [to_rational(c) for c in entry["direction"]])
            except DomainError as exc:
                raise ScenarioError(f"photon {name!r}: not a line of slope 1 (|direction| must be 1)") from exc
            except (KeyError, SpecRelError) as exc:
                raise ScenarioError(f"photon {name!r}: {exc}") from exc
            model = model.with_photon(name, photon)
        logger.info("Loaded scenario: d=%s, %s bodies", dimension, len(model.bodies))
        return model


def load_scenario(path: Union[str, Path]) -> Model:
    return Model.from_scenario(load_yaml(Path(path)))


def axis_boost(speed: RationalLike, axis: int, d: int, rapidity_sign: int = 1) -> LorentzMatrix:
    """Boost by a Pythagorean ``speed`` mixing time with spatial ``axis`` (1-based)."""

    w = to_rational(speed)
    r = rational_sqrt(1 - w * w)
    if r is None or not (0 <= w < 1):
        raise DomainError(f"{w} is not a Pythagorean speed")
    rows = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    rows[0][0] = rows[axis][axis] = 1 / r
    rows[0][axis] = rows[axis][0] = -rapidity_sign * w / r
    return LorentzMatrix(RationalMatrix.of(rows))


_DEFAULT_SPEEDS = (Fraction(3, 5), Fraction(5, 13), Fraction(8, 17))


def default_model(d: int = 4) -> Model:
    """Built-in scenario: ``Id``, three Pythagorean boosts, a rotated observer, six photons."""

    if d < 2:
        raise UsageError(f"Dimension must be >= 2, got {d}")
    model = Model.empty(d)
    spatial = d - 1
    for index, speed in enumerate(_DEFAULT_SPEEDS):
        axis = index % spatial + 1
        model = model.with_observer(f"boost-{speed}-x{axis + 1}", PoincareMap.linear_only(axis_boost(speed, axis, d)))

    offset = SpacetimeVec(tuple([Fraction(1)] + [Fraction(1, k + 2) for k in range(spatial)]))
    if spatial >= 2:
        rows = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
        rows[1][1] = rows[2][2] = Fraction(3, 5)
        rows[1][2], rows[2][1] = Fraction(-4, 5), Fraction(4, 5)
        linear = LorentzMatrix(RationalMatrix.of(rows))
    else:
        linear = LorentzMatrix(RationalMatrix.diagonal([1, -1]))
    model = model.with_observer("rotated", PoincareMap(linear, offset))

    origin = SpacetimeVec.origin(d)
    photons: List[Tuple[SpacetimeVec, List[Fraction]]] = []
    if spatial == 1:
        for anchor in (origin, SpacetimeVec.of(1, 2), SpacetimeVec.of(-1, Fraction(1, 2))):
            photons.extend([(anchor, [Fraction(1)]), (anchor, [Fraction(-1)])])
    else:
        # four axis photons (the last one along -x_d) plus two oblique ones in the (x, y) plane
        for axis, sign in ((0, 1), (0, -1), (1, 1), (spatial - 1, -1)):
            direction = [Fraction(0)] * spatial
            direction[axis] = Fraction(sign)
            photons.append((origin, direction))
        anchor = SpacetimeVec(tuple([Fraction(0), Fraction(1), Fraction(1)] + [Fraction(0)] * (spatial - 2)))
        for u in ((Fraction(3, 5), Fraction(4, 5)), (Fraction(-4, 5), Fraction(3, 5))):
            photons.append((anchor, list(u) + [Fraction(0)] * (spatial - 2)))
    for index, (anchor, direction) in enumerate(photons):
        model = model.with_photon(f"photon-{index + 1}", Photon.from_spatial(anchor, direction))
    return model


def events_agree(model: Model, m: Body, x: SpacetimeVec, k: Body, y: SpacetimeVec) -> bool:
    """``ev_m(x) = ev_k(y)`` over the registry plus the sentinel photons through ``m(x)``.

    The sentinels stand in for the full carrier (every slope-1 line), which
    separates distinct events even where no registered body passes.
    """

    sentinels = sentinel_photons(_observer_map(m).apply(x))
    bodies = list(model.bodies) + list(sentinels)
    agree = all(worldview(m, b, x) == worldview(k, b, y) for b in bodies)
    k_map = _observer_map(k)
    if _observer_map(m).verified and k_map.verified:
        expected = worldview_transform(m, k).apply(x) == y
        if agree != expected:
            raise SpecRelError("Event agreement disagrees with w_mk(x) = y")
    return agree
