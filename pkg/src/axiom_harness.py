"""Exact, seeded checkers for the axioms of SpecRel_d plus AxThExp-.

Each checker draws its samples from ``random.Random(f"{seed}:{axiom}:{index}")``
so a sample depends only on its index, never on evaluation order.  A sample is
stored as a plain JSON-ready *case* dict; the matching ``_*_violation``
function evaluates one case exactly and returns a reason string when the
axiom fails on it.  A failing report keeps the case as its witness, and
:func:`replay_witness` feeds it back through the same function.
"""

from __future__ import annotations

import logging
import operator
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .approx_engine import ApproxCertificate, observer_with_velocity
from .errors import DomainError, SearchExhaustedError, UsageError
from .exact_core import format_fraction, format_fractions, parse_fraction, rational_sqrt, to_rational
from .minkowski_linalg import (
    PoincareMap,
    SpacetimeVec,
    is_lorentz,
    nullspace,
    space_sq,
    time_diff,
)
from .rational_sphere import DEFAULT_MAX_DENOMINATOR_BITS, stereographic
from .specrel_model import (
    Body,
    Model,
    connecting_photon,
    events_agree,
    worldline,
    worldview,
    worldview_transform,
)

logger = logging.getLogger(__name__)

AXPH = "AxPh"
AXOFIELD = "AxOField"
AXEV = "AxEv"
AXSELF = "AxSelf"
AXSYMD = "AxSymD"
AXTHEXP = "AxThExp-"

AXIOMS = (AXPH, AXOFIELD, AXEV, AXSELF, AXSYMD, AXTHEXP)

DEFAULT_SAMPLES: Dict[str, int] = {
    AXPH: 1000,
    AXOFIELD: 1000,
    AXEV: 1000,
    AXSELF: 1000,
    AXSYMD: 500,
    AXTHEXP: 100,
}

Comparator = Callable[[Fraction, Fraction], bool]
Case = Dict[str, Any]


@dataclass
class AxiomReport:
    axiom: str
    samples: int
    seed: int
    status: str = "pass"
    witness: Optional[Case] = None
    light_speed: Optional[Fraction] = None
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        payload: Dict[str, Any] = {
            "axiom": self.axiom,
            "status": self.status,
            "samples": self.samples,
            "seed": self.seed,
        }
        if self.skipped:
            payload["skipped"] = self.skipped
        if self.light_speed is not None:
            payload["light_speed"] = format_fraction(self.light_speed)
        if self.witness is not None:
            payload["witness"] = self.witness
        return payload


@dataclass(frozen=True)
class ThExpWitness:
    """Observer ``k`` moving with velocity ``w`` in ``m``'s frame, seen at ``x`` and ``y``."""

    observer: PoincareMap
    x: SpacetimeVec
    y: SpacetimeVec
    velocity: Tuple[Fraction, ...]
    lam: Fraction
    certificate: ApproxCertificate

    def to_dict(self) -> dict:
        return {
            "observer": self.observer.to_dict(),
            "x": self.x.to_list(),
            "y": self.y.to_list(),
            "velocity": format_fractions(self.velocity),
            "lambda": format_fraction(self.lam),
            "certificate": self.certificate.to_dict(),
        }


@dataclass
class HarnessConfig:
    seed: int = 1
    samples: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    coordinate_bits: int = 16
    thexp_eps: Fraction = Fraction(1, 1000)
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS
    axioms: Optional[Sequence[str]] = None

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "HarnessConfig":
        harness = settings.get("harness", {})
        samples = dict(DEFAULT_SAMPLES)
        samples.update({name: int(count) for name, count in harness.get("samples", {}).items()})
        return cls(
            seed=int(harness.get("seed", 1)),
            samples=samples,
            coordinate_bits=int(harness.get("coordinate_bits", 16)),
            thexp_eps=to_rational(str(harness.get("thexp_eps", "1/1000"))),
            max_bits=int(settings.get("search", {}).get("max_denominator_bits", DEFAULT_MAX_DENOMINATOR_BITS)),
        )

    def with_overrides(
        self,
        seed: Optional[int] = None,
        samples: Optional[int] = None,
        axioms: Optional[Sequence[str]] = None,
    ) -> "HarnessConfig":
        counts = {name: samples for name in AXIOMS} if samples is not None else dict(self.samples)
        return HarnessConfig(
            seed=self.seed if seed is None else seed,
            samples=counts,
            coordinate_bits=self.coordinate_bits,
            thexp_eps=self.thexp_eps,
            max_bits=self.max_bits,
            axioms=axioms if axioms else self.axioms,
        )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_rng(seed: int, axiom: str, index: int) -> random.Random:
    return random.Random(f"{seed}:{axiom}:{index}")


def random_rational(rng: random.Random, bits: int = 16) -> Fraction:
    """Numerator uniform in ``[-2**bits, 2**bits]``, denominator in ``[1, 2**bits]``."""

    bound = 1 << bits
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_point(rng: random.Random, d: int, bits: int = 16) -> SpacetimeVec:
    return SpacetimeVec(tuple(random_rational(rng, bits) for _ in range(d)))


def random_nonzero(rng: random.Random, bits: int = 16) -> Fraction:
    value = random_rational(rng, bits)
    return value if value != 0 else Fraction(1)


def random_velocity(rng: random.Random, d: int, bits: int = 16) -> Tuple[Fraction, ...]:
    """Sub-light velocity: a random speed in ``[0, 1)`` along an l1-normalised random vector."""

    bound = 1 << bits
    u = [random_rational(rng, bits) for _ in range(d - 1)]
    total = sum(abs(c) for c in u)
    if total == 0:
        return tuple(Fraction(0) for _ in u)
    speed = Fraction(rng.randint(0, bound - 1), bound)
    return tuple(speed * c / total for c in u)


def _vec(values: Sequence[Any]) -> SpacetimeVec:
    return SpacetimeVec(tuple(parse_fraction(str(v)) for v in values))


def _fail(report: AxiomReport, case: Case, reason: str) -> AxiomReport:
    report.status = "fail"
    report.witness = dict(case, reason=reason)
    logger.warning("%s failed at seed %s: %s", report.axiom, report.seed, reason)
    return report


# ---------------------------------------------------------------------------
# AxPh
# ---------------------------------------------------------------------------


def light_speed_sq(mapping: PoincareMap) -> Optional[Fraction]:
    """``c_m**2`` measured on the pullback of an ``Id``-frame photon through ``m(o)``."""

    d = mapping.dim
    inv = mapping.inverse()
    start = inv.apply(mapping.translation)
    end = inv.apply(mapping.translation + SpacetimeVec.of(1, 1, *([0] * (d - 2))))
    dt = time_diff(start, end)
    if dt == 0:
        return None
    return space_sq(start, end) / (dt * dt)


def _axph_case(rng: random.Random, model: Model, bits: int) -> Case:
    m = rng.choice(model.observers())
    d = model.dimension
    kind = rng.randrange(3)
    x = random_point(rng, d, bits)
    if kind == 1:
        # lightlike in m's own coordinates
        u = stereographic([random_rational(rng, bits) for _ in range(d - 2)]).coords
        y = x + SpacetimeVec((Fraction(1),) + u).scale(random_nonzero(rng, bits))
    elif kind == 2 and model.photons():
        photon = rng.choice(model.photons()).id_frame_line()
        try:
            inv = m.mapping.inverse()
        except DomainError:
            y = random_point(rng, d, bits)
        else:
            x = inv.apply(photon.point_at(random_rational(rng, bits)))
            y = inv.apply(photon.point_at(random_rational(rng, bits)))
    else:
        y = random_point(rng, d, bits)
    return {"observer": m.name, "x": x.to_list(), "y": y.to_list()}


def _axph_violation(model: Model, case: Case) -> Optional[str]:
    m = model.body(case["observer"])
    x, y = _vec(case["x"]), _vec(case["y"])
    try:
        c_sq = light_speed_sq(m.mapping)
    except DomainError:
        return f"observer {m.name!r} is not invertible, no light speed"
    if c_sq is None or c_sq <= 0:
        return f"observer {m.name!r} has no positive light speed"

    photon = connecting_photon(m, x, y)
    if photon is not None:
        connecting = Body.of_photon("connecting", photon)
        if not (worldview(m, connecting, x) and worldview(m, connecting, y)):
            return "constructed photon does not pass through both points"
    exists = photon is not None or any(
        worldview(m, b, x) and worldview(m, b, y) for b in model.photons()
    )
    expected = space_sq(x, y) == c_sq * time_diff(x, y) ** 2
    if exists != expected:
        return f"photon through the pair: {exists}, but space2 = c^2 time2 is {expected}"
    return None


def check_axph(model: Model, samples: int, seed: int, bits: int = 16) -> AxiomReport:
    if samples <= 0:
        raise UsageError(f"samples must be positive, got {samples}")
    report = AxiomReport(AXPH, 0, seed)
    for index in range(samples):
        case = _axph_case(sample_rng(seed, AXPH, index), model, bits)
        report.samples += 1
        reason = _axph_violation(model, case)
        if reason is not None:
            return _fail(report, case, reason)

    speeds = set()
    for observer in model.observers():
        try:
            c_sq = light_speed_sq(observer.mapping)
        except DomainError:
            c_sq = None
        speeds.add(rational_sqrt(c_sq) if c_sq is not None else None)
    if len(speeds) == 1:
        report.light_speed = speeds.pop()
    logger.info("%s passed %s samples (c=%s)", AXPH, report.samples, report.light_speed)
    return report


# ---------------------------------------------------------------------------
# AxOField
# ---------------------------------------------------------------------------


def _field_laws(le: Comparator) -> Dict[str, Callable[[Fraction, Fraction, Fraction], bool]]:
    return {
        "add_assoc": lambda x, y, z: (x + y) + z == x + (y + z),
        "add_comm": lambda x, y, z: x + y == y + x,
        "mul_assoc": lambda x, y, z: (x * y) * z == x * (y * z),
        "mul_comm": lambda x, y, z: x * y == y * x,
        "distributive": lambda x, y, z: x * (y + z) == x * y + x * z,
        "add_identity": lambda x, y, z: x + 0 == x,
        "mul_identity": lambda x, y, z: x * 1 == x,
        "add_inverse": lambda x, y, z: x + (-x) == 0,
        "mul_inverse": lambda x, y, z: x == 0 or x * (1 / x) == 1,
        "total": lambda x, y, z: le(x, y) or le(y, x),
        "antisymmetric": lambda x, y, z: not (le(x, y) and le(y, x)) or x == y,
        "transitive": lambda x, y, z: not (le(x, y) and le(y, z)) or le(x, z),
        "add_compatible": lambda x, y, z: not le(x, y) or le(x + z, y + z),
        "mul_compatible": lambda x, y, z: not (le(0, x) and le(0, y)) or le(0, x * y),
    }


def _axofield_violation(case: Case, le: Optional[Comparator] = None) -> Optional[str]:
    laws = _field_laws(le or operator.le)
    x, y, z = (parse_fraction(case[key]) for key in ("x", "y", "z"))
    if not laws[case["law"]](x, y, z):
        return f"law {case['law']} fails"
    return None


def check_axofield(
    samples: int = 1000,
    seed: int = 1,
    le: Optional[Comparator] = None,
    bits: int = 16,
) -> AxiomReport:
    """Field and order laws on seeded random rational triples.

    ``le`` replaces the order relation; the harness self-test passes a broken
    comparator here.
    """

    if samples <= 0:
        raise UsageError(f"samples must be positive, got {samples}")
    report = AxiomReport(AXOFIELD, 0, seed)
    law_names = list(_field_laws(operator.le))
    for index in range(samples):
        rng = sample_rng(seed, AXOFIELD, index)
        x, y, z = (random_rational(rng, bits) for _ in range(3))
        report.samples += 1
        for law in law_names:
            case = {"law": law, "x": format_fraction(x), "y": format_fraction(y), "z": format_fraction(z)}
            reason = _axofield_violation(case, le)
            if reason is not None:
                return _fail(report, case, reason)
    logger.info("%s passed %s samples", AXOFIELD, report.samples)
    return report


# ---------------------------------------------------------------------------
# AxEv
# ---------------------------------------------------------------------------


def _axev_violation(model: Model, case: Case) -> Optional[str]:
    m, k = model.body(case["m"]), model.body(case["k"])
    x = _vec(case["x"])
    target = m.mapping.apply(x) - k.mapping.translation
    solution = k.mapping.matrix.solve(target.coords)
    if solution is None:
        return f"no unique event of {k.name!r} matches {m.name!r} at x"
    y = SpacetimeVec(solution)
    if not events_agree(model, m, x, k, y):
        return "events disagree at the solved coordinates"
    if events_agree(model, m, x, k, y + SpacetimeVec.unit_time(model.dimension)):
        return "a second event of k agrees with ev_m(x)"
    return None


def check_axev(model: Model, samples: int, seed: int, bits: int = 16) -> AxiomReport:
    if len(model.observers()) < 2:
        raise UsageError("AxEv needs at least two observers")
    report = AxiomReport(AXEV, 0, seed)
    observers = model.observers()
    for index in range(samples):
        rng = sample_rng(seed, AXEV, index)
        m, k = rng.choice(observers), rng.choice(observers)
        case = {"m": m.name, "k": k.name, "x": random_point(rng, model.dimension, bits).to_list()}
        report.samples += 1
        reason = _axev_violation(model, case)
        if reason is not None:
            return _fail(report, case, reason)
    logger.info("%s passed %s samples", AXEV, report.samples)
    return report


# ---------------------------------------------------------------------------
# AxSelf
# ---------------------------------------------------------------------------


def _axself_violation(model: Model, case: Case) -> Optional[str]:
    m = model.body(case["observer"])
    x = _vec(case["x"])
    if worldview(m, m, x) != x.is_spatially_zero():
        return f"W(m, m, x) is {not x.is_spatially_zero()} off/on the time axis"
    return None


def check_axself(model: Model, samples: int, seed: int, bits: int = 16) -> AxiomReport:
    report = AxiomReport(AXSELF, 0, seed)
    observers = model.observers()
    for index in range(samples):
        rng = sample_rng(seed, AXSELF, index)
        m = observers[index % len(observers)]
        coords = [random_rational(rng, bits)]
        if rng.random() < 0.5:
            coords += [Fraction(0)] * (model.dimension - 1)
        else:
            spatial = [random_rational(rng, bits) if rng.random() < 0.5 else Fraction(0) for _ in range(model.dimension - 1)]
            if not any(spatial):
                spatial[rng.randrange(len(spatial))] = random_nonzero(rng, bits)
            coords += spatial
        case = {"observer": m.name, "x": format_fractions(coords)}
        report.samples += 1
        reason = _axself_violation(model, case)
        if reason is not None:
            return _fail(report, case, reason)
    logger.info("%s passed %s samples", AXSELF, report.samples)
    return report


# ---------------------------------------------------------------------------
# AxSymD
# ---------------------------------------------------------------------------


def _axsymd_violation(model: Model, case: Case) -> Optional[str]:
    if case["clause"] == "light":
        m = model.body(case["observer"])
        d = model.dimension
        x, y = SpacetimeVec.origin(d), SpacetimeVec.of(1, 1, *([0] * (d - 2)))
        photon = connecting_photon(m, x, y)
        if photon is None:
            return f"no photon through o and (1, 1, 0, ...) for {m.name!r}"
        return None

    m, k = model.body(case["m"]), model.body(case["k"])
    x, y = _vec(case["x"]), _vec(case["y"])
    try:
        transform = worldview_transform(m, k)
    except DomainError:
        return f"w_mk undefined for {m.name!r}, {k.name!r}"
    x_k, y_k = transform.apply(x), transform.apply(y)
    if time_diff(x, y) != 0 or time_diff(x_k, y_k) != 0:
        return "pair is not simultaneous for both observers"
    if space_sq(x, y) != space_sq(x_k, y_k):
        return f"space2 {space_sq(x, y)} != {space_sq(x_k, y_k)}"
    return None


def check_axsymd(model: Model, samples: int, seed: int, bits: int = 16) -> AxiomReport:
    """Distance agreement on doubly simultaneous pairs, plus light speed 1 for every observer."""

    report = AxiomReport(AXSYMD, 0, seed)
    for observer in model.observers():
        case = {"clause": "light", "observer": observer.name}
        reason = _axsymd_violation(model, case)
        if reason is not None:
            return _fail(report, case, reason)

    observers = model.observers()
    d = model.dimension
    e0 = [Fraction(1)] + [Fraction(0)] * (d - 1)
    for index in range(samples):
        rng = sample_rng(seed, AXSYMD, index)
        m, k = rng.choice(observers), rng.choice(observers)
        try:
            row = worldview_transform(m, k).matrix.rows[0]
        except DomainError:
            case = {"clause": "distance", "m": m.name, "k": k.name, "x": SpacetimeVec.origin(d).to_list(), "y": SpacetimeVec.origin(d).to_list()}
            return _fail(report, case, f"w_mk undefined for {m.name!r}, {k.name!r}")
        basis = nullspace([e0, list(row)])
        offset = [Fraction(0)] * d
        for vector in basis:
            coeff = random_rational(rng, bits)
            offset = [o + coeff * v for o, v in zip(offset, vector)]
        if not any(offset):
            report.skipped += 1
            continue
        x = random_point(rng, d, bits)
        y = x + SpacetimeVec(tuple(offset))
        case = {"clause": "distance", "m": m.name, "k": k.name, "x": x.to_list(), "y": y.to_list()}
        report.samples += 1
        reason = _axsymd_violation(model, case)
        if reason is not None:
            return _fail(report, case, reason)
    logger.info("%s passed %s samples (%s degenerate skipped)", AXSYMD, report.samples, report.skipped)
    return report


# ---------------------------------------------------------------------------
# AxThExp-
# ---------------------------------------------------------------------------


def witness_axthexp_minus(
    model: Model,
    m: Body,
    vbar: Sequence[Any],
    eps: Any,
    seed: Any,
    bits: int = 16,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> ThExpWitness:
    """Observer ``k`` seen by ``m`` at two events and moving with velocity within ``eps`` of ``vbar``.

    ``L*`` comes from :func:`observer_with_velocity`; ``P* = L* + x`` is the
    worldview transformation ``w_km``, so ``k = m o P*``.
    """

    d = model.dimension
    linear, achieved, certificate = observer_with_velocity(vbar, eps, d, max_bits)
    rng = random.Random(f"{seed}:witness")
    x = random_point(rng, d, bits)
    lam = random_nonzero(rng, bits)
    y = x + SpacetimeVec((Fraction(1),) + tuple(achieved)).scale(lam)
    p_star = PoincareMap(linear.linear, x)
    k_map = m.mapping.compose(p_star)
    logger.debug("AxThExp- witness for %s at lambda=%s", m.name, lam)
    return ThExpWitness(k_map, x, y, tuple(achieved), lam, certificate)


def verify_thexp_witness(
    model: Model,
    m: Body,
    witness: ThExpWitness,
    vbar: Sequence[Any],
    eps: Any,
) -> Optional[str]:
    """Re-check a witness in exact arithmetic; returns the first broken property."""

    v = tuple(to_rational(c) for c in vbar)
    eps = to_rational(eps)
    k = Body.of_observer("k", witness.observer)
    if not is_lorentz(witness.observer.matrix):
        return "k is not a Poincare transformation"
    if witness.observer.matrix.entry(0, 0) <= 0:
        return "k is not orthochronous"
    if not (worldview(m, k, witness.x) and worldview(m, k, witness.y)):
        return "m does not see k at both events"
    step = SpacetimeVec((Fraction(1),) + witness.velocity).scale(witness.lam)
    if witness.y - witness.x != step:
        return "y - x is not lambda (1, w)"
    try:
        line = worldline(m, k)
    except DomainError:
        return f"observer {m.name!r} is not invertible"
    if line.pivot != 0 or line.direction.spatial != witness.velocity:
        return "worldline of k does not move with velocity w"
    miss_sq = sum(((a - b) ** 2 for a, b in zip(v, witness.velocity)), Fraction(0))
    if miss_sq >= eps * eps:
        return f"|v - w|^2 = {miss_sq} is not below eps^2"
    return None


def _axthexp_violation(model: Model, case: Case, max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS) -> Optional[str]:
    m = model.body(case["observer"])
    vbar = [parse_fraction(c) for c in case["velocity"]]
    eps = parse_fraction(case["eps"])
    try:
        witness = witness_axthexp_minus(model, m, vbar, eps, case["seed"], max_bits=max_bits)
    except SearchExhaustedError as exc:
        return f"no witness: {exc}"
    return verify_thexp_witness(model, m, witness, vbar, eps)


def check_axthexp_minus(
    model: Model,
    samples: int,
    seed: int,
    eps: Any = Fraction(1, 1000),
    bits: int = 16,
    max_bits: int = DEFAULT_MAX_DENOMINATOR_BITS,
) -> AxiomReport:
    report = AxiomReport(AXTHEXP, 0, seed)
    observers = model.observers()
    for index in range(samples):
        rng = sample_rng(seed, AXTHEXP, index)
        m = rng.choice(observers)
        case = {
            "observer": m.name,
            "velocity": format_fractions(random_velocity(rng, model.dimension, bits)),
            "eps": format_fraction(to_rational(eps)),
            "seed": f"{seed}:{index}",
        }
        report.samples += 1
        reason = _axthexp_violation(model, case, max_bits)
        if reason is not None:
            return _fail(report, case, reason)
    logger.info("%s passed %s samples", AXTHEXP, report.samples)
    return report


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


def replay_witness(model: Model, report: AxiomReport, le: Optional[Comparator] = None) -> Optional[str]:
    """Evaluate a failing report's witness again; returns the violation it reproduces."""

    if report.witness is None:
        raise UsageError(f"{report.axiom} report carries no witness")
    case = report.witness
    if report.axiom == AXPH:
        return _axph_violation(model, case)
    if report.axiom == AXOFIELD:
        return _axofield_violation(case, le)
    if report.axiom == AXEV:
        return _axev_violation(model, case)
    if report.axiom == AXSELF:
        return _axself_violation(model, case)
    if report.axiom == AXSYMD:
        return _axsymd_violation(model, case)
    if report.axiom == AXTHEXP:
        return _axthexp_violation(model, case)
    raise UsageError(f"Unknown axiom {report.axiom!r}")


def run_suite(model: Model, config: Optional[HarnessConfig] = None) -> List[AxiomReport]:
    config = config or HarnessConfig()
    selected = list(config.axioms) if config.axioms else list(AXIOMS)
    unknown = [name for name in selected if name not in AXIOMS]
    if unknown:
        raise UsageError(f"Unknown axiom(s): {', '.join(unknown)}")
    seed, bits = config.seed, config.coordinate_bits

    def count(name: str) -> int:
        return config.samples.get(name, DEFAULT_SAMPLES[name])

    reports = []
    for name in AXIOMS:
        if name not in selected:
            continue
        if name == AXPH:
            reports.append(check_axph(model, count(name), seed, bits))
        elif name == AXOFIELD:
            reports.append(check_axofield(count(name), seed, bits=bits))
        elif name == AXEV:
            reports.append(check_axev(model, count(name), seed, bits))
        elif name == AXSELF:
            reports.append(check_axself(model, count(name), seed, bits))
        elif name == AXSYMD:
            reports.append(check_axsymd(model, count(name), seed, bits))
        else:
            reports.append(check_axthexp_minus(model, count(name), seed, config.thexp_eps, bits, config.max_bits))
    failures = sum(1 for r in reports if not r.passed)
    logger.info("Axiom suite: %s checked, %s failed (seed=%s)", len(reports), failures, seed)
    return reports
