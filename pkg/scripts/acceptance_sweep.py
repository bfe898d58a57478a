"""Seeded desk-scale sweeps over the approximation engine and the axiom suite."""
import logging
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.approx_engine import (  # noqa: E402
    OrthogonalSpec,
    PlanarRotation,
    PoincareSpec,
    approx_boost,
    approx_orthogonal,
    approx_poincare,
    observer_with_velocity,
    target_orthogonal_enclosure,
    target_poincare_enclosure,
    target_velocity_boost_enclosure,
)
from src.axiom_harness import HarnessConfig, random_point, random_velocity, run_suite, verify_thexp_witness, witness_axthexp_minus  # noqa: E402
from src.minkowski_linalg import frobenius_distance_sq, is_lorentz, is_orthogonal  # noqa: E402
from src.rational_sphere import nearest_rational_direction  # noqa: E402
from src.specrel_model import default_model  # noqa: E402
from src.utils import AppConfig, setup_logging  # noqa: E402

logger = logging.getLogger("acceptance_sweep")

# targets are re-enclosed at this width, independently of the certificate
REEVALUATION_WIDTH = Fraction(1, 10**8)


def sweep_boosts(rng: random.Random, count: int = 200) -> int:
    failures = 0
    for _ in range(count):
        v = Fraction(rng.randint(0, 9999), 10000)
        for eps in (Fraction(1, 10**2), Fraction(1, 10**6), Fraction(1, 10**9)):
            speed, cert = approx_boost(v, eps, 2)
            if not (cert.error_bound < eps and abs(v - speed.w) < eps and is_lorentz(cert.output)):
                failures += 1
                logger.error("boost v=%s eps=%s not certified", v, eps)
    return failures


def sweep_rotations(rng: random.Random, count: int = 100) -> int:
    failures = 0
    eps = Fraction(1, 10**6)
    for index in range(count):
        n = 2 + index % 2
        toward = (Fraction(rng.randint(-999, 999), 1000), Fraction(rng.randint(1, 999), 1000))
        spec = OrthogonalSpec((PlanarRotation((1, 2), toward),))
        matrix, cert = approx_orthogonal(spec, eps, n)
        independent = frobenius_distance_sq(target_orthogonal_enclosure(spec, n, REEVALUATION_WIDTH), matrix)
        if not (cert.error_bound < eps and is_orthogonal(matrix) and independent.lo <= cert.error_bound**2):
            failures += 1
            logger.error("rotation toward %s in n=%s not certified", toward, n)
    return failures


def sweep_poincare(rng: random.Random, count: int = 100) -> int:
    failures = 0
    eps = Fraction(1, 10**4)
    for index in range(count):
        d = 2 + index % 3
        translation = random_point(rng, d, 8)
        speed = Fraction(rng.randint(0, 999), 1000)
        if d >= 3:
            spec = PoincareSpec.boost_toward(translation, speed, (1, 2), (rng.randint(1, 9), rng.randint(1, 9)))
        else:
            spec = PoincareSpec.from_dict({"translation": translation.to_list(), "speed": str(speed)})
        mapping, cert = approx_poincare(spec, eps, d)
        independent = frobenius_distance_sq(target_poincare_enclosure(spec, d, REEVALUATION_WIDTH), mapping.matrix)
        if not (cert.error_bound < eps and is_lorentz(mapping.matrix) and independent.lo <= cert.error_bound**2):
            failures += 1
            logger.error("poincare spec %s not certified", spec.to_dict())
    return failures


def sweep_observers(rng: random.Random, count: int = 100) -> int:
    failures = 0
    for index in range(count):
        d = 2 + index % 3
        vbar = random_velocity(rng, d, 8)
        eps = Fraction(1, 10 ** (2 + 2 * (index % 3)))
        mapping, _, cert = observer_with_velocity(vbar, eps, d)
        independent = frobenius_distance_sq(target_velocity_boost_enclosure(vbar, REEVALUATION_WIDTH), mapping.matrix)
        if not (cert.error_bound < eps and is_lorentz(mapping.matrix) and independent.lo <= cert.error_bound**2):
            failures += 1
            logger.error("observer for %s eps=%s not certified", vbar, eps)
    return failures


def sweep_directions(rng: random.Random, count: int = 100) -> int:
    failures = 0
    eps = Fraction(1, 10**6)
    for index in range(count):
        target = [Fraction(rng.randint(-999, 999), rng.randint(1, 999)) for _ in range(2 + index % 2)]
        if not any(target):
            continue
        point = nearest_rational_direction(target, eps)
        if sum(c * c for c in point) != 1:
            failures += 1
    return failures


def sweep_witnesses(rng: random.Random, count: int = 100) -> int:
    failures = 0
    model = default_model(4)
    m = model.identity
    for index in range(count):
        vbar = random_velocity(rng, 4)
        eps = Fraction(1, 10 ** (3 + index % 4))
        witness = witness_axthexp_minus(model, m, vbar, eps, index)
        violation = verify_thexp_witness(model, m, witness, vbar, eps)
        if violation is not None:
            failures += 1
            logger.error("witness for %s: %s", vbar, violation)
    return failures


def main():
    config = AppConfig.load()
    setup_logging(config.settings, "INFO")
    rng = random.Random(1)
    total = 0
    for name, sweep in (
        ("boosts", sweep_boosts),
        ("rotations", sweep_rotations),
        ("poincare", sweep_poincare),
        ("observers", sweep_observers),
        ("directions", sweep_directions),
        ("witnesses", sweep_witnesses),
    ):
        started = time.perf_counter()
        failures = sweep(rng)
        total += failures
        print(f"{name:<11} failures={failures} ({time.perf_counter() - started:.1f}s)")

    harness = HarnessConfig.from_settings(config.settings)
    for d in (2, 3, 4):
        reports = run_suite(default_model(d), harness)
        failed = [r.axiom for r in reports if not r.passed]
        total += len(failed)
        print(f"model d={d}  failed axioms: {failed or 'none'}")
    sys.exit(1 if total else 0)


if __name__ == "__main__":
    main()
