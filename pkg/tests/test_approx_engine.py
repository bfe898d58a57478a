import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.approx_engine import (
    BoostSpec,
    OrthogonalSpec,
    PlanarRotation,
    PoincareSpec,
    PythagoreanSpeed,
    achieved_velocity,
    approx_boost,
    approx_orthogonal,
    approx_poincare,
    boost_error_bound,
    boost_matrix,
    compose_with_bound,
    observer_with_velocity,
    operator_norm_bound_boost,
    planar_rotation_matrix,
    target_orthogonal_enclosure,
    target_poincare_enclosure,
    target_velocity_boost_enclosure,
    velocity_boost_matrix,
)
from src.axiom_harness import random_point
from src.errors import DomainError, UsageError
from src.minkowski_linalg import (
    RationalMatrix,
    SpacetimeVec,
    frobenius_distance_sq,
    frobenius_upper,
    is_lorentz,
    is_orthogonal,
    lift_intervals,
)

THREE_FIFTHS = PythagoreanSpeed(Fraction(3, 5), Fraction(4, 5))


def test_pythagorean_speed_invariants():
    assert PythagoreanSpeed.from_speed(Fraction(8, 17)).r == Fraction(15, 17)
    with pytest.raises(DomainError):
        PythagoreanSpeed(Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(DomainError):
        PythagoreanSpeed.from_speed(Fraction(1, 2))


def test_boost_matrix_examples():
    assert boost_matrix(THREE_FIFTHS, 2).matrix == RationalMatrix.of([["5/4", "-3/4"], ["-3/4", "5/4"]])
    assert boost_matrix(PythagoreanSpeed(Fraction(0), Fraction(1)), 3).matrix == RationalMatrix.identity(3)
    wide = boost_matrix(THREE_FIFTHS, 4).matrix
    assert wide.entry(0, 1) == Fraction(-3, 4)
    assert wide.entry(2, 2) == 1 and wide.entry(3, 3) == 1 and wide.entry(2, 3) == 0


def test_boost_spec_rejects_light_speed():
    with pytest.raises(DomainError, match=r"speed must satisfy \|v\| < 1"):
        BoostSpec(Fraction(3, 2))


def test_approx_boost_returns_pythagorean_speeds_exactly():
    speed, cert = approx_boost(Fraction(3, 5), Fraction(1, 100), 2)
    assert speed.w == Fraction(3, 5)
    assert cert.error_bound == 0
    speed, cert = approx_boost(0, Fraction(1, 10**9), 4)
    assert speed.w == 0 and cert.error_bound == 0
    assert cert.output == RationalMatrix.identity(4)


def test_approx_boost_one_half():
    eps = Fraction(1, 10)
    speed, cert = approx_boost(Fraction(1, 2), eps, 2)
    assert cert.error_bound < eps
    assert abs(Fraction(1, 2) - speed.w) < eps
    assert is_lorentz(cert.output)
    # the textbook answer 8/17 is admissible too
    assert boost_error_bound(Fraction(1, 2), PythagoreanSpeed.from_speed(Fraction(8, 17)), Fraction(1, 10**6)) < eps
    assert abs(Fraction(1, 2) - Fraction(8, 17)) == Fraction(1, 34)


def test_approx_boost_negative_speed_uses_symmetry():
    speed, cert = approx_boost(Fraction(-3, 5), Fraction(1, 10), 2)
    assert speed.w == Fraction(3, 5)
    assert cert.output == velocity_boost_matrix(THREE_FIFTHS, 2).matrix


def test_shrinking_eps_never_grows_the_bound():
    for k in range(1, 200, 7):
        v = Fraction(k, 200)
        for eps in (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)):
            _, coarse = approx_boost(v, eps, 2)
            _, fine = approx_boost(v, eps / 10, 2)
            assert fine.error_bound <= coarse.error_bound
            assert fine.error_bound < eps / 10


@pytest.mark.parametrize("toward", [(1, 1), (1, 2), (2, 3)])
def test_shrinking_eps_never_grows_the_orthogonal_bound(toward):
    spec = OrthogonalSpec((PlanarRotation((1, 2), toward),))
    _, coarse = approx_orthogonal(spec, Fraction(1, 100), 2)
    _, fine = approx_orthogonal(spec, Fraction(1, 1000), 2)
    assert fine.error_bound <= coarse.error_bound < Fraction(1, 100)


def test_shrinking_eps_never_grows_the_observer_bound():
    v = (Fraction(1, 2), Fraction(1, 3), Fraction(0))
    _, _, coarse = observer_with_velocity(v, Fraction(1, 100), 4)
    _, _, fine = observer_with_velocity(v, Fraction(1, 1000), 4)
    assert fine.error_bound <= coarse.error_bound


@settings(max_examples=50, derandomize=True, deadline=None)
@given(
    v=st.fractions(min_value=0, max_value=Fraction(99, 100), max_denominator=1000),
    exponent=st.sampled_from([2, 6, 9]),
)
def test_approx_boost_is_certified(v, exponent):
    eps = Fraction(1, 10**exponent)
    speed, cert = approx_boost(v, eps, 2)
    assert cert.error_bound < eps
    assert abs(v - speed.w) < eps
    assert is_lorentz(cert.output)


def test_approx_orthogonal_examples():
    matrix, cert = approx_orthogonal(OrthogonalSpec((PlanarRotation((1, 2), (4, 3)),)), Fraction(1, 100), 2)
    assert matrix == RationalMatrix.of([["4/5", "-3/5"], ["3/5", "4/5"]])
    assert cert.error_bound == 0

    matrix, cert = approx_orthogonal(OrthogonalSpec(), Fraction(1, 100), 3)
    assert matrix == RationalMatrix.identity(3) and cert.error_bound == 0

    matrix, cert = approx_orthogonal(OrthogonalSpec((PlanarRotation((1, 2), (1, 1)),)), Fraction(1, 100), 2)
    assert is_orthogonal(matrix)
    assert cert.error_bound < Fraction(1, 100)


def test_approx_orthogonal_with_flips_and_two_rotations():
    spec = OrthogonalSpec(
        (PlanarRotation((1, 2), (1, 2)), PlanarRotation((2, 3), (2, -1))),
        (False, False, True),
    )
    matrix, cert = approx_orthogonal(spec, Fraction(1, 10**6), 3)
    assert is_orthogonal(matrix)
    assert cert.error_bound < Fraction(1, 10**6)


def test_orthogonal_spec_validation():
    with pytest.raises(UsageError):
        PlanarRotation((1, 1), (1, 0))
    with pytest.raises(DomainError):
        PlanarRotation((1, 2), (0, 0))
    with pytest.raises(UsageError):
        approx_orthogonal(OrthogonalSpec((PlanarRotation((1, 4), (1, 1)),)), Fraction(1, 10), 3)


def test_compose_with_bound_formula():
    identity = RationalMatrix.identity(2)
    product, bound = compose_with_bound([(identity, 0, 1), (identity, 0, 1)])
    assert product == identity and bound == 0
    _, bound = compose_with_bound([(identity, Fraction(1, 10), 1), (identity, Fraction(1, 10), 1)])
    assert bound == Fraction(21, 100)
    with pytest.raises(UsageError):
        compose_with_bound([])
    with pytest.raises(UsageError):
        compose_with_bound([(identity, -1, 1)])


small = st.fractions(min_value=-2, max_value=2, max_denominator=64)


def _check_compose_is_sound(entries, deltas):
    width = Fraction(1, 1 << 20)
    factors = []
    targets = []
    for k in range(3):
        target = RationalMatrix.of([entries[9 * k + 3 * i: 9 * k + 3 * i + 3] for i in range(3)])
        delta = RationalMatrix.of([[c / 100 for c in deltas[9 * k + 3 * i: 9 * k + 3 * i + 3]] for i in range(3)])
        targets.append(target)
        factors.append((target + delta, frobenius_upper(delta, width), frobenius_upper(target, width)))
    product, bound = compose_with_bound(factors)
    exact = targets[0] @ targets[1] @ targets[2]
    assert bound * bound >= (exact - product).frobenius_norm_sq()


matrices = st.lists(small, min_size=27, max_size=27)


@settings(max_examples=100, derandomize=True, deadline=None)
@given(entries=matrices, deltas=matrices)
def test_compose_with_bound_is_sound_for_rational_targets(entries, deltas):
    _check_compose_is_sound(entries, deltas)


@pytest.mark.slow
@settings(max_examples=1000, derandomize=True, deadline=None)
@given(entries=matrices, deltas=matrices)
def test_compose_with_bound_is_sound_at_acceptance_scale(entries, deltas):
    _check_compose_is_sound(entries, deltas)


def test_compose_with_bound_takes_operator_or_frobenius_norms():
    width = Fraction(1, 1 << 20)
    targets = [
        planar_rotation_matrix(Fraction(3, 5), Fraction(4, 5), (1, 2), 3),
        planar_rotation_matrix(Fraction(5, 13), Fraction(12, 13), (2, 3), 3),
    ]
    outputs = [
        planar_rotation_matrix(Fraction(8, 17), Fraction(15, 17), (1, 2), 3),
        planar_rotation_matrix(Fraction(7, 25), Fraction(24, 25), (2, 3), 3),
    ]
    errors = [frobenius_upper(t - o, width) for t, o in zip(targets, outputs)]
    product, operator = compose_with_bound([(o, e, 1) for o, e in zip(outputs, errors)])
    _, frobenius = compose_with_bound([(o, e, frobenius_upper(t, width)) for t, o, e in zip(targets, outputs, errors)])
    true_sq = (targets[0] @ targets[1] - product).frobenius_norm_sq()
    assert operator * operator >= true_sq
    assert operator <= frobenius


def test_axis_toward_turns_axis_one_toward_the_direction():
    spec = OrthogonalSpec.axis_toward((1, 2, 2))
    assert [rot.radial for rot in spec.rotations] == [False, True]
    target = target_orthogonal_enclosure(spec, 3, Fraction(1, 10**6))
    for row, expected in zip(target, (Fraction(1, 3), Fraction(2, 3), Fraction(2, 3))):
        assert row[0].contains(expected)

    eps = Fraction(1, 10**6)
    matrix, cert = approx_orthogonal(spec, eps, 3)
    assert is_orthogonal(matrix)
    assert cert.error_bound < eps
    assert sum((a - b) ** 2 for a, b in zip(matrix.column(0), (Fraction(1, 3), Fraction(2, 3), Fraction(2, 3)))) < eps * eps


def test_axis_toward_edge_directions():
    assert OrthogonalSpec.axis_toward((Fraction(3, 5), 0, 0)).rotations == ()
    assert OrthogonalSpec.axis_toward((Fraction(-1, 2),)) == OrthogonalSpec((), (True,))
    spec = OrthogonalSpec.axis_toward((0, 0, Fraction(-1, 4)))
    matrix, cert = approx_orthogonal(spec, Fraction(1, 100), 3)
    assert matrix.column(0) == (0, 0, -1)
    assert cert.error_bound == 0
    with pytest.raises(DomainError):
        OrthogonalSpec.axis_toward((0, 0))


def test_radial_rotation_round_trips_and_validates():
    spec = OrthogonalSpec((PlanarRotation((1, 3), (2, 1), radial=True),))
    assert spec.to_dict()["rotations"][0]["radial"] is True
    assert OrthogonalSpec.from_dict(spec.to_dict()) == spec
    assert PlanarRotation((1, 3), (Fraction(9, 16), 1), radial=True).rational_toward() == (Fraction(3, 4), 1)
    assert PlanarRotation((1, 3), (2, 1), radial=True).rational_toward() is None
    with pytest.raises(DomainError):
        PlanarRotation((1, 2), (-1, 1), radial=True)


def test_approx_poincare_identity_and_exact_specs():
    mapping, cert = approx_poincare(PoincareSpec.identity(4), Fraction(1, 100), 4)
    assert mapping.matrix == RationalMatrix.identity(4) and cert.error_bound == 0

    translation = SpacetimeVec.of(1, "1/2", -3)
    spec = PoincareSpec.boost_toward(translation, Fraction(3, 5), (1, 2), (3, 4))
    mapping, cert = approx_poincare(spec, Fraction(1, 100), 3)
    assert cert.error_bound == 0
    assert mapping.translation == translation
    assert is_lorentz(mapping.matrix)
    # the boost is pointed along (3/5, 4/5) in space
    assert achieved_velocity(mapping.matrix) == (Fraction(-9, 25), Fraction(-12, 25))


def test_approx_poincare_boost_toward_diagonal():
    eps = Fraction(1, 50)
    spec = PoincareSpec.boost_toward(SpacetimeVec.origin(3), Fraction(1, 2), (1, 2), (1, 1))
    mapping, cert = approx_poincare(spec, eps, 3)
    assert is_lorentz(mapping.matrix)
    assert cert.error_bound < eps
    target = target_poincare_enclosure(spec, 3, Fraction(1, 10**8))
    assert frobenius_distance_sq(target, mapping.matrix).lo <= cert.error_bound ** 2


def test_poincare_spec_round_trips_through_dict():
    spec = PoincareSpec.boost_toward(SpacetimeVec.of(0, 1, 2), Fraction(1, 2), (1, 2), (1, 1))
    assert PoincareSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(UsageError):
        PoincareSpec.from_dict({"speed": "1/2"})


def test_operator_norm_bound_boost():
    assert operator_norm_bound_boost(Fraction(3, 5)) == 2
    assert operator_norm_bound_boost(0) == 1


def test_observer_with_velocity_examples():
    mapping, achieved, cert = observer_with_velocity([0, 0, 0], Fraction(1, 100), 4)
    assert mapping.matrix == RationalMatrix.identity(4)
    assert achieved == (0, 0, 0) and cert.error_bound == 0

    v = (Fraction(3, 5), Fraction(0), Fraction(0))
    mapping, achieved, cert = observer_with_velocity(v, Fraction(1, 100), 4)
    assert achieved == v
    assert mapping.matrix == velocity_boost_matrix(THREE_FIFTHS, 4).matrix
    assert cert.error_bound == 0

    mapping, achieved, cert = observer_with_velocity([Fraction(-3, 5)], Fraction(1, 100), 2)
    assert achieved == (Fraction(-3, 5),)
    assert mapping.matrix == boost_matrix(THREE_FIFTHS, 2).matrix


def _assert_observer_certified(v, eps):
    mapping, achieved, cert = observer_with_velocity(v, eps, len(v) + 1)
    assert is_lorentz(mapping.matrix)
    assert mapping.matrix.entry(0, 0) > 0
    assert cert.error_bound < eps
    assert achieved_velocity(mapping.matrix) == achieved
    assert sum((a - b) ** 2 for a, b in zip(v, achieved)) < eps * eps
    # interval form of the real boost, built independently of the factorisation
    target = target_velocity_boost_enclosure(v, Fraction(1, 10**8))
    assert frobenius_distance_sq(target, mapping.matrix).lo <= cert.error_bound ** 2


@pytest.mark.parametrize(
    "v, eps",
    [
        ((Fraction(1, 2), Fraction(1, 3), Fraction(0)), Fraction(1, 1000)),
        ((Fraction(7, 10), Fraction(7, 10), Fraction(0)), Fraction(1, 10**6)),
        ((Fraction(0), Fraction(-1, 3), Fraction(1, 4)), Fraction(1, 10**4)),
        ((Fraction(-1, 2),), Fraction(1, 10**4)),
        ((Fraction(1, 7), Fraction(2, 7)), Fraction(1, 10**5)),
    ],
)
def test_observer_with_velocity_is_certified_against_the_real_boost(v, eps):
    _assert_observer_certified(v, eps)


@pytest.mark.slow
def test_observer_with_velocity_near_light_speed():
    _assert_observer_certified((Fraction(999, 1000), Fraction(0), Fraction(1, 100)), Fraction(1, 10**6))


def test_observer_with_velocity_preconditions():
    with pytest.raises(DomainError, match="speed must satisfy"):
        observer_with_velocity([Fraction(3, 5), Fraction(4, 5), 0], Fraction(1, 10), 4)
    with pytest.raises(UsageError):
        observer_with_velocity([Fraction(1, 2)], Fraction(1, 10), 4)
    with pytest.raises(DomainError):
        observer_with_velocity([Fraction(1, 2)], 0, 2)


def test_interval_target_of_rational_boost_is_exact():
    target = target_poincare_enclosure(PoincareSpec(SpacetimeVec.origin(2), BoostSpec(Fraction(3, 5))), 2, Fraction(1, 100))
    assert target == lift_intervals(boost_matrix(THREE_FIFTHS, 2).matrix)


@pytest.mark.slow
def test_rotations_at_acceptance_scale():
    rng = random.Random(7)
    eps = Fraction(1, 10**6)
    for index in range(100):
        n = 2 + index % 2
        plane = (1, 2) if n == 2 else rng.choice([(1, 2), (1, 3), (2, 3)])
        toward = (Fraction(rng.randint(-999, 999), 1000), Fraction(rng.randint(1, 999), 1000))
        spec = OrthogonalSpec((PlanarRotation(plane, toward),))
        matrix, cert = approx_orthogonal(spec, eps, n)
        assert is_orthogonal(matrix)
        assert cert.error_bound < eps
        target = target_orthogonal_enclosure(spec, n, Fraction(1, 10**8))
        assert frobenius_distance_sq(target, matrix).lo <= cert.error_bound ** 2


@pytest.mark.slow
def test_poincare_maps_at_acceptance_scale():
    rng = random.Random(11)
    eps = Fraction(1, 10**4)
    for index in range(100):
        d = 2 + index % 3
        translation = random_point(rng, d, 8)
        speed = Fraction(rng.randint(-999, 999), 1000)
        if d >= 3:
            spec = PoincareSpec.boost_toward(translation, speed, (1, 2), (rng.randint(-9, 9), rng.randint(1, 9)))
        else:
            spec = PoincareSpec(translation, BoostSpec(speed))
        mapping, cert = approx_poincare(spec, eps, d)
        assert is_lorentz(mapping.matrix)
        assert mapping.translation == translation
        assert cert.error_bound < eps
        target = target_poincare_enclosure(spec, d, Fraction(1, 10**8))
        assert frobenius_distance_sq(target, mapping.matrix).lo <= cert.error_bound ** 2
