from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.errors import DomainError, UsageError
from src.minkowski_linalg import (
    LorentzMatrix,
    PoincareMap,
    RationalMatrix,
    SpacetimeVec,
    embed_spatial,
    eta,
    frobenius_distance_bound,
    frobenius_upper,
    is_lorentz,
    is_orthogonal,
    lift_intervals,
    minkowski_form,
    nullspace,
    space_sq,
    time_diff,
)

BOOST_3_5 = RationalMatrix.of([["5/4", "-3/4"], ["-3/4", "5/4"]])
BOOST_3_5_D4 = RationalMatrix.of(
    [
        ["5/4", "-3/4", 0, 0],
        ["-3/4", "5/4", 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
    ]
)
ROTATION_3_4 = RationalMatrix.of([["3/5", "-4/5"], ["4/5", "3/5"]])

coords = st.fractions(min_value=-100, max_value=100, max_denominator=1 << 10)


def test_spacetime_vec_needs_two_coordinates():
    with pytest.raises(UsageError):
        SpacetimeVec.of(1)


def test_minkowski_form_of_lightlike_pair():
    origin = SpacetimeVec.origin(4)
    assert minkowski_form(origin, SpacetimeVec.of(5, 3, 4, 0)) == 0
    assert minkowski_form(origin, SpacetimeVec.of(1, 2, 0, 0)) == -3
    assert space_sq(origin, SpacetimeVec.of(0, 0, 1, 0)) == 1
    assert time_diff(SpacetimeVec.of(3, 0), SpacetimeVec.of(1, 5)) == 2


def test_dimension_mismatch_is_usage_error():
    with pytest.raises(UsageError):
        minkowski_form(SpacetimeVec.origin(2), SpacetimeVec.origin(3))


def test_is_lorentz_examples():
    assert is_lorentz(BOOST_3_5)
    assert is_lorentz(BOOST_3_5_D4)
    assert not is_lorentz(RationalMatrix.diagonal([1, 2, 1, 1]))
    assert is_lorentz(eta(4))


def test_is_orthogonal_examples():
    assert is_orthogonal(ROTATION_3_4)
    assert not is_orthogonal(RationalMatrix.of([[1, 1], [0, 1]]))
    assert is_lorentz(embed_spatial(ROTATION_3_4))


def test_lorentz_matrix_validates_eagerly():
    with pytest.raises(DomainError):
        LorentzMatrix(RationalMatrix.diagonal([1, 2, 1, 1]))
    fake = LorentzMatrix.unchecked(RationalMatrix.diagonal([1, 2, 1, 1]))
    assert not fake.verified
    assert fake.inverse().matrix == RationalMatrix.diagonal([1, Fraction(1, 2), 1, 1])


def test_lorentz_inverse_uses_the_metric():
    inverse = LorentzMatrix(BOOST_3_5).inverse()
    assert inverse.matrix == RationalMatrix.of([["5/4", "3/4"], ["3/4", "5/4"]])
    assert (LorentzMatrix(BOOST_3_5) @ inverse).matrix == RationalMatrix.identity(2)


def test_general_inverse_and_solve():
    matrix = RationalMatrix.of([[2, 1], [1, 1]])
    assert matrix @ matrix.inverse() == RationalMatrix.identity(2)
    assert matrix.solve([3, 2]) == (Fraction(1), Fraction(1))
    singular = RationalMatrix.diagonal([1, 1, 1, 0])
    assert singular.solve([0, 0, 0, 1]) is None
    with pytest.raises(DomainError):
        singular.inverse()


def test_nullspace_of_rectangular_system():
    basis = nullspace([[1, 0, 0, 0], ["5/4", "-3/4", 0, 0]])
    assert len(basis) == 2
    for vector in basis:
        assert vector[0] == 0 and vector[1] == 0
    assert nullspace([[1, 0], [0, 1]]) == []


def test_poincare_map_compose_and_inverse():
    boost = PoincareMap(LorentzMatrix(BOOST_3_5), SpacetimeVec.of(1, 2))
    shift = PoincareMap.translation_only(SpacetimeVec.of(-3, 4))
    composed = boost.compose(shift)
    x = SpacetimeVec.of(Fraction(1, 3), Fraction(-2, 7))
    assert composed.apply(x) == boost.apply(shift.apply(x))
    assert boost.inverse().compose(boost).same_map(PoincareMap.identity(2))
    assert boost.inverse().apply(boost.apply(x)) == x


def test_poincare_map_serialises_fraction_strings():
    payload = PoincareMap(LorentzMatrix(BOOST_3_5), SpacetimeVec.of("1/2", 0)).to_dict()
    assert payload == {"matrix": [["5/4", "-3/4"], ["-3/4", "5/4"]], "translation": ["1/2", "0"]}
    assert is_lorentz(RationalMatrix.from_json(payload["matrix"]))


@settings(max_examples=100, derandomize=True)
@given(x=st.lists(coords, min_size=4, max_size=4), y=st.lists(coords, min_size=4, max_size=4))
def test_lorentz_maps_preserve_the_minkowski_form(x, y):
    mapping = PoincareMap(LorentzMatrix(BOOST_3_5_D4), SpacetimeVec.of(1, -2, 3, 0))
    p, q = SpacetimeVec(tuple(x)), SpacetimeVec(tuple(y))
    assert minkowski_form(mapping.apply(p), mapping.apply(q)) == minkowski_form(p, q)


def test_frobenius_bounds_dominate_exact_values():
    assert frobenius_upper(RationalMatrix.identity(4), Fraction(1, 100)) == 2
    bound = frobenius_upper(BOOST_3_5, Fraction(1, 1000))
    assert bound * bound >= BOOST_3_5.frobenius_norm_sq()
    target = lift_intervals(RationalMatrix.identity(2))
    distance = frobenius_distance_bound(target, BOOST_3_5, Fraction(1, 1000))
    assert distance * distance >= (BOOST_3_5 - RationalMatrix.identity(2)).frobenius_norm_sq()
