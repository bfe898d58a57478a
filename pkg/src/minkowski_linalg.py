"""Exact rational vectors, matrices and Poincare maps over ``Q^d``.

Coordinates follow the time-first convention ``<x1, x2, ..., xd>``: index 0
is time, indices ``1..d-1`` are space.  The Minkowski form is
``time(x, y)**2 - space2(x, y)`` with ``eta = diag(1, -1, ..., -1)``.

Norm certificates are Frobenius-norm upper bounds.  The Frobenius norm is
exactly computable (squared) over Q and dominates the operator norm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import DomainError, UsageError
from .exact_core import (
    RationalInterval,
    RationalLike,
    format_fractions,
    sqrt_enclosure,
    to_rational,
)

logger = logging.getLogger(__name__)

IntervalMatrix = Tuple[Tuple[RationalInterval, ...], ...]


@dataclass(frozen=True)
class SpacetimeVec:
    coords: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        coords = tuple(to_rational(c) for c in self.coords)
        if len(coords) < 2:
            raise UsageError(f"Spacetime vectors need dimension >= 2, got {len(coords)}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *values: RationalLike) -> "SpacetimeVec":
        return cls(tuple(values))

    @classmethod
    def origin(cls, dim: int) -> "SpacetimeVec":
        return cls(tuple(Fraction(0) for _ in range(dim)))

    @classmethod
    def unit_time(cls, dim: int) -> "SpacetimeVec":
        return cls((Fraction(1),) + tuple(Fraction(0) for _ in range(dim - 1)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def time(self) -> Fraction:
        return self.coords[0]

    @property
    def spatial(self) -> Tuple[Fraction, ...]:
        return self.coords[1:]

    def is_spatially_zero(self) -> bool:
        return all(c == 0 for c in self.spatial)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, index: int) -> Fraction:
        return self.coords[index]

    def __add__(self, other: "SpacetimeVec") -> "SpacetimeVec":
        _check_dims(self.dim, other.dim)
        return SpacetimeVec(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "SpacetimeVec") -> "SpacetimeVec":
        _check_dims(self.dim, other.dim)
        return SpacetimeVec(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "SpacetimeVec":
        return SpacetimeVec(tuple(-a for a in self.coords))

    def scale(self, factor: RationalLike) -> "SpacetimeVec":
        k = to_rational(factor)
        return SpacetimeVec(tuple(k * a for a in self.coords))

    def to_list(self) -> List[str]:
        return format_fractions(self.coords)


def _check_dims(left: int, right: int) -> None:
    if left != right:
        raise UsageError(f"Dimension mismatch: {left} vs {right}")


def time_diff(x: SpacetimeVec, y: SpacetimeVec) -> Fraction:
    _check_dims(x.dim, y.dim)
    return x.time - y.time


def space_sq(x: SpacetimeVec, y: SpacetimeVec) -> Fraction:
    _check_dims(x.dim, y.dim)
    return sum(((a - b) ** 2 for a, b in zip(x.spatial, y.spatial)), Fraction(0))


def minkowski_form(x: SpacetimeVec, y: SpacetimeVec) -> Fraction:
    """``time(x, y)**2 - space2(x, y)``; zero for lightlike pairs."""

    dt = time_diff(x, y)
    return dt * dt - space_sq(x, y)


def _rref(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form by exact Gauss-Jordan elimination."""

    m = [list(r) for r in rows]
    n_rows = len(m)
    n_cols = len(m[0]) if m else 0
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def nullspace(rows: Sequence[Sequence[RationalLike]]) -> List[Tuple[Fraction, ...]]:
    """Basis of ``{u : rows . u = 0}`` for a (not necessarily square) system."""

    exact = [[to_rational(v) for v in row] for row in rows]
    if not exact:
        return []
    n_cols = len(exact[0])
    reduced, pivots = _rref(exact)
    basis: List[Tuple[Fraction, ...]] = []
    for free in (c for c in range(n_cols) if c not in pivots):
        vec = [Fraction(0)] * n_cols
        vec[free] = Fraction(1)
        for row_index, pivot_col in enumerate(pivots):
            vec[pivot_col] = -reduced[row_index][free]
        basis.append(tuple(vec))
    return basis


@dataclass(frozen=True)
class RationalMatrix:
    rows: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(to_rational(v) for v in row) for row in self.rows)
        size = len(rows)
        if size == 0 or any(len(row) != size for row in rows):
            raise UsageError("RationalMatrix must be square and non-empty")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, rows: Iterable[Iterable[RationalLike]]) -> "RationalMatrix":
        return cls(tuple(tuple(row) for row in rows))

    @classmethod
    def identity(cls, size: int) -> "RationalMatrix":
        return cls.diagonal([1] * size)

    @classmethod
    def zeros(cls, size: int) -> "RationalMatrix":
        return cls.diagonal([0] * size)

    @classmethod
    def diagonal(cls, values: Sequence[RationalLike]) -> "RationalMatrix":
        size = len(values)
        return cls(
            tuple(
                tuple(to_rational(values[i]) if i == j else Fraction(0) for j in range(size))
                for i in range(size)
            )
        )

    @property
    def size(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(row[j] for row in self.rows)

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(tuple(self.column(j) for j in range(self.size)))

    def _check_size(self, other: "RationalMatrix") -> None:
        _check_dims(self.size, other.size)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_size(other)
        return RationalMatrix(
            tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.rows, other.rows))
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_size(other)
        return RationalMatrix(
            tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.rows, other.rows))
        )

    def __neg__(self) -> "RationalMatrix":
        return self.scale(-1)

    def scale(self, factor: RationalLike) -> "RationalMatrix":
        k = to_rational(factor)
        return RationalMatrix(tuple(tuple(k * v for v in row) for row in self.rows))

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_size(other)
        cols = [other.column(j) for j in range(other.size)]
        return RationalMatrix(
            tuple(
                tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols)
                for row in self.rows
            )
        )

    def apply_vec(self, vec: Sequence[RationalLike]) -> Tuple[Fraction, ...]:
        _check_dims(self.size, len(vec))
        exact = [to_rational(v) for v in vec]
        return tuple(sum((a * b for a, b in zip(row, exact)), Fraction(0)) for row in self.rows)

    def inverse(self) -> "RationalMatrix":
        n = self.size
        augmented = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(self.rows)]
        reduced, pivots = _rref(augmented)
        if pivots[:n] != list(range(n)):
            raise DomainError("Matrix is singular")
        return RationalMatrix(tuple(tuple(row[n:]) for row in reduced))

    def solve(self, rhs: Sequence[RationalLike]) -> Optional[Tuple[Fraction, ...]]:
        """Unique solution of ``self . u = rhs``, or ``None`` if there is none."""

        n = self.size
        _check_dims(n, len(rhs))
        augmented = [list(row) + [to_rational(b)] for row, b in zip(self.rows, rhs)]
        reduced, pivots = _rref(augmented)
        if pivots != list(range(n)):
            return None
        return tuple(row[n] for row in reduced)

    def frobenius_norm_sq(self) -> Fraction:
        return sum((v * v for row in self.rows for v in row), Fraction(0))

    def to_json(self) -> List[List[str]]:
        return [format_fractions(row) for row in self.rows]

    @classmethod
    def from_json(cls, rows: Sequence[Sequence[RationalLike]]) -> "RationalMatrix":
        return cls.of(rows)


def eta(dim: int) -> RationalMatrix:
    return RationalMatrix.diagonal([1] + [-1] * (dim - 1))


def is_lorentz(matrix: RationalMatrix) -> bool:
    """``M^T eta M == eta`` with exact rational equality in every entry."""

    n = matrix.size
    signs = [Fraction(1)] + [Fraction(-1)] * (n - 1)
    for i in range(n):
        for j in range(i, n):
            value = sum((signs[k] * matrix.rows[k][i] * matrix.rows[k][j] for k in range(n)), Fraction(0))
            expected = signs[i] if i == j else 0
            if value != expected:
                return False
    return True


def is_orthogonal(matrix: RationalMatrix) -> bool:
    """``A^T A == I`` exactly."""

    n = matrix.size
    for i in range(n):
        for j in range(i, n):
            value = sum((matrix.rows[k][i] * matrix.rows[k][j] for k in range(n)), Fraction(0))
            if value != (1 if i == j else 0):
                return False
    return True


def frobenius_norm_sq(matrix: RationalMatrix) -> Fraction:
    return matrix.frobenius_norm_sq()


def frobenius_upper(matrix: RationalMatrix, width: RationalLike) -> Fraction:
    """Certified rational upper bound on ``||M||_F``."""

    return sqrt_enclosure(matrix.frobenius_norm_sq(), width).hi


def embed_spatial(spatial: RationalMatrix) -> RationalMatrix:
    """``diag(1, A)``: act with ``A`` on space, leave time alone."""

    n = spatial.size
    rows = [[Fraction(1)] + [Fraction(0)] * n]
    for row in spatial.rows:
        rows.append([Fraction(0)] + list(row))
    return RationalMatrix.of(rows)


def lift_intervals(matrix: RationalMatrix) -> IntervalMatrix:
    return tuple(tuple(RationalInterval.point(v) for v in row) for row in matrix.rows)


def embed_spatial_intervals(spatial: IntervalMatrix) -> IntervalMatrix:
    n = len(spatial)
    one, zero = RationalInterval.point(1), RationalInterval.point(0)
    rows = [(one,) + (zero,) * n]
    rows.extend((zero,) + tuple(row) for row in spatial)
    return tuple(rows)


def interval_matmul(left: IntervalMatrix, right: IntervalMatrix) -> IntervalMatrix:
    _check_dims(len(left), len(right))
    n = len(right)
    return tuple(
        tuple(sum((row[k] * right[k][j] for k in range(n)), RationalInterval.point(0)) for j in range(n))
        for row in left
    )


def frobenius_distance_sq(target: IntervalMatrix, output: RationalMatrix) -> RationalInterval:
    """Enclosure of ``||target - output||_F**2`` for an interval-valued target."""

    _check_dims(len(target), output.size)
    total = RationalInterval.point(0)
    for t_row, o_row in zip(target, output.rows):
        for t, o in zip(t_row, o_row):
            total = total + (t - o).square()
    return total


def frobenius_distance_bound(target: IntervalMatrix, output: RationalMatrix, width: RationalLike) -> Fraction:
    """Certified rational upper bound on ``||target - output||_F``."""

    return sqrt_enclosure(frobenius_distance_sq(target, output).hi, width).hi


@dataclass(frozen=True)
class LorentzMatrix:
    """A ``d x d`` rational matrix with ``M^T eta M = eta``, validated eagerly.

    ``verified=False`` instances are only produced by :meth:`unchecked`; they
    exist so test fixtures can inject broken observers into a model.
    """

    matrix: RationalMatrix
    verified: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        if self.matrix.size < 2:
            raise UsageError("Lorentz matrices need dimension >= 2")
        if self.verified and not is_lorentz(self.matrix):
            raise DomainError("Matrix violates M^T eta M = eta")

    @classmethod
    def unchecked(cls, matrix: RationalMatrix) -> "LorentzMatrix":
        return cls(matrix, verified=False)

    @classmethod
    def identity(cls, dim: int) -> "LorentzMatrix":
        return cls(RationalMatrix.identity(dim))

    @property
    def size(self) -> int:
        return self.matrix.size

    def inverse(self) -> "LorentzMatrix":
        if self.verified:
            e = eta(self.size)
            return LorentzMatrix(e @ self.matrix.transpose() @ e)
        return LorentzMatrix.unchecked(self.matrix.inverse())

    def __matmul__(self, other: "LorentzMatrix") -> "LorentzMatrix":
        product = self.matrix @ other.matrix
        if self.verified and other.verified:
            return LorentzMatrix(product)
        return LorentzMatrix.unchecked(product)


@dataclass(frozen=True)
class PoincareMap:
    """Affine map ``x -> linear . x + translation``."""

    linear: LorentzMatrix
    translation: SpacetimeVec

    def __post_init__(self) -> None:
        _check_dims(self.linear.size, self.translation.dim)

    @classmethod
    def identity(cls, dim: int) -> "PoincareMap":
        return cls(LorentzMatrix.identity(dim), SpacetimeVec.origin(dim))

    @classmethod
    def translation_only(cls, offset: SpacetimeVec) -> "PoincareMap":
        return cls(LorentzMatrix.identity(offset.dim), offset)

    @classmethod
    def linear_only(cls, linear: LorentzMatrix) -> "PoincareMap":
        return cls(linear, SpacetimeVec.origin(linear.size))

    @property
    def dim(self) -> int:
        return self.translation.dim

    @property
    def matrix(self) -> RationalMatrix:
        return self.linear.matrix

    @property
    def verified(self) -> bool:
        return self.linear.verified

    def apply(self, x: SpacetimeVec) -> SpacetimeVec:
        _check_dims(self.dim, x.dim)
        image = self.matrix.apply_vec(x.coords)
        return SpacetimeVec(tuple(a + b for a, b in zip(image, self.translation.coords)))

    def compose(self, other: "PoincareMap") -> "PoincareMap":
        """``self o other``: apply ``other`` first."""

        _check_dims(self.dim, other.dim)
        shifted = self.matrix.apply_vec(other.translation.coords)
        translation = SpacetimeVec(tuple(a + b for a, b in zip(shifted, self.translation.coords)))
        return PoincareMap(self.linear @ other.linear, translation)

    def inverse(self) -> "PoincareMap":
        inv = self.linear.inverse()
        back = inv.matrix.apply_vec(self.translation.coords)
        return PoincareMap(inv, SpacetimeVec(tuple(-v for v in back)))

    def same_map(self, other: "PoincareMap") -> bool:
        return self.matrix == other.matrix and self.translation == other.translation

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.to_json(), "translation": self.translation.to_list()}


def apply(p: PoincareMap, x: SpacetimeVec) -> SpacetimeVec:
    return p.apply(x)


def compose(p: PoincareMap, q: PoincareMap) -> PoincareMap:
    return p.compose(q)


def inverse(p: PoincareMap) -> PoincareMap:
    return p.inverse()
