"""
Exact rational arithmetic, linear algebra and elementary affine geometry.

Every other service builds on these primitives. Scalars are
``fractions.Fraction`` values, which are kept in lowest terms with a positive
denominator after every operation, so equality is structural and determinant
signs are exact.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

Rational = Fraction
Vector = tuple[Fraction, ...]


class PolytopeToolkitError(Exception):
    """Base class for every error raised by the toolkit services."""
    pass


class DimensionMismatchError(PolytopeToolkitError):
    """Raised when operand shapes do not fit together."""
    pass


class EmptyInputError(PolytopeToolkitError):
    """Raised when an operation needs at least one element."""
    pass


class DegenerateLineError(PolytopeToolkitError):
    """Raised when a line is given by two coincident points."""
    pass


def to_rational(value) -> Fraction:
    """
    Convert ints, Fractions, decimal strings and "p/q" strings to a Fraction.

    Floats are converted exactly (binary expansion), so prefer strings for
    fixture data.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rational coordinates")
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def to_vector(values: Iterable) -> Vector:
    return tuple(to_rational(v) for v in values)


def format_rational(value: Fraction) -> str:
    """Serialize as "p/q" (or "p" when the denominator is 1)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise DimensionMismatchError(f"vectors of length {len(u)} and {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def scale(c: Fraction, v: Sequence[Fraction]) -> Vector:
    return tuple(c * a for a in v)


@dataclass(frozen=True)
class MatrixQ:
    """Dense exact matrix, row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "MatrixQ":
        rows = [to_vector(r) for r in rows]
        n_cols = len(rows[0]) if rows else 0
        if any(len(r) != n_cols for r in rows):
            raise DimensionMismatchError("ragged rows")
        return cls(len(rows), n_cols, tuple(x for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> "MatrixQ":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> Vector:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "MatrixQ":
        return MatrixQ.from_rows([self.column(j) for j in range(self.cols)])

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __matmul__(self, other: "MatrixQ") -> "MatrixQ":
        return matmul(self, other)

    def apply(self, v: Sequence[Fraction]) -> Vector:
        if len(v) != self.cols:
            raise DimensionMismatchError(f"vector of length {len(v)} for {self.cols} columns")
        return tuple(dot(self.row(i), v) for i in range(self.rows))


def matmul(a: MatrixQ, b: MatrixQ) -> MatrixQ:
    if a.cols != b.rows:
        raise DimensionMismatchError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    cols = [b.column(j) for j in range(b.cols)]
    return MatrixQ.from_rows([[dot(a.row(i), c) for c in cols] for i in range(a.rows)])


def _row_echelon(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int], int]:
    """
    Reduce rows in place to reduced row echelon form.

    Returns the rows, the pivot columns and the number of row swaps.
    """
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    swaps = 0
    r = 0
    for c in range(n_cols):
        if r >= n_rows:
            break
        pivot = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        if pivot != r:
            rows[r], rows[pivot] = rows[pivot], rows[r]
            swaps += 1
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots, swaps


def det(m: MatrixQ) -> Fraction:
    """Exact determinant by Gaussian elimination."""
    if not m.is_square():
        raise DimensionMismatchError(f"determinant of a non-square {m.rows}x{m.cols} matrix")
    n = m.rows
    rows = m.to_rows()
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            result = -result
        p = rows[c][c]
        result *= p
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                factor = rows[i][c] / p
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[c])]
    return result


def rank(m: MatrixQ) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    _, pivots, _ = _row_echelon(m.to_rows())
    return len(pivots)


def null_space(m: MatrixQ) -> list[Vector]:
    """Basis of {x : m x = 0}, one vector per free column."""
    rows, pivots, _ = _row_echelon(m.to_rows())
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -rows[r][f]
        basis.append(tuple(v))
    return basis


class SolutionKind(str, Enum):
    UNIQUE = "unique"
    INCONSISTENT = "inconsistent"
    FAMILY = "family"


@dataclass(frozen=True)
class LinearSolution:
    """Solution set of a linear system: particular solution plus null-space basis."""

    kind: SolutionKind
    particular: Vector | None = None
    basis: tuple[Vector, ...] = ()
    # row of the reduced system reading 0 = c with c != 0
    inconsistent_row: int | None = None

    def point(self, parameters: Sequence[Fraction] = ()) -> Vector:
        if self.particular is None:
            raise EmptyInputError("inconsistent system has no points")
        v = self.particular
        for t, b in zip(parameters, self.basis):
            v = add(v, scale(to_rational(t), b))
        return v


def solve_linear(a: MatrixQ, b: Sequence) -> LinearSolution:
    """Exact solution set of a x = b."""
    b = to_vector(b)
    if a.rows != len(b):
        raise DimensionMismatchError(f"{a.rows} equations but {len(b)} right-hand sides")
    augmented = [list(a.row(i)) + [b[i]] for i in range(a.rows)]
    if not augmented:
        return LinearSolution(
            SolutionKind.FAMILY if a.cols else SolutionKind.UNIQUE,
            tuple(Fraction(0) for _ in range(a.cols)),
            tuple(_null_space_rows([], a.cols)),
        )
    rows, pivots, _ = _row_echelon(augmented)
    if a.cols in pivots:
        return LinearSolution(SolutionKind.INCONSISTENT, inconsistent_row=pivots.index(a.cols))
    particular = [Fraction(0)] * a.cols
    for r, p in enumerate(pivots):
        particular[p] = rows[r][a.cols]
    basis = tuple(null_space(a))
    kind = SolutionKind.UNIQUE if not basis else SolutionKind.FAMILY
    return LinearSolution(kind, tuple(particular), basis)


def _null_space_rows(rows: list[Vector], n_cols: int) -> list[Vector]:
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n_cols)) for i in range(n_cols)]
    return null_space(MatrixQ.from_rows(rows))


@dataclass(frozen=True)
class PointConfiguration:
    """Ordered labelled points with exact coordinates in R^dim."""

    dim: int
    points: tuple[Vector, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i + 1) for i in range(len(self.points))))
        if len(self.labels) != len(self.points):
            raise DimensionMismatchError(f"{len(self.labels)} labels for {len(self.points)} points")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("point labels must be pairwise distinct")
        for p in self.points:
            if len(p) != self.dim:
                raise DimensionMismatchError(f"point of length {len(p)} in dimension {self.dim}")

    @classmethod
    def from_points(cls, points: Sequence[Sequence], labels: Sequence[str] | None = None) -> "PointConfiguration":
        vectors = tuple(to_vector(p) for p in points)
        if not vectors:
            raise EmptyInputError("a configuration needs at least one point")
        return cls(len(vectors[0]), vectors, tuple(str(x) for x in labels) if labels else ())

    def __len__(self) -> int:
        return len(self.points)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no point labelled {label!r}") from None

    def subset(self, indices: Sequence[int]) -> "PointConfiguration":
        return PointConfiguration(
            self.dim, tuple(self.points[i] for i in indices), tuple(self.labels[i] for i in indices)
        )

    def replace_points(self, points: Sequence[Sequence]) -> "PointConfiguration":
        return PointConfiguration(self.dim, tuple(to_vector(p) for p in points), self.labels)

    def apply_affine(self, matrix: MatrixQ, translation: Sequence) -> "PointConfiguration":
        t = to_vector(translation)
        return self.replace_points([add(matrix.apply(p), t) for p in self.points])

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for p in self.points for x in p)


def affine_dim(config: PointConfiguration) -> int:
    """Dimension of the affine hull of the configuration's points."""
    if not config.points:
        raise EmptyInputError("affine dimension of an empty configuration")
    base = config.points[0]
    diffs = [sub(p, base) for p in config.points[1:]]
    if not diffs or config.dim == 0:
        return 0
    return rank(MatrixQ.from_rows(diffs))


def affine_basis(points: Sequence[Vector]) -> list[int]:
    """Indices of a lexicographically first affinely independent spanning subset."""
    chosen: list[int] = []
    diffs: list[Vector] = []
    for i, p in enumerate(points):
        if not chosen:
            chosen.append(i)
            continue
        candidate = diffs + [sub(p, points[chosen[0]])]
        if rank(MatrixQ.from_rows(candidate)) == len(candidate):
            chosen.append(i)
            diffs = candidate
    return chosen


@dataclass(frozen=True)
class Hyperplane:
    """Points x with normal . x = offset; the interior side is normal . x < offset."""

    normal: Vector
    offset: Fraction

    def __post_init__(self):
        if all(c == 0 for c in self.normal):
            raise ValueError("hyperplane normal must be non-zero")

    def evaluate(self, x: Sequence[Fraction]) -> Fraction:
        return dot(self.normal, x) - self.offset

    def contains(self, x: Sequence[Fraction]) -> bool:
        return self.evaluate(x) == 0

    def flipped(self) -> "Hyperplane":
        return Hyperplane(tuple(-c for c in self.normal), -self.offset)

    def normalized(self) -> "Hyperplane":
        """Scale so the first non-zero normal entry has absolute value 1."""
        lead = next(abs(c) for c in self.normal if c != 0)
        return Hyperplane(tuple(c / lead for c in self.normal), self.offset / lead)


def hyperplane_through(points: Sequence[Vector], interior: Sequence[Fraction] | None = None) -> Hyperplane:
    """
    Hyperplane spanned by points whose affine hull has codimension one.

    With ``interior`` given, the result is oriented so that the interior point
    evaluates strictly negative.
    """
    if not points:
        raise EmptyInputError("hyperplane through no points")
    d = len(points[0])
    rows = [tuple(p) + (Fraction(-1),) for p in points]
    kernel = _null_space_rows(rows, d + 1)
    if len(kernel) != 1:
        raise DimensionMismatchError(
            f"points span a flat of codimension {len(kernel)}, expected exactly one hyperplane"
        )
    v = kernel[0]
    plane = Hyperplane(v[:d], v[d]).normalized()
    if interior is not None:
        side = plane.evaluate(interior)
        if side == 0:
            raise DimensionMismatchError("interior point lies on the hyperplane")
        if side > 0:
            plane = plane.flipped()
    return plane


def orientation(points: Sequence[Sequence[Fraction]]) -> int:
    """Sign of det [[1, p_0], ..., [1, p_d]] for d+1 points in R^d."""
    m = MatrixQ.from_rows([(1,) + tuple(p) for p in points])
    value = det(m)
    return (value > 0) - (value < 0)


def chirotope(config: PointConfiguration) -> dict[tuple[int, ...], int]:
    """Orientation signs of every (dim+1)-subset of the configuration, by index."""
    return {
        subset: orientation([config.points[i] for i in subset])
        for subset in combinations(range(len(config)), config.dim + 1)
    }


class IntersectionKind(str, Enum):
    POINT = "point"
    AT_INFINITY = "at_infinity"
    IDENTICAL = "identical"


@dataclass(frozen=True)
class LineIntersection:
    kind: IntersectionKind
    point: Vector | None = None
    # direction of parallel lines, used for points at infinity
    direction: Vector | None = None


def _cross(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def line_intersection(l1: Sequence[Sequence], l2: Sequence[Sequence]) -> LineIntersection:
    """Intersection of the lines spanned by two pairs of plane points."""
    p, q = (to_vector(x) for x in l1)
    r, s = (to_vector(x) for x in l2)
    if p == q or r == s:
        raise DegenerateLineError("a line needs two distinct points")
    u, v = sub(q, p), sub(s, r)
    denom = _cross(u, v)
    if denom == 0:
        if _cross(sub(r, p), u) == 0:
            return LineIntersection(IntersectionKind.IDENTICAL)
        return LineIntersection(IntersectionKind.AT_INFINITY, direction=u)
    t = _cross(sub(r, p), v) / denom
    return LineIntersection(IntersectionKind.POINT, add(p, scale(t, u)))


def collinear(points: Sequence[Sequence]) -> bool:
    """True iff all plane points lie on one line."""
    pts = [to_vector(p) for p in points]
    base = pts[0]
    direction = next((sub(p, base) for p in pts[1:] if p != base), None)
    if direction is None:
        return True
    return all(_cross(sub(p, base), direction) == 0 for p in pts)


def pivot_columns(m: MatrixQ) -> list[int]:
    """Columns holding the pivots of the reduced row echelon form."""
    if m.rows == 0:
        return []
    _, pivots, _ = _row_echelon(m.to_rows())
    return pivots
