"""
Lawrence extensions, Lawrence polytopes, the Pascal 5-polytope, connected sums
and the catalog of necessarily-flat facets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, islice, product
from typing import Mapping, Sequence

from config import settings
from services.hull_lattice import (
    Face,
    FaceLattice,
    HullResult,
    convex_hull,
    face_lattice,
    hull_lattice,
    lattice_isomorphic_under,
    lattices_isomorphic,
)
from services.numeric_core import (
    DimensionMismatchError,
    IntersectionKind,
    LineIntersection,
    MatrixQ,
    PointConfiguration,
    PolytopeToolkitError,
    Vector,
    add,
    affine_dim,
    collinear,
    det,
    dot,
    line_intersection,
    null_space,
    pivot_columns,
    scale,
    solve_linear,
    sub,
    to_rational,
    to_vector,
)

logger = logging.getLogger(__name__)


class InvalidHeightsError(PolytopeToolkitError):
    """Raised unless 0 < h1 < h2."""
    pass


class NoIntersectionError(PolytopeToolkitError):
    """Raised when a reconstruction line is parallel to the base hyperplane."""
    pass


class ConfigurationDegenerateError(PolytopeToolkitError):
    """Raised when a construction needs a more generic input configuration."""
    pass


class NotOnConicError(ConfigurationDegenerateError):
    """Raised when the six hexagon vertices do not lie on one conic."""
    pass


class ConnectedSumPreconditionError(PolytopeToolkitError):
    """Raised when the glued facets are not isomorphic or not projectively equivalent."""
    pass


class PlacementFailureError(PolytopeToolkitError):
    """Raised when no flattening parameter of the schedule gives a valid gluing."""

    def __init__(self, tried: Sequence[Fraction]):
        self.tried = list(tried)
        if not self.tried:
            super().__init__("empty placement schedule")
            return
        super().__init__(
            f"no valid placement for t in {{1, ..., {self.tried[-1]}}} ({len(self.tried)} values tried)"
        )


class FlatnessClass(str, Enum):
    TRIANGLE = "triangle"
    PYRAMID = "pyramid"
    PRISM = "prism"
    TENT = "tent"
    NONE = "none"


@dataclass(frozen=True)
class ProjectiveTransform:
    """Projective map of R^d given by an invertible (d+1)x(d+1) matrix on (x, 1)."""

    matrix: MatrixQ

    def __post_init__(self):
        if not self.matrix.is_square() or det(self.matrix) == 0:
            raise ValueError("a projective transform needs an invertible square matrix")

    @classmethod
    def identity(cls, d: int) -> "ProjectiveTransform":
        return cls(MatrixQ.identity(d + 1))

    @property
    def dim(self) -> int:
        return self.matrix.rows - 1

    def weight(self, point: Sequence[Fraction]) -> Fraction:
        return self.matrix.apply(tuple(point) + (Fraction(1),))[-1]

    def apply(self, point: Sequence[Fraction]) -> Vector:
        image = self.matrix.apply(tuple(to_vector(point)) + (Fraction(1),))
        if image[-1] == 0:
            raise NoIntersectionError("point is sent to infinity")
        return tuple(x / image[-1] for x in image[:-1])


def _default_heights(h1, h2) -> tuple[Fraction, Fraction]:
    low = to_rational(settings.lawrence_low_height if h1 is None else h1)
    high = to_rational(settings.lawrence_high_height if h2 is None else h2)
    if low <= 0 or low >= high:
        raise InvalidHeightsError(f"Lawrence heights must satisfy 0 < h1 < h2, got {low}, {high}")
    return low, high


def _fresh_label(base: str, taken: set[str]) -> str:
    label = base
    while label in taken:
        label += "'"
    taken.add(label)
    return label


def lawrence_extension(config: PointConfiguration, i: int, h1=None, h2=None) -> PointConfiguration:
    """
    Replace point i by two points on a ray from it into a new last coordinate.

    The other points get last coordinate 0; the new points (p_i, h1) and
    (p_i, h2) are appended with labels "<label>_" (lower) and "<label>^" (upper).
    """
    low, high = _default_heights(h1, h2)
    if not 0 <= i < len(config):
        raise IndexError(f"point index {i} outside 0..{len(config) - 1}")
    keep = [k for k in range(len(config)) if k != i]
    points = [config.points[k] + (Fraction(0),) for k in keep]
    labels = [config.labels[k] for k in keep]
    taken = set(labels)
    base = config.points[i]
    points += [base + (low,), base + (high,)]
    labels += [_fresh_label(f"{config.labels[i]}_", taken), _fresh_label(f"{config.labels[i]}^", taken)]
    return PointConfiguration(config.dim + 1, tuple(points), tuple(labels))


def reconstruct_point(extended: PointConfiguration, lower: str, upper: str, axis: int | None = None) -> Vector:
    """
    Meet the line through the two labelled points with the hyperplane x_axis = 0.

    Returns the intersection truncated to the coordinates before ``axis``
    (the last coordinate by default), i.e. the deleted point.
    """
    axis = extended.dim - 1 if axis is None else axis
    a = extended.points[extended.index_of(lower)]
    b = extended.points[extended.index_of(upper)]
    rise = b[axis] - a[axis]
    if rise == 0:
        raise NoIntersectionError(f"line through {lower} and {upper} is parallel to the base hyperplane")
    t = -a[axis] / rise
    point = add(a, scale(t, sub(b, a)))
    return point[:axis]


def lawrence_polytope(config: PointConfiguration, h1=None, h2=None) -> tuple[PointConfiguration, HullResult, FaceLattice]:
    """Lawrence-extend every point of a planar configuration: 2n vertices in dimension n + 2."""
    if config.dim != 2 or len(config) < 3 or affine_dim(config) != 2:
        raise ConfigurationDegenerateError("the Lawrence polytope needs n >= 3 points spanning the plane")
    extended = config
    for label in config.labels:
        extended = lawrence_extension(extended, extended.index_of(label), h1, h2)
    hull = convex_hull(extended)
    if len(hull.vertex_indices) != len(extended):
        raise ConfigurationDegenerateError(
            f"only {len(hull.vertex_indices)} of {len(extended)} Lawrence points are vertices"
        )
    logger.info("Lawrence polytope: %d vertices in dimension %d", len(extended), extended.dim)
    return extended, hull, face_lattice(hull)


def recover_base_configuration(extended: PointConfiguration, base_labels: Sequence[str]) -> PointConfiguration:
    """Reconstruct every base point of a Lawrence polytope built by ``lawrence_polytope``."""
    points = []
    for k, label in enumerate(base_labels):
        point = reconstruct_point(extended, f"{label}_", f"{label}^", axis=2 + k)
        points.append(point[:2])
    return PointConfiguration.from_points(points, base_labels)


def _conic_row(p: Vector) -> tuple[Fraction, ...]:
    x, y = p
    return (x * x, x * y, y * y, x, y, Fraction(1))


def on_common_conic(points: Sequence[Vector]) -> bool:
    """Six plane points lie on one conic iff the 6x6 conic matrix is singular."""
    return det(MatrixQ.from_rows([_conic_row(p) for p in points])) == 0


def opposite_edge_intersections(hexagon: Sequence[Vector]) -> list[LineIntersection]:
    """Meets of the lines through opposite edges (k, k+1) and (k+3, k+4)."""
    edges = [(hexagon[k], hexagon[(k + 1) % 6]) for k in range(6)]
    return [line_intersection(edges[k], edges[k + 3]) for k in range(3)]


def parabola_points(xs: Sequence) -> list[Vector]:
    return [(to_rational(x), to_rational(x) ** 2) for x in xs]


def rational_circle_points(ts: Sequence) -> list[Vector]:
    """Rational points ((1 - t^2)/(1 + t^2), 2t/(1 + t^2)) of the unit circle, ordered by t."""
    out = []
    for t in sorted(to_rational(t) for t in ts):
        denom = 1 + t * t
        out.append(((1 - t * t) / denom, 2 * t / denom))
    return out


DEFAULT_HEXAGON_XS = (1, 2, 3, 4, 5, 7)


def pascal_configuration(hexagon: Sequence[Sequence] | None = None) -> PointConfiguration:
    """
    Hexagon vertices "1".."6" plus the opposite-edge meets "x1", "x2", "x3".

    The default hexagon lies on y = x^2 at x = 1, 2, 3, 4, 5, 7; consecutive
    x = 1..6 would make the edges (3, 4) and (6, 1) parallel.
    """
    points = [to_vector(p) for p in hexagon] if hexagon is not None else parabola_points(DEFAULT_HEXAGON_XS)
    if len(points) != 6 or len(set(points)) != 6:
        raise ConfigurationDegenerateError("Pascal's configuration needs six distinct points")
    if not on_common_conic(points):
        raise NotOnConicError("the six hexagon vertices do not lie on a common conic")
    meets = opposite_edge_intersections(points)
    for k, meet in enumerate(meets):
        if meet.kind != IntersectionKind.POINT:
            raise ConfigurationDegenerateError(
                f"opposite edges {k + 1} and {k + 4} meet {meet.kind.value}; choose other conic points"
            )
    extra = [m.point for m in meets]
    if not collinear(extra):
        raise ConfigurationDegenerateError("opposite-edge meets are not collinear")
    labels = [str(k + 1) for k in range(6)] + ["x1", "x2", "x3"]
    return PointConfiguration.from_points(points + extra, labels)


@dataclass(frozen=True)
class PascalChecks:
    dim: int
    n_vertices: int
    hexagon_is_2face: bool
    extension_points_form_facet: bool

    @property
    def passed(self) -> bool:
        return self.dim == 5 and self.n_vertices == 12 and self.hexagon_is_2face and self.extension_points_form_facet


def pascal_5polytope(hexagon: Sequence[Sequence] | None = None) -> tuple[PointConfiguration, FaceLattice]:
    """Lawrence-extend the three Pascal points: a 5-polytope with the hexagon as a 2-face."""
    config = pascal_configuration(hexagon)
    for label in ("x1", "x2", "x3"):
        config = lawrence_extension(config, config.index_of(label))
    hull, lattice = hull_lattice(config)
    if len(hull.vertex_indices) != len(config):
        raise ConfigurationDegenerateError("some Pascal polytope points are not vertices")
    return config, lattice


def pascal_checks(config: PointConfiguration, lattice: FaceLattice) -> PascalChecks:
    hexagon = frozenset(config.index_of(str(k + 1)) for k in range(6))
    new_points = frozenset(i for i, label in enumerate(config.labels) if label[-1] in "_^")
    return PascalChecks(
        dim=lattice.dim,
        n_vertices=lattice.n_vertices,
        hexagon_is_2face=lattice.rank_of(hexagon) == 2,
        extension_points_form_facet=new_points in lattice.facets(),
    )


def _intrinsic_frame(points: Sequence[Vector]) -> tuple[Vector, list[Vector]]:
    """Origin (centroid) and a direction basis of the affine hull of the points."""
    n = len(points)
    origin = tuple(sum(c) / n for c in zip(*points))
    diffs = MatrixQ.from_rows([sub(p, origin) for p in points])
    basis = [tuple(diffs.row(i)) for i in range(diffs.rows)]
    independent: list[Vector] = []
    for v in basis:
        candidate = independent + [v]
        if len(pivot_columns(MatrixQ.from_rows(candidate))) == len(candidate):
            independent = candidate
    return origin, independent


def _intrinsic_coordinates(points: Sequence[Vector], origin: Vector, basis: Sequence[Vector]) -> list[Vector]:
    m = MatrixQ.from_rows(basis).transpose()
    return [solve_linear(m, sub(p, origin)).particular for p in points]


def _homogeneous_columns(vectors: Sequence[Vector]) -> MatrixQ:
    return MatrixQ.from_rows(vectors).transpose()


def _projective_frame(points: Sequence[Vector]) -> tuple[tuple[int, ...], int] | None:
    """Indices of a basis plus one point with no zero coordinate in that basis."""
    m = len(points[0])
    for basis in combinations(range(len(points)), m):
        columns = _homogeneous_columns([points[b] for b in basis])
        if det(columns) == 0:
            continue
        for extra in range(len(points)):
            if extra in basis:
                continue
            if all(c != 0 for c in solve_linear(columns, points[extra]).particular):
                return basis, extra
    return None


def _frame_map(sources: Sequence[Vector], targets: Sequence[Vector], basis: Sequence[int], extra: int) -> MatrixQ | None:
    """
    The matrix sending the frame of sources onto the frame of targets with the
    extra point mapped to weight 1, or None when targets are not a frame there.
    """
    s = _homogeneous_columns([sources[b] for b in basis])
    t = _homogeneous_columns([targets[b] for b in basis])
    if det(t) == 0:
        return None
    lam = solve_linear(s, sources[extra]).particular
    mu = solve_linear(t, targets[extra]).particular
    if any(c == 0 for c in mu):
        return None
    m = len(basis)
    # A s = t diag(mu / lam), solved row by row as s^T a_r = (t diag(mu / lam))_r
    scaled = MatrixQ.from_rows([[t[r, c] * mu[c] / lam[c] for c in range(m)] for r in range(m)])
    s_t = s.transpose()
    return MatrixQ.from_rows([solve_linear(s_t, scaled.row(r)).particular for r in range(m)])


def _kernel_search(sources: Sequence[Vector], targets: Sequence[Vector]) -> MatrixQ | None:
    """Small integer combinations of the solution kernel, all-ones first."""
    m, k = len(sources[0]), len(sources)
    n_unknowns = m * m + k
    rows = []
    for i, (source, target) in enumerate(zip(sources, targets)):
        for r in range(m):
            row = [Fraction(0)] * n_unknowns
            for c in range(m):
                row[r * m + c] = source[c]
            row[m * m + i] = -target[r]
            rows.append(row)
    kernel = null_space(MatrixQ.from_rows(rows))
    for coefficients in islice(product((1, -1, 2, -2, 0), repeat=len(kernel)), 20000):
        if not any(coefficients):
            continue
        v = [Fraction(0)] * n_unknowns
        for c, b in zip(coefficients, kernel):
            v = [x + c * y for x, y in zip(v, b)]
        weights = v[m * m:]
        if all(w < 0 for w in weights):
            v = [-x for x in v]
            weights = v[m * m:]
        if not all(w > 0 for w in weights):
            continue
        matrix = MatrixQ(m, m, tuple(v[:m * m]))
        if det(matrix) != 0:
            return matrix
    return None


def projective_equivalence(
    f1: PointConfiguration, f2: PointConfiguration, correspondence: Mapping[int, int] | Sequence[int] | None = None
) -> ProjectiveTransform | None:
    """
    Projective map sending each point of f1 to its partner in f2, or None.

    The homogeneous images must be positive multiples of the targets, so the
    map is admissible on the convex hull. Both configurations must be
    full-dimensional in their common dimension.

    With d + 2 points in general position the map is fixed by that frame and
    every remaining point is checked against it. Smaller configurations fall
    back to a search over the solution kernel.
    """
    if len(f1) != len(f2) or f1.dim != f2.dim:
        raise DimensionMismatchError("projective equivalence needs equal point counts and dimensions")
    if affine_dim(f1) != f1.dim or affine_dim(f2) != f2.dim:
        raise DimensionMismatchError("both configurations must be full-dimensional")
    if correspondence is None:
        correspondence = list(range(len(f1)))
    if isinstance(correspondence, Mapping):
        correspondence = [correspondence[i] for i in range(len(f1))]
    sources = [p + (Fraction(1),) for p in f1.points]
    targets = [f2.points[j] + (Fraction(1),) for j in correspondence]
    frame = _projective_frame(sources)
    if frame is None:
        matrix = _kernel_search(sources, targets)
        return ProjectiveTransform(matrix) if matrix is not None else None
    matrix = _frame_map(sources, targets, *frame)
    if matrix is None:
        return None
    for source, target in zip(sources, targets):
        image = matrix.apply(source)
        weight = image[-1]
        if weight <= 0 or any(x != weight * y for x, y in zip(image, target)):
            return None
    logger.debug("projective equivalence fixed by frame %s + %d", frame[0], frame[1])
    return ProjectiveTransform(matrix)


def _facet_plane(hull: HullResult, facet: Face):
    for members, plane in hull.facets:
        if members == facet:
            return plane
    raise ConnectedSumPreconditionError(f"{sorted(facet)} is not a facet")


def _glued_labels(labels1: Sequence[str], labels2: Sequence[str]) -> list[str]:
    taken = set(labels1)
    return [_fresh_label(label if label not in taken else f"b:{label}", taken) for label in labels2]


def connected_sum(
    p1: PointConfiguration,
    f1: Sequence[int],
    p2: PointConfiguration,
    f2: Sequence[int],
    correspondence: Mapping[int, int],
    schedule_length: int | None = None,
) -> tuple[PointConfiguration, FaceLattice]:
    """
    Glue p2 onto p1 along projectively equivalent facets f2 -> f1.

    ``correspondence`` maps the p1 indices of f1 to the p2 indices of f2. The points
    of p2 are sent by a projective map that fixes the facet correspondence
    and squeezes p2 into a thin cap beyond f1; the squeeze parameter t runs
    through 1, 1/2, 1/4, ... until the hull has exactly the expected facets.
    """
    if p1.dim != p2.dim:
        raise ConnectedSumPreconditionError("polytopes of different dimensions")
    d = p1.dim
    hull1, lattice1 = hull_lattice(p1)
    hull2, lattice2 = hull_lattice(p2)
    face1, face2 = frozenset(f1), frozenset(f2)
    if face1 not in lattice1.facets() or face2 not in lattice2.facets():
        raise ConnectedSumPreconditionError("f1 and f2 must be facets of p1 and p2")
    if set(correspondence) != face1 or set(correspondence.values()) != face2:
        raise ConnectedSumPreconditionError("correspondence must be a bijection from f1 onto f2")
    if not lattice_isomorphic_under(lattice1.sublattice(face1), lattice2.sublattice(face2), correspondence):
        raise ConnectedSumPreconditionError("facets are not combinatorially isomorphic under the correspondence")

    to_p1 = {j: i for i, j in correspondence.items()}
    plane1, plane2 = _facet_plane(hull1, face1), _facet_plane(hull2, face2)
    order2 = sorted(face2)
    origin1, basis1 = _intrinsic_frame([p1.points[to_p1[i]] for i in order2])
    origin2, basis2 = _intrinsic_frame([p2.points[i] for i in order2])
    coords1 = _intrinsic_coordinates([p1.points[to_p1[i]] for i in order2], origin1, basis1)
    coords2 = _intrinsic_coordinates([p2.points[i] for i in order2], origin2, basis2)
    facet_map = projective_equivalence(
        PointConfiguration.from_points(coords2), PointConfiguration.from_points(coords1)
    )
    if facet_map is None:
        raise ConnectedSumPreconditionError("facets are not projectively equivalent")

    # frame of p2: x = origin2 + U2 y + s n2, with p2 on the side s <= 0
    frame2 = MatrixQ.from_rows(list(basis2) + [plane2.normal]).transpose()
    normal1 = plane1.normal
    a = facet_map.matrix
    m = d  # size of the facet map: (d - 1) + 1

    length = settings.placement_schedule_length if schedule_length is None else schedule_length
    schedule = [Fraction(1, 2 ** k) for k in range(length)]
    labels = list(p1.labels) + _glued_labels(p1.labels, [p2.labels[i] for i in range(len(p2)) if i not in face2])
    rest2 = [i for i in range(len(p2)) if i not in face2]
    expected = {f for f in lattice1.facets() if f != face1}
    index_in_sum = {i: len(p1) + k for k, i in enumerate(rest2)}
    index_in_sum.update(to_p1)
    expected |= {frozenset(index_in_sum[v] for v in f) for f in lattice2.facets() if f != face2}

    for t in schedule:
        images = []
        for i in rest2:
            ys = solve_linear(frame2, sub(p2.points[i], origin2)).particular
            y, s = ys[:-1], ys[-1]
            homogeneous = a.apply(tuple(y) + (Fraction(1),))
            weight = homogeneous[-1] - s / t
            if weight <= 0:
                break
            y_image = [c / weight for c in homogeneous[:-1]]
            height = -s / weight
            point = add(origin1, add(
                tuple(sum(y_image[k] * basis1[k][c] for k in range(m - 1)) for c in range(d)),
                scale(height, normal1),
            ))
            images.append(point)
        else:
            glued = PointConfiguration.from_points(list(p1.points) + images, labels)
            hull, lattice = hull_lattice(glued)
            facets = set(lattice.facets())
            if len(hull.vertex_indices) == len(glued) and facets == expected:
                logger.info("connected sum placed at t = %s: %d facets", t, len(facets))
                return glued, lattice
        logger.debug("placement t = %s rejected", t)
    raise PlacementFailureError(schedule)


def boundary_complex(lattice: FaceLattice, facet: Face) -> list[Face]:
    """Proper nonempty faces of a facet."""
    return [f for f in lattice.sublattice(facet).faces if f and f != facet]


def _standard_prism(k: int) -> FaceLattice:
    bottom = list(range(k))
    top = list(range(k, 2 * k))
    sides = [{i, (i + 1) % k, k + i, k + (i + 1) % k} for i in range(k)]
    return FaceLattice.from_facets(range(2 * k), [bottom, top] + sides)


def _is_pyramid(lattice: FaceLattice) -> bool:
    facets = lattice.facets()
    for apex in lattice.vertices:
        missing = [f for f in facets if apex not in f]
        if len(missing) == 1 and missing[0] == frozenset(v for v in lattice.vertices if v != apex):
            return True
    return False


def _is_prism(lattice: FaceLattice) -> bool:
    facets = lattice.facets()
    everything = frozenset(lattice.vertices)
    for i, b1 in enumerate(facets):
        for b2 in facets[i + 1:]:
            if not b1 & b2 and b1 | b2 == everything and len(b1) == len(b2):
                return lattices_isomorphic(lattice, _standard_prism(len(b1)))
    return False


def tent_polytope(polygon: Sequence[Sequence], apex: Sequence, h1=None, h2=None) -> tuple[PointConfiguration, FaceLattice]:
    """3-polytope from a Lawrence extension on a point outside a convex polygon."""
    points = [to_vector(p) for p in polygon] + [to_vector(apex)]
    labels = [str(k + 1) for k in range(len(polygon))] + ["q"]
    config = PointConfiguration.from_points(points, labels)
    config = lawrence_extension(config, config.index_of("q"), h1, h2)
    hull, lattice = hull_lattice(config)
    if len(hull.vertex_indices) != len(config):
        raise ConfigurationDegenerateError("the tent point must lie outside the polygon")
    return config, lattice


def _visible_edges(polygon: Sequence[Vector], q: Vector) -> int:
    k = len(polygon)
    centroid = tuple(sum(c) / k for c in zip(*polygon))
    count = 0
    for i in range(k):
        a, b = polygon[i], polygon[(i + 1) % k]
        edge = sub(b, a)
        normal = (edge[1], -edge[0])
        side_q, side_c = dot(normal, sub(q, a)), dot(normal, sub(centroid, a))
        if side_q == 0:
            return -1
        if (side_q > 0) != (side_c > 0):
            count += 1
    return count


@lru_cache(maxsize=None)
def tent_table(max_k: int = 12) -> tuple[tuple[int, int, FaceLattice], ...]:
    """Tent lattices over k-gons (3 <= k <= max_k) for each achievable count j of visible edges."""
    table = []
    for k in range(3, max_k + 1):
        polygon = parabola_points(range(1, k + 1))
        found: dict[int, FaceLattice] = {}
        mid = Fraction(k + 1, 2) + Fraction(1, 3)
        for depth in [Fraction(1, 7)] + [Fraction(4 ** e) for e in range(0, 8)]:
            for q in ((mid, mid * mid - depth), (mid, Fraction(k * k + 1) + depth)):
                j = _visible_edges(polygon, q)
                if j > 0 and j not in found:
                    found[j] = tent_polytope(polygon, q)[1]
        table.extend((k, j, lattice) for j, lattice in sorted(found.items()))
    return tuple(table)


def _is_tent(lattice: FaceLattice) -> bool:
    n = lattice.n_vertices
    return any(k + 2 == n and lattices_isomorphic(lattice, entry) for k, _, entry in tent_table())


def flatness_class(facet: FaceLattice, ambient_dim: int) -> FlatnessClass:
    """
    Certified necessarily-flat type of a facet, or NONE when not certified.

    Triangles in dimension 3; pyramids, prisms and tents in dimension 4.
    """
    if ambient_dim == 3:
        return FlatnessClass.TRIANGLE if facet.dim == 2 and facet.n_vertices == 3 else FlatnessClass.NONE
    if ambient_dim != 4 or facet.dim != 3:
        return FlatnessClass.NONE
    if _is_pyramid(facet):
        return FlatnessClass.PYRAMID
    if _is_prism(facet):
        return FlatnessClass.PRISM
    if _is_tent(facet):
        return FlatnessClass.TENT
    return FlatnessClass.NONE


def tent_with_outer_point(k: int = 6, h1=None, h2=None) -> tuple[PointConfiguration, HullResult, FaceLattice]:
    """
    Tent over a k-gon plus a point below its base, Lawrence-extended: a 4-polytope.

    Only the configuration and its hull are built; the concurrency property of
    the k-gonal 2-face over all realizations is not certified.
    """
    if k < 3:
        raise ConfigurationDegenerateError("a tent needs a polygon with at least 3 vertices")
    xs = [to_rational(x) for x in (DEFAULT_HEXAGON_XS if k == 6 else range(1, k + 1))]
    polygon = parabola_points(xs)
    left, right = xs[k // 2 - 1], xs[k // 2]
    qx = left + (right - left) / 3
    for drop in (Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)):
        apex = (qx, qx * qx - drop)
        if _visible_edges(polygon, apex) > 0:
            break
    else:
        raise ConfigurationDegenerateError("no admissible tent point found")
    tent, _ = tent_polytope(polygon, apex, h1, h2)
    centroid = tuple(sum(c) / len(tent) for c in zip(*tent.points))
    below = (centroid[0], centroid[1], Fraction(-1))
    config = PointConfiguration(3, tent.points + (below,), tent.labels + ("r",))
    config = lawrence_extension(config, config.index_of("r"), h1, h2)
    hull = convex_hull(config)
    logger.info("tent with outer point: %d points, %d facets", len(config), hull.n_facets)
    return config, hull, face_lattice(hull)
