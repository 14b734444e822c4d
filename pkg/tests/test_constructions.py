"""
Tests for Lawrence extensions, Pascal's configuration, connected sums and flat facets.
"""
from fractions import Fraction

import pytest

from services.constructions import (
    ConfigurationDegenerateError,
    ConnectedSumPreconditionError,
    FlatnessClass,
    InvalidHeightsError,
    NoIntersectionError,
    NotOnConicError,
    PlacementFailureError,
    ProjectiveTransform,
    boundary_complex,
    connected_sum,
    flatness_class,
    lawrence_extension,
    lawrence_polytope,
    on_common_conic,
    opposite_edge_intersections,
    parabola_points,
    pascal_5polytope,
    pascal_checks,
    pascal_configuration,
    projective_equivalence,
    rational_circle_points,
    reconstruct_point,
    recover_base_configuration,
    tent_polytope,
    tent_table,
    tent_with_outer_point,
)
from services.hull_lattice import hull_lattice
from services.numeric_core import MatrixQ, PointConfiguration, collinear
from tests.conftest import load_points


def test_lawrence_extension_adds_two_points_on_a_ray(square):
    extended = lawrence_extension(square, 0)
    assert extended.dim == 3
    assert extended.labels == ("2", "3", "4", "1_", "1^")
    assert extended.points[0] == (1, 0, 0)
    assert extended.points[3] == (0, 0, 1)
    assert extended.points[4] == (0, 0, 2)
    assert reconstruct_point(extended, "1_", "1^") == (0, 0)


def test_lawrence_extension_custom_heights(square):
    extended = lawrence_extension(square, 2, "1/3", 5)
    assert extended.points[-2][-1] == Fraction(1, 3)
    assert extended.points[-1][-1] == 5


@pytest.mark.parametrize("h1, h2", [(2, 1), (0, 1), (-1, 2), (1, 1)])
def test_lawrence_heights_must_be_increasing_and_positive(square, h1, h2):
    with pytest.raises(InvalidHeightsError):
        lawrence_extension(square, 0, h1, h2)


def test_lawrence_extension_rejects_bad_index(square):
    with pytest.raises(IndexError):
        lawrence_extension(square, 4)


def test_reconstruct_rejects_horizontal_line(square):
    extended = lawrence_extension(square, 0)
    with pytest.raises(NoIntersectionError):
        reconstruct_point(extended, "2", "3")


@pytest.mark.parametrize(
    "n", [3, 4, 5, pytest.param(6, marks=pytest.mark.slow), pytest.param(7, marks=pytest.mark.slow)]
)
def test_lawrence_polytope_of_planar_points(n):
    base = PointConfiguration.from_points(parabola_points(range(n)))
    extended, hull, lattice = lawrence_polytope(base)
    assert extended.dim == n + 2
    assert len(extended) == 2 * n
    assert len(hull.vertex_indices) == 2 * n
    assert hull.dim == n + 2
    assert lattice.is_graded()
    assert lattice.euler_sum() == 1 - (-1) ** (n + 2)
    recovered = recover_base_configuration(extended, base.labels)
    assert recovered.points == base.points


def test_lawrence_polytope_with_three_collinear_points():
    base = PointConfiguration.from_points([(0, 0), (1, 0), (2, 0), (1, 1)])
    extended, hull, lattice = lawrence_polytope(base)
    assert len(hull.vertex_indices) == 8
    assert hull.dim == 6
    assert lattice.is_graded()
    assert lattice.diamond_property_holds()
    assert lattice.euler_sum() == 0
    _, _, general = lawrence_polytope(PointConfiguration.from_points(parabola_points(range(4))))
    assert lattice.f_vector() != general.f_vector()
    assert recover_base_configuration(extended, base.labels).points == base.points


def test_lawrence_polytope_rejects_collinear_points():
    collinear_points = PointConfiguration.from_points([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(ConfigurationDegenerateError):
        lawrence_polytope(collinear_points)


def test_lawrence_polytope_rejects_swapped_heights(square):
    with pytest.raises(InvalidHeightsError):
        lawrence_polytope(square, 3, 1)


def test_pascal_configuration_default_hexagon():
    config = pascal_configuration()
    assert len(config) == 9
    assert config.labels[6:] == ("x1", "x2", "x3")
    assert on_common_conic(list(config.points[:6]))
    assert collinear(list(config.points[6:]))


def test_consecutive_parabola_points_have_parallel_opposite_edges():
    with pytest.raises(ConfigurationDegenerateError):
        pascal_configuration(parabola_points(range(1, 7)))


def test_hexagon_off_the_conic_is_rejected():
    points = parabola_points([1, 2, 3, 4, 5]) + [(Fraction(7), Fraction(50))]
    assert not on_common_conic(points)
    with pytest.raises(NotOnConicError):
        pascal_configuration(points)


def test_opposite_edge_meets_of_default_hexagon_are_points():
    meets = opposite_edge_intersections(parabola_points([1, 2, 3, 4, 5, 7]))
    assert len(meets) == 3
    assert all(m.point is not None for m in meets)


def test_rational_circle_points_are_on_the_unit_circle():
    points = rational_circle_points([0, 1, 2, 3, -1, -2])
    assert all(x * x + y * y == 1 for x, y in points)
    assert on_common_conic(points)


def test_pascal_5polytope():
    config, lattice = pascal_5polytope()
    checks = pascal_checks(config, lattice)
    assert checks.dim == 5
    assert checks.n_vertices == 12
    assert checks.hexagon_is_2face
    assert checks.extension_points_form_facet
    assert checks.passed


def test_projective_transform_basics():
    identity = ProjectiveTransform.identity(2)
    assert identity.dim == 2
    assert identity.apply((3, 4)) == (3, 4)
    with pytest.raises(ValueError):
        ProjectiveTransform(MatrixQ.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 0]]))
    to_infinity = ProjectiveTransform(MatrixQ.from_rows([[1, 0, 0], [0, 1, 0], [1, 0, 1]]))
    with pytest.raises(NoIntersectionError):
        to_infinity.apply((-1, 0))


def test_square_is_projectively_equivalent_to_a_trapezoid(square):
    trapezoid = PointConfiguration.from_points([(0, 0), (2, 0), (1, 1), (0, 1)])
    transform = projective_equivalence(square, trapezoid)
    assert transform is not None
    for source, target in zip(square.points, trapezoid.points):
        assert transform.apply(source) == target
        assert transform.weight(source) > 0


def test_crossing_correspondence_is_not_admissible(square):
    assert projective_equivalence(square, square, [0, 2, 1, 3]) is None
    assert projective_equivalence(square, square, [1, 2, 3, 0]) is not None


def test_five_points_with_a_moved_point_are_not_equivalent():
    pentagon = load_points("pentagon")
    moved = PointConfiguration.from_points([(0, 0), (1, 1), (2, 4), (3, 9), (4, 17)])
    assert projective_equivalence(pentagon, moved) is None


@pytest.mark.parametrize(
    "name, rows",
    [
        ("pentagon", [[7, 3, 0], [2, 9, 1], [1, 1, 11]]),
        ("cube", [[2, 1, 0, 1], [0, 3, 1, 0], [1, 0, 4, 2], [1, 1, 1, 5]]),
    ],
)
def test_projective_equivalence_recovers_large_coefficient_maps(name, rows):
    config = load_points(name)
    original = ProjectiveTransform(MatrixQ.from_rows(rows))
    image = config.replace_points([original.apply(p) for p in config.points])
    transform = projective_equivalence(config, image)
    assert transform is not None
    for source, target in zip(config.points, image.points):
        assert transform.apply(source) == target
        assert transform.weight(source) > 0


def test_map_through_the_hull_is_not_admissible():
    pentagon = load_points("pentagon")
    # weights 2x - 5 change sign across the pentagon
    folding = ProjectiveTransform(MatrixQ.from_rows([[1, 0, 0], [0, 1, 0], [2, 0, -5]]))
    image = pentagon.replace_points([folding.apply(p) for p in pentagon.points])
    assert projective_equivalence(pentagon, image) is None


def test_connected_sum_of_two_tetrahedra(tetrahedron):
    facet = [1, 2, 3]
    glued, lattice = connected_sum(tetrahedron, facet, tetrahedron, facet, {1: 1, 2: 2, 3: 3})
    assert len(glued) == 5
    assert glued.labels[-1] == "b:1"
    assert len(lattice.facets()) == 4 + 4 - 2
    _, lattice1 = hull_lattice(tetrahedron)
    assert all(face in lattice.faces for face in boundary_complex(lattice1, frozenset(facet)))
    assert flatness_class(lattice1.sublattice(facet), 3) == FlatnessClass.TRIANGLE


def test_connected_sum_of_two_cubes(cube):
    top, bottom = [4, 5, 6, 7], [0, 1, 2, 3]
    glued, lattice = connected_sum(cube, top, cube, bottom, {4: 0, 5: 1, 6: 2, 7: 3})
    assert len(glued) == 12
    assert len(lattice.facets()) == 6 + 6 - 2
    assert lattice.f_vector()[0] == 12


GLUINGS = [
    ("square_pyramid", {0: 0, 1: 1, 2: 2, 3: 3}, "square_pyramid"),
    ("tetrahedron", {0: 0, 1: 1, 2: 4}, "square_pyramid"),
    ("triangular_prism", {0: 0, 1: 1, 2: 2}, "tetrahedron"),
    ("triangular_prism", {0: 0, 1: 1, 4: 3, 3: 2}, "cube"),
    ("cube", {4: 0, 5: 1, 7: 2, 6: 3}, "square_pyramid"),
    ("octahedron", {0: 1, 2: 2, 4: 3}, "tetrahedron"),
    ("octahedron", {0: 1, 2: 3, 4: 5}, "octahedron"),
    ("square_pyramid", {1: 3, 2: 4, 4: 5}, "triangular_prism"),
    ("triangular_prism", {3: 0, 4: 1, 5: 2}, "triangular_prism"),
]


@pytest.mark.parametrize("first, correspondence, second", GLUINGS)
def test_connected_sums_of_small_polytopes(first, correspondence, second):
    p1, p2 = load_points(first), load_points(second)
    face1, face2 = list(correspondence), list(correspondence.values())
    _, lattice1 = hull_lattice(p1)
    _, lattice2 = hull_lattice(p2)
    glued, lattice = connected_sum(p1, face1, p2, face2, correspondence)
    assert len(glued) == len(p1) + len(p2) - len(face1)
    assert lattice.n_vertices == len(glued)
    assert len(lattice.facets()) == len(lattice1.facets()) + len(lattice2.facets()) - 2
    assert lattice.euler_sum() == 2
    assert all(face in lattice.faces for face in boundary_complex(lattice1, frozenset(face1)))


def test_connected_sum_of_square_pyramids_along_the_base():
    pyramid = load_points("square_pyramid")
    base = [0, 1, 2, 3]
    _, lattice = connected_sum(pyramid, base, pyramid, base, {v: v for v in base})
    assert lattice.f_vector() == (6, 12, 8)
    assert flatness_class(hull_lattice(pyramid)[1].sublattice(base), 3) == FlatnessClass.NONE


def test_connected_sum_preconditions(tetrahedron, cube, square):
    with pytest.raises(ConnectedSumPreconditionError):
        connected_sum(tetrahedron, [1, 2, 3], square, [0, 1], {1: 0, 2: 1})
    with pytest.raises(ConnectedSumPreconditionError):
        connected_sum(cube, [0, 1, 2], cube, [0, 1, 2], {0: 0, 1: 1, 2: 2})
    with pytest.raises(ConnectedSumPreconditionError):
        connected_sum(tetrahedron, [1, 2, 3], tetrahedron, [1, 2, 3], {1: 1, 2: 2})
    with pytest.raises(ConnectedSumPreconditionError):
        connected_sum(tetrahedron, [1, 2, 3], cube, [0, 1, 2, 3], {1: 0, 2: 1, 3: 2})


def test_connected_sum_with_an_empty_schedule_fails_placement(tetrahedron):
    with pytest.raises(PlacementFailureError):
        connected_sum(tetrahedron, [1, 2, 3], tetrahedron, [1, 2, 3], {1: 1, 2: 2, 3: 3}, schedule_length=0)


def test_flatness_classes_in_dimension_four(triangular_prism, octahedron):
    _, simplex = hull_lattice(load_points("simplex4"))
    assert flatness_class(simplex.sublattice(simplex.facets()[0]), 4) == FlatnessClass.PYRAMID
    _, prism = hull_lattice(triangular_prism)
    assert flatness_class(prism, 4) == FlatnessClass.PRISM
    _, octa = hull_lattice(octahedron)
    assert flatness_class(octa, 4) == FlatnessClass.NONE
    _, square = hull_lattice(load_points("square"))
    assert flatness_class(square, 3) == FlatnessClass.NONE
    assert flatness_class(square, 5) == FlatnessClass.NONE


def test_tents_over_pentagons_are_certified_flat():
    entries = [(j, lattice) for k, j, lattice in tent_table() if k == 5]
    assert entries
    for j, lattice in entries:
        assert j >= 1
        assert lattice.n_vertices == 7
        assert flatness_class(lattice, 4) == FlatnessClass.TENT


def test_tent_needs_an_outside_point():
    polygon = parabola_points([1, 2, 3, 4])
    with pytest.raises(ConfigurationDegenerateError):
        tent_polytope(polygon, (Fraction(5, 2), Fraction(8)))


def test_tent_with_outer_point_is_four_dimensional():
    config, hull, lattice = tent_with_outer_point(6)
    assert config.dim == 4
    assert len(config) == 10
    assert hull.dim == 4
    assert lattice.is_graded()


def test_pascal_configuration_from_the_hexagon_document():
    hexagon = load_points("hexagon")
    assert hull_lattice(hexagon)[1].f_vector() == (6, 6)
    assert pascal_configuration(hexagon.points) == pascal_configuration()
