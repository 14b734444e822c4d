"""
Tests for polynomial systems, realization-space emission, stable-projection
fibers, projective scales and the binary-constraint compiler.
"""
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from services.hull_lattice import hull_lattice, is_realization
from services.constructions import NoIntersectionError, ProjectiveTransform
from services.numeric_core import DimensionMismatchError, MatrixQ, PointConfiguration, affine_basis
from services.semialgebra import (
    INFINITY,
    CollinearityError,
    InvalidBasisError,
    NonPrimarySystemError,
    NotASolutionError,
    OrderFlag,
    PolynomialZ,
    ProjectiveScale,
    SemialgebraicSystem,
    ShorConstraint,
    ShorOp,
    StableProjectionSpec,
    configuration_from_variables,
    emit_realization_system,
    evaluate_membership,
    fiber_of_stable_projection,
    fit_polynomial_growth,
    fourier_motzkin,
    measure_compiler_growth,
    polynomial_fit_r_squared,
    projective_scale,
    random_primary_system,
    rational_map_check,
    realization_variables,
    scale_relation_holds,
    shor_compile,
    shor_solution_transport,
    variables_from_configuration,
)
from tests.conftest import load_points


def system_of(equations=(), strict=(), nonstrict=(), names=("x",)):
    parse = lambda texts: tuple(PolynomialZ.parse(t, names) for t in texts)
    return SemialgebraicSystem(len(names), parse(equations), parse(strict), parse(nonstrict), tuple(names))


# ---- polynomials and systems ----

def test_parse_and_evaluate():
    p = PolynomialZ.parse("x**2 - 2*x*y + 3", ["x", "y"])
    assert p.term_count == 3
    assert p.degree == 2
    assert p.max_coefficient_bits == 2
    assert p.coefficients[(1, 1)] == -2
    assert p.evaluate([2, 1]) == 3
    assert PolynomialZ.parse("x**2 = 2", ["x"]).evaluate([3]) == 7


def test_parse_rejects_unknown_variables():
    with pytest.raises(ValueError):
        PolynomialZ.parse("x + z", ["x"])


def test_from_sympy_clears_denominators_keeping_sign():
    x = sp.Symbol("x")
    with pytest.raises(ValueError):
        PolynomialZ.from_sympy(x / 2 + sp.Rational(1, 3), [x])
    p = PolynomialZ.from_sympy(x / 2 + sp.Rational(1, 3), [x], clear_denominators=True)
    assert p.coefficients == {(1,): 3, (0,): 2}


def test_constants_and_negation():
    c = PolynomialZ.constant(2, 5)
    assert c.is_constant()
    assert c.constant_value() == 5
    assert (-c).constant_value() == -5
    assert PolynomialZ.constant(2, 0).terms == ()


def test_membership():
    system = system_of(["x**2 = 4"], ["x"], names=("x",))
    assert system.primary()
    assert evaluate_membership(system, [2])
    assert not evaluate_membership(system, [-2])
    with pytest.raises(DimensionMismatchError):
        evaluate_membership(system, [1, 2])
    assert not system_of(nonstrict=["x"]).primary()


# ---- realization-space systems ----

def test_triangle_system_has_no_variables():
    triangle = load_points("triangle")
    system = emit_realization_system(hull_lattice(triangle)[1], [0, 1, 2], triangle)
    assert system.n_vars == 0
    assert system.equations == ()
    assert system.strict == ()


def test_square_system_over_the_fourth_point(square):
    system = emit_realization_system(hull_lattice(square)[1], [0, 1, 2], square)
    assert system.variables == ("x3_0", "x3_1")
    assert system.equations == ()
    assert system.primary()
    assert evaluate_membership(system, [0, 1])
    assert evaluate_membership(system, [Fraction(1, 2), 2])
    assert not evaluate_membership(system, [2, 2])


def test_cube_system_has_one_equation_per_facet(cube):
    _, lattice = hull_lattice(cube)
    system = emit_realization_system(lattice, [0, 1, 2, 4], cube)
    assert system.n_vars == 12
    assert len(system.equations) == 6
    assert system.primary()
    names = realization_variables(cube, [0, 1, 2, 4])
    assert names[:3] == ["x3_0", "x3_1", "x3_2"]
    values = variables_from_configuration(cube, [0, 1, 2, 4])
    assert evaluate_membership(system, values)
    values[-1] = Fraction(11, 10)
    assert not evaluate_membership(system, values)


def test_system_solutions_are_realizations(square):
    _, lattice = hull_lattice(square)
    config = configuration_from_variables(square, [0, 1, 2], [Fraction(1, 2), 2])
    assert config.points[3] == (Fraction(1, 2), 2)
    assert hull_lattice(config)[1] == lattice


def test_invalid_basis(cube):
    _, lattice = hull_lattice(cube)
    with pytest.raises(InvalidBasisError):
        emit_realization_system(lattice, [0, 1, 2, 3], cube)
    with pytest.raises(InvalidBasisError):
        emit_realization_system(lattice, [0, 1, 2, 4], load_points("perturbed_cube"))


# ---- fibers ----

def test_fourier_motzkin_feasible_sample():
    rows = [[1, 0], [0, 1], [-1, -1]]
    rhs = [1, 1, -3]
    sample, certificate = fourier_motzkin(rows, rhs)
    assert certificate is None
    assert all(sum(Fraction(a) * t for a, t in zip(row, sample)) >= b for row, b in zip(rows, rhs))


def test_fourier_motzkin_infeasibility_certificate():
    rows = [[1, 1], [-1, 0], [0, -1]]
    rhs = [1, 0, 0]
    sample, y = fourier_motzkin(rows, rhs)
    assert sample is None
    assert all(c >= 0 for c in y)
    assert all(sum(c * row[k] for c, row in zip(y, rows)) == 0 for k in range(2))
    assert sum(c * b for c, b in zip(y, rhs)) > 0


def _linear(coefficients):
    """Fiber functional whose entries are constants in a single base variable."""
    return tuple(PolynomialZ.constant(1, c) for c in coefficients)


def test_fiber_with_an_equality():
    v = PolynomialZ.variable(1, 0)
    spec = StableProjectionSpec(1, 2, phi=((v, PolynomialZ.constant(1, 1)),), psi=(_linear([0, 1]),))
    fiber = fiber_of_stable_projection(spec, [3])
    assert not fiber.empty
    assert fiber.sample_is_valid()
    assert fiber.sample[1] == 0


def test_empty_fiber_has_a_certificate():
    spec = StableProjectionSpec(1, 2, phi=(_linear([1, 0]), _linear([-1, 0])))
    fiber = fiber_of_stable_projection(spec, [0])
    assert fiber.empty
    assert fiber.certificate_is_valid()
    assert not fiber.sample_is_valid()


def test_fiber_depends_on_the_base_point():
    v = PolynomialZ.variable(1, 0)
    spec = StableProjectionSpec(1, 1, phi=((v,), (PolynomialZ.constant(1, 1),)))
    assert not fiber_of_stable_projection(spec, [1]).empty
    assert fiber_of_stable_projection(spec, [-1]).empty


def test_rational_map_check():
    shift = ((PolynomialZ.parse("x + 1", ["x"]), PolynomialZ.constant(1, 1)),)
    back = ((PolynomialZ.parse("x - 1", ["x"]), PolynomialZ.constant(1, 1)),)
    wrong = ((PolynomialZ.parse("x", ["x"]), PolynomialZ.constant(1, 1)),)
    system = system_of(strict=["x"])
    report = rational_map_check(shift, back, system, [[1], [2], [-1]])
    assert report.checked == 2
    assert report.passed == 2
    assert report.ok
    assert not rational_map_check(shift, wrong, system, [[1]]).ok


# ---- projective scales ----

def cross_ratio(x, p0, p1, pinf):
    return ((x - p0) * (p1 - pinf)) / ((x - pinf) * (p1 - p0))


def test_projective_scale_matches_cross_ratio():
    p0, p1, pinf = (Fraction(1), Fraction(1)), (Fraction(3), Fraction(2)), (Fraction(7), Fraction(4))
    scale = ProjectiveScale(p0, p1, pinf)
    rng = random.Random(11)
    for _ in range(20):
        s = Fraction(rng.randint(-20, 20), rng.randint(1, 5))
        x = (1 + 2 * s, 1 + s)
        if x == pinf:
            continue
        assert projective_scale(scale, x) == cross_ratio(x[0], p0[0], p1[0], pinf[0])
    assert projective_scale(scale, p0) == 0
    assert projective_scale(scale, p1) == 1
    assert projective_scale(scale, pinf) is INFINITY


@pytest.mark.parametrize("seed", range(10))
def test_projective_scale_is_invariant_under_projective_maps(seed):
    rng = random.Random(seed)
    p0, p1, pinf = (Fraction(1), Fraction(1)), (Fraction(3), Fraction(2)), (Fraction(7), Fraction(4))
    scale = ProjectiveScale(p0, p1, pinf)
    try:
        transform = ProjectiveTransform(MatrixQ.from_rows([[rng.randint(-5, 5) for _ in range(3)] for _ in range(3)]))
        moved = ProjectiveScale(transform.apply(p0), transform.apply(p1), transform.apply(pinf))
    except (ValueError, NoIntersectionError):
        pytest.skip("matrix is singular or sends an anchor to infinity")
    checked = 0
    for _ in range(20):
        s = Fraction(rng.randint(-20, 20), rng.randint(1, 5))
        x = (1 + 2 * s, 1 + s)
        if x == pinf:
            continue
        try:
            image = transform.apply(x)
        except NoIntersectionError:
            continue
        assert projective_scale(moved, image) == projective_scale(scale, x)
        checked += 1
    assert checked > 0


def test_affine_scale_and_relations():
    scale = ProjectiveScale((Fraction(1), Fraction(1)), (Fraction(3), Fraction(2)))
    assert projective_scale(scale, (5, 3)) == 2
    assert scale_relation_holds(scale, (3, 2), (3, 2), (5, 3), ShorOp.ADD)
    assert scale_relation_holds(scale, (5, 3), (5, 3), (9, 5), ShorOp.MUL)
    assert not scale_relation_holds(scale, (3, 2), (5, 3), (5, 3), ShorOp.ADD)


def test_scale_rejects_points_off_the_line():
    with pytest.raises(CollinearityError):
        ProjectiveScale((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(1), Fraction(1)))
    scale = ProjectiveScale((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)))
    with pytest.raises(CollinearityError):
        projective_scale(scale, (1, 1))


# ---- binary-constraint compiler ----

def test_square_root_of_two_compiles_to_two_constraints():
    compiled = shor_compile(system_of(["x**2 = 2"]))
    assert compiled.normal_form.constraints == (
        ShorConstraint(1, 1, 3, ShorOp.ADD),
        ShorConstraint(2, 2, 3, ShorOp.MUL),
    )
    assert compiled.variable_map == {"x": 2}
    assert not compiled.infeasible


def test_lower_bound_makes_the_order_total():
    compiled = shor_compile(system_of(["x**2 = 2"]), {"x": Fraction(3, 2)})
    assert compiled.flag == OrderFlag.TOTAL
    assert compiled.normal_form.order == (1, 2, 3)
    assert (1, 2) in compiled.relations


def test_bounds_must_exceed_one():
    with pytest.raises(ValueError):
        shor_compile(system_of(["x**2 = 2"]), {"x": 1})


def test_non_primary_systems_are_rejected():
    with pytest.raises(NonPrimarySystemError):
        shor_compile(system_of(nonstrict=["x"]))


def test_solution_transport():
    compiled = shor_compile(system_of(["x**2 = 4"]))
    values = shor_solution_transport(compiled, [2])
    assert values[:2] == [1, 2]
    assert len(values) == compiled.normal_form.n
    assert all(c.holds(values) for c in compiled.normal_form.constraints)
    with pytest.raises(NotASolutionError):
        shor_solution_transport(compiled, [3])


def test_contradictory_strict_inequalities():
    compiled = shor_compile(system_of(strict=["x - 2", "1 - x"]))
    assert compiled.infeasible
    assert compiled.relations == ()


def test_random_systems_transport_their_solutions():
    rng = np.random.default_rng(5)
    for terms in (1, 3, 8, 15):
        system, solution = random_primary_system(terms, 3, rng)
        assert evaluate_membership(system, solution)
        compiled = shor_compile(system)
        assert all(1 <= c.i <= c.j < c.k for c in compiled.normal_form.constraints)
        values = shor_solution_transport(compiled, solution)
        assert all(c.holds(values) for c in compiled.normal_form.constraints)


def test_output_size_grows_polynomially():
    rng = np.random.default_rng(0)
    sizes, outputs = [], []
    for terms in range(1, 31):
        system, _ = random_primary_system(terms, 3, rng)
        compiled = shor_compile(system)
        sizes.append(compiled.input_size)
        outputs.append(compiled.size)
    exponent, _ = fit_polynomial_growth(sizes, outputs)
    assert exponent < 2


@pytest.mark.slow
def test_output_size_fits_a_quadratic_up_to_fifty_terms():
    sizes, outputs = measure_compiler_growth(50, np.random.default_rng(0), draws=32)
    assert len(sizes) == 50
    assert polynomial_fit_r_squared(sizes, outputs, 2) >= 0.99
    exponent, _ = fit_polynomial_growth(sizes, outputs)
    assert exponent < 2


def test_growth_measurement_counts_the_compiled_constraints():
    sizes, outputs = measure_compiler_growth(4, np.random.default_rng(7), n_vars=3, draws=1)
    rng = np.random.default_rng(7)
    for terms in range(1, 5):
        compiled = shor_compile(random_primary_system(terms, 3, rng, solution_range=(2, 2))[0])
        assert sizes[terms - 1] == compiled.input_size
        assert outputs[terms - 1] == compiled.size


def test_quadratic_fit_is_exact_on_a_parabola():
    assert polynomial_fit_r_squared([1, 2, 3, 4, 5], [3, 9, 19, 33, 51], 2) == pytest.approx(1.0)
    assert polynomial_fit_r_squared([1, 2, 3, 4], [5, 5, 5, 5], 1) == 1.0


def test_solution_range_is_respected():
    rng = np.random.default_rng(3)
    system, solution = random_primary_system(6, 4, rng, solution_range=(2, 2))
    assert solution == [2, 2, 2, 2]
    assert evaluate_membership(system, solution)
    with pytest.raises(ValueError):
        random_primary_system(6, 4, rng, solution_range=(1, 3))


def _respects_relations(compiled, values) -> bool:
    return all(values[a - 1] < values[b - 1] for a, b in compiled.relations)


def test_transported_solution_respects_the_derived_order():
    compiled = shor_compile(system_of(["x**2 = 4"]), {"x": Fraction(3, 2)})
    values = shor_solution_transport(compiled, [2])
    assert compiled.relations
    assert _respects_relations(compiled, values)


@pytest.mark.parametrize("seed", range(8))
def test_random_transports_respect_the_derived_order(seed):
    rng = np.random.default_rng(100 + seed)
    system, solution = random_primary_system(int(rng.integers(1, 20)), 3, rng)
    compiled = shor_compile(system)
    assert compiled.relations
    assert _respects_relations(compiled, shor_solution_transport(compiled, solution))


def test_growth_fit_on_exact_power_law():
    exponent, r_squared = fit_polynomial_growth([1, 2, 4, 8], [3, 12, 48, 192])
    assert exponent == pytest.approx(2.0)
    assert r_squared == pytest.approx(1.0)


@pytest.mark.parametrize("name", ["cube", "octahedron", "triangular_prism", "square_pyramid"])
def test_membership_agrees_with_realization_on_perturbations(name):
    config = load_points(name)
    _, lattice = hull_lattice(config)
    basis = affine_basis(list(config.points))
    system = emit_realization_system(lattice, basis, config)
    base_values = variables_from_configuration(config, basis)
    rng = random.Random(21)
    outcomes = set()
    for _ in range(200):
        values = list(base_values)
        for k in rng.sample(range(len(values)), rng.randint(1, min(3, len(values)))):
            values[k] += Fraction(rng.randint(-3, 3), rng.randint(4, 9))
        member = evaluate_membership(system, values)
        assert member == is_realization(configuration_from_variables(config, basis, values), lattice)
        outcomes.add(member)
    assert False in outcomes
    assert True in outcomes
