"""
Command-line front end of the polytope realization toolkit.

    python main.py [--seed N] [--output DIR] [--format-version V] [--verbose] <command> ...

Exit codes: 0 ok, 1 postcondition failed, 2 usage or parse error,
3 precondition error, 4 degenerate input, 5 placement failure.
"""
import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from config import settings
from models import (
    ConnectedSumReport,
    DocumentKind,
    HullReport,
    RealizeReport,
    RealizerParams,
    ShorReport,
    SteinitzReport,
    StepRule,
    SystemReport,
)
from services.constructions import (
    ConfigurationDegenerateError,
    ConnectedSumPreconditionError,
    InvalidHeightsError,
    NoIntersectionError,
    PlacementFailureError,
    boundary_complex,
    connected_sum,
    flatness_class,
    lawrence_extension,
    lawrence_polytope,
    parabola_points,
    pascal_5polytope,
    pascal_checks,
    pascal_configuration,
    reconstruct_point,
)
from services.documents import (
    DocumentParseError,
    configuration_from_document,
    graph_from_document,
    lattice_document,
    lattice_from_document,
    points_document,
    read_document,
    report_document,
    shor_document,
    system_document,
    system_from_document,
    write_document,
)
from services.hull_lattice import DegenerateInputError, FaceLattice, edge_graph, hull_lattice, is_realization
from services.numeric_core import (
    DegenerateLineError,
    DimensionMismatchError,
    EmptyInputError,
    affine_basis,
    PointConfiguration,
    PolytopeToolkitError,
    format_rational,
    to_rational,
)
from services.realizer import (
    RealizationProblem,
    certify,
    find_realization,
    normalized_configuration,
    problem_from_configuration,
    tangent_dimension,
)
from services.report_renderer import ReportRenderer
from services.semialgebra import (
    CollinearityError,
    InvalidBasisError,
    NonPrimarySystemError,
    NotASolutionError,
    emit_realization_system,
    fit_polynomial_growth,
    measure_compiler_growth,
    polynomial_fit_r_squared,
    shor_compile,
)
from services.steinitz import (
    LatticeDimensionError,
    NotPolytopalError,
    TooSmallGraphError,
    coordinate_bit_length,
    embedding_lattice,
    is_planar,
    polytopality_checks,
    realization_space_dim_3,
    realize_3polytope,
    to_graph,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_POSTCONDITION = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3
EXIT_DEGENERATE = 4
EXIT_PLACEMENT = 5

PRECONDITION_ERRORS = (
    InvalidBasisError, NonPrimarySystemError, NotASolutionError, ConnectedSumPreconditionError,
    NotPolytopalError, TooSmallGraphError, LatticeDimensionError, InvalidHeightsError,
)
DEGENERATE_ERRORS = (
    DegenerateInputError, ConfigurationDegenerateError, NoIntersectionError, DimensionMismatchError,
    EmptyInputError, DegenerateLineError, CollinearityError,
)

renderer = ReportRenderer()


def _emit(args, stem: str, command: str, report, **extra) -> str:
    """Render a report, print it and store it next to the other outputs."""
    text = renderer.render(command, report, **extra)
    print(text, end="")
    data = report.model_dump() if hasattr(report, "model_dump") else dict(report)
    _write(args, report_document(text, data), f"{stem}.{command}-report.json")
    return text


def _write(args, document, name: str) -> Path:
    document.format_version = args.format_version
    path = write_document(document, Path(args.output) / name)
    logger.debug("wrote %s", path)
    return path


def _stem(path: str) -> str:
    name = Path(path).name
    return name[: -len(".json")] if name.endswith(".json") else Path(path).stem


def _read_points(path: str) -> PointConfiguration:
    return configuration_from_document(read_document(path, DocumentKind.POINTS))


def _hull_report(config: PointConfiguration, hull, lattice: FaceLattice, seed: int) -> HullReport:
    return HullReport(
        dim=hull.dim,
        n_points=len(config),
        f_vector=list(lattice.f_vector()),
        vertices=[config.labels[i] for i in hull.vertex_indices],
        non_vertices=[config.labels[i] for i in hull.non_vertices()],
        facets=[
            {
                "vertices": [config.labels[i] for i in sorted(members)],
                "normal": [format_rational(c) for c in plane.normal],
                "offset": format_rational(plane.offset),
            }
            for members, plane in hull.facets
        ],
        euler_sum=lattice.euler_sum(),
        seed=seed,
    )


def cmd_hull(args) -> int:
    config = _read_points(args.input)
    print(f"🔍 Computing the exact hull of {len(config)} points in dimension {config.dim}...")
    hull, lattice = hull_lattice(config)
    stem = _stem(args.input)
    _write(args, lattice_document(lattice, list(config.labels)), f"{stem}.lattice.json")
    _emit(args, stem, "hull", _hull_report(config, hull, lattice, args.seed))
    return EXIT_OK


def cmd_lattice(args) -> int:
    document = read_document(args.input)
    if document.kind == DocumentKind.POINTS:
        config = configuration_from_document(document)
        _, lattice = hull_lattice(config)
        labels = list(config.labels)
    elif document.kind == DocumentKind.LATTICE:
        lattice = lattice_from_document(document)
        labels = document.payload.get("labels") or [str(v) for v in lattice.vertices]
    else:
        raise DocumentParseError(f"expected a points or lattice document, got {document.kind.value}")
    label_of = dict(zip(lattice.vertices, labels))
    faces = {
        r: [" ".join(label_of[v] for v in sorted(f)) for f in lattice.faces_of_rank(r)] for r in range(lattice.dim)
    }
    graded, diamond = lattice.is_graded(), lattice.diamond_property_holds()
    _write(args, lattice_document(lattice, labels), f"{_stem(args.input)}.lattice.json")
    _emit(
        args, _stem(args.input), "lattice",
        {"dim": lattice.dim, "f_vector": list(lattice.f_vector()), "faces": faces, "graded": graded,
         "diamond": diamond, "euler_sum": lattice.euler_sum(), "seed": args.seed},
    )
    return EXIT_OK if graded and diamond else EXIT_POSTCONDITION


def cmd_steinitz(args) -> int:
    graph = graph_from_document(read_document(args.input, DocumentKind.GRAPH))
    checks = polytopality_checks(graph)
    report = SteinitzReport(
        simple=checks["simple"],
        planar=checks["planar"],
        three_connected=checks["3-connected"],
        polytopal=all(checks.values()),
        seed=args.seed,
    )
    status = EXIT_OK
    if args.realize:
        failed = next((name for name, ok in checks.items() if not ok), None)
        if failed is not None:
            report.failed_predicate = failed
            _emit(args, _stem(args.input), "steinitz", report)
            print(f"❌ Cannot realize: the graph is not {failed}")
            return EXIT_PRECONDITION
        print("📐 Realizing with integer coordinates...")
        config = realize_3polytope(graph)
        report.verified = is_realization(config, embedding_lattice(is_planar(graph)[1]))
        report.bit_length = coordinate_bit_length(config)
        _write(args, points_document(config), f"{_stem(args.input)}.points.json")
        status = EXIT_OK if report.verified else EXIT_POSTCONDITION
    _emit(args, _stem(args.input), "steinitz", report)
    return status


def cmd_lawrence(args) -> int:
    config = _read_points(args.input)
    stem = _stem(args.input)
    if args.reconstruct:
        lower, upper = args.reconstruct
        point = reconstruct_point(config, lower, upper)
        print(f"reconstructed point: ({', '.join(format_rational(c) for c in point)})")
        return EXIT_OK
    if args.all:
        extended, hull, _ = lawrence_polytope(config, args.h1, args.h2)
        print(f"✅ Lawrence polytope: {len(extended)} vertices in dimension {extended.dim}")
    else:
        if not args.index:
            raise ValueError("give --index labels or --all")
        extended = config
        for label in args.index:
            extended = lawrence_extension(extended, extended.index_of(label), args.h1, args.h2)
        print(f"✅ {len(extended)} points in dimension {extended.dim}")
    _write(args, points_document(extended), f"{stem}.lawrence.points.json")
    print(f"seed: {args.seed}")
    return EXIT_OK


def cmd_pascal(args) -> int:
    hexagon = parabola_points(args.xs) if args.xs else None
    print("🔍 Building Pascal's configuration and its Lawrence extensions...")
    config = pascal_configuration(hexagon)
    polytope, lattice = pascal_5polytope(hexagon)
    checks = pascal_checks(polytope, lattice)
    hull, _ = hull_lattice(polytope)
    _write(args, points_document(config), "pascal.points.json")
    _write(args, points_document(polytope), "pascal5.points.json")
    _write(args, lattice_document(lattice, list(polytope.labels)), "pascal5.lattice.json")
    _emit(
        args, "pascal5", "pascal", _hull_report(polytope, hull, lattice, args.seed),
        hexagon_is_2face=checks.hexagon_is_2face,
        extension_points_form_facet=checks.extension_points_form_facet,
        passed=checks.passed,
    )
    return EXIT_OK if checks.passed else EXIT_POSTCONDITION


def _labels_to_indices(config: PointConfiguration, text: str) -> list[int]:
    return [config.index_of(label.strip()) for label in text.split(",") if label.strip()]


def cmd_consum(args) -> int:
    p1, p2 = _read_points(args.first), _read_points(args.second)
    f1 = _labels_to_indices(p1, args.facet1)
    f2 = _labels_to_indices(p2, args.facet2)
    if len(f1) != len(f2):
        raise ConnectedSumPreconditionError("facet specifications of different sizes")
    _, lattice1 = hull_lattice(p1)
    _, lattice2 = hull_lattice(p2)
    print(f"🔗 Gluing {_stem(args.first)} and {_stem(args.second)} along {len(f1)}-vertex facets...")
    glued, lattice = connected_sum(p1, f1, p2, f2, dict(zip(f1, f2)))
    boundary = boundary_complex(lattice1, frozenset(f1))
    report = ConnectedSumReport(
        facets_p1=len(lattice1.facets()),
        facets_p2=len(lattice2.facets()),
        facets_sum=len(lattice.facets()),
        boundary_preserved=all(f in lattice.faces for f in boundary),
        flatness=flatness_class(lattice1.sublattice(f1), p1.dim).value,
        n_vertices=lattice.n_vertices,
        seed=args.seed,
    )
    stem = f"{_stem(args.first)}#{_stem(args.second)}"
    _write(args, points_document(glued), f"{stem}.points.json")
    _write(args, lattice_document(lattice, list(glued.labels)), f"{stem}.lattice.json")
    _emit(args, stem, "consum", report, facet_identity_holds=report.facet_identity_holds)
    return EXIT_OK if report.facet_identity_holds and report.boundary_preserved else EXIT_POSTCONDITION


def cmd_rs(args) -> int:
    config = _read_points(args.input)
    _, lattice = hull_lattice(config)
    basis = _labels_to_indices(config, args.basis) if args.basis else None
    problem = problem_from_configuration(config, basis)
    system = emit_realization_system(lattice, problem.basis, config)
    _write(args, system_document(system), f"{_stem(args.input)}.system.json")
    report = SystemReport(
        variables=system.n_vars,
        equations=len(system.equations),
        strict=len(system.strict),
        primary=system.primary(),
        seed=args.seed,
    )
    _emit(args, _stem(args.input), "rs", report)
    return EXIT_OK


def _parse_bounds(items: list[str] | None) -> dict[str, Fraction]:
    bounds = {}
    for item in items or []:
        name, _, value = item.partition("=")
        bounds[name.strip()] = to_rational(value)
    return bounds


def cmd_shor(args) -> int:
    system = system_from_document(read_document(args.input, DocumentKind.SYSTEM))
    compiled = shor_compile(system, _parse_bounds(args.bound))
    report = ShorReport(
        n_variables=compiled.normal_form.n,
        n_constraints=compiled.size,
        flag=compiled.flag.value,
        input_terms=system.term_count,
        coefficient_bits=system.coefficient_bits,
        contradiction=list(compiled.contradiction) if compiled.contradiction else None,
        seed=args.seed,
    )
    if args.growth:
        print("📈 Measuring output size on generated systems...")
        sizes, outputs = measure_compiler_growth(args.growth, np.random.default_rng(args.seed))
        report.growth_exponent, report.growth_r_squared = fit_polynomial_growth(sizes, outputs)
        report.growth_quadratic_r_squared = polynomial_fit_r_squared(sizes, outputs, 2)
    _write(args, shor_document(compiled), f"{_stem(args.input)}.shor.json")
    _emit(args, _stem(args.input), "shor", report)
    return EXIT_OK


def _realization_problem(path: str, basis_text: str | None) -> tuple[RealizationProblem, int | None]:
    document = read_document(path)
    if document.kind == DocumentKind.POINTS:
        config = configuration_from_document(document)
        basis = _labels_to_indices(config, basis_text) if basis_text else None
        problem = problem_from_configuration(config, basis)
    elif document.kind == DocumentKind.LATTICE:
        lattice = lattice_from_document(document)
        if lattice.dim != 3:
            raise LatticeDimensionError("lattice documents are realized through Steinitz; give points for d != 3")
        base = normalized_configuration(realize_3polytope(edge_graph(lattice)))
        basis = [int(i) for i in basis_text.split(",")] if basis_text else affine_basis(list(base.points))
        problem = RealizationProblem.build(lattice, basis, base)
    else:
        raise DocumentParseError(f"expected a points or lattice document, got {document.kind.value}")
    expected = realization_space_dim_3(problem.lattice) if problem.lattice.dim == 3 else None
    return problem, expected


def cmd_realize(args) -> int:
    problem, expected = _realization_problem(args.input, args.basis)
    params = RealizerParams(
        max_iters=args.max_iters or settings.max_iters,
        restarts=args.restarts or settings.restarts,
        step_rule=StepRule(args.step_rule or settings.step_rule),
        penalty_margin=settings.penalty_margin,
        convergence_tolerance=settings.convergence_tolerance,
        seed=args.seed,
    )
    print(f"🔍 Searching {problem.free_vars} free coordinates ({params.restarts} restarts, {params.step_rule.value})...")
    attempt = find_realization(problem, params)
    report = RealizeReport(
        success=attempt.success,
        certified=False,
        restart=attempt.restart,
        iterations=attempt.iterations,
        residual=attempt.residual,
        expected_dimension=expected,
        seed=args.seed,
    )
    if attempt.success:
        certificate = certify(attempt.points, problem, args.max_denominator)
        report.certified = certificate.accepted
        report.violated = certificate.violated
        if certificate.accepted:
            report.tangent_dimension = tangent_dimension(certificate.configuration, problem)
            _write(args, points_document(certificate.configuration), f"{_stem(args.input)}.realized.points.json")
    _emit(args, _stem(args.input), "realize", report)
    return EXIT_OK if report.certified else EXIT_POSTCONDITION


def cmd_selftest(args) -> int:
    """Small end-to-end battery over built-in configurations."""
    results: list[tuple[str, bool]] = []
    cube = PointConfiguration.from_points([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)])
    results.append(("cube f-vector 8 12 6", hull_lattice(cube)[1].f_vector() == (8, 12, 6)))
    polytope, lattice = pascal_5polytope()
    results.append(("Pascal 5-polytope", pascal_checks(polytope, lattice).passed))
    for n in (3, 4, 5):
        base = PointConfiguration.from_points(parabola_points(range(n)))
        extended, _, _ = lawrence_polytope(base)
        results.append((f"Lawrence n={n}", extended.dim == n + 2 and len(extended) == 2 * n))
    k4 = to_graph([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    tetrahedron = realize_3polytope(k4)
    results.append(("Steinitz K4", tetrahedron.is_integral() and edge_graph(hull_lattice(tetrahedron)[1]).edges == k4.edges))
    square = PointConfiguration.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])
    system = emit_realization_system(hull_lattice(square)[1], [0, 1, 2], square)
    results.append(("square system", system.n_vars == 2 and not system.equations and system.primary()))
    _emit(args, "selftest", "selftest", {"results": results, "seed": args.seed})
    return EXIT_OK if all(ok for _, ok in results) else EXIT_POSTCONDITION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description="Polytope realization-space toolkit")
    parser.add_argument("--seed", type=int, default=settings.random_seed, help="random seed (printed in every report)")
    parser.add_argument("--output", default=settings.output_dir, help="directory for written documents")
    parser.add_argument("--format-version", type=int, default=settings.format_version, help="document format version")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hull", help="exact hull and face lattice of a points document")
    p.add_argument("input")
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("lattice", help="face lattice summary of a points or lattice document")
    p.add_argument("input")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("steinitz", help="polytopality of a graph, optionally realized")
    p.add_argument("input")
    p.add_argument("--realize", action="store_true")
    p.set_defaults(func=cmd_steinitz)

    p = sub.add_parser("lawrence", help="Lawrence extensions of a points document")
    p.add_argument("input")
    p.add_argument("--index", nargs="+", metavar="LABEL", help="labels of the points to extend, in order")
    p.add_argument("--all", action="store_true", help="extend every point (planar input)")
    p.add_argument("--h1", default=None)
    p.add_argument("--h2", default=None)
    p.add_argument("--reconstruct", nargs=2, metavar=("LOWER", "UPPER"), help="recover a deleted point")
    p.set_defaults(func=cmd_lawrence)

    p = sub.add_parser("pascal", help="Pascal configuration and its 5-polytope")
    p.add_argument("--xs", nargs=6, default=None, help="x-coordinates of the hexagon on y = x^2")
    p.set_defaults(func=cmd_pascal)

    p = sub.add_parser("consum", help="connected sum of two polytopes along facets")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--facet1", required=True, help="comma-separated labels of the facet of the first polytope")
    p.add_argument("--facet2", required=True, help="labels of the facet of the second polytope, in corresponding order")
    p.set_defaults(func=cmd_consum)

    p = sub.add_parser("rs", help="emit the realization-space system")
    p.add_argument("input")
    p.add_argument("--basis", help="comma-separated labels of d+1 basis points")
    p.set_defaults(func=cmd_rs)

    p = sub.add_parser("shor", help="compile a primary system into binary constraints")
    p.add_argument("input")
    p.add_argument("--bound", action="append", metavar="NAME=VALUE", help="lower bound > 1 for a variable")
    p.add_argument("--growth", type=int, default=0, metavar="MAX_TERMS", help="also fit output size on generated systems")
    p.set_defaults(func=cmd_shor)

    p = sub.add_parser("realize", help="numerical realization with exact certification")
    p.add_argument("input")
    p.add_argument("--basis", default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--step-rule", choices=[r.value for r in StepRule], default=None)
    p.add_argument("--max-denominator", type=int, default=settings.max_denominator)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("selftest", help="run a quick end-to-end battery")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format_version < 1 or args.format_version > settings.format_version:
        parser.error(f"unsupported --format-version {args.format_version}")
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DocumentParseError as e:
        print(f"❌ Parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PlacementFailureError as e:
        print(f"❌ Placement failure: {e}", file=sys.stderr)
        return EXIT_PLACEMENT
    except PRECONDITION_ERRORS as e:
        print(f"❌ Precondition failed ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except DEGENERATE_ERRORS as e:
        print(f"❌ Degenerate input ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (KeyError, IndexError, ValueError) as e:
        print(f"❌ Invalid argument: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PolytopeToolkitError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_POSTCONDITION


if __name__ == "__main__":
    sys.exit(main())
