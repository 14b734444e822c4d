"""
End-to-end tests of the command line: reports, written documents and exit codes.
"""
import json

import pytest

from main import EXIT_DEGENERATE, EXIT_OK, EXIT_PRECONDITION, EXIT_USAGE, main


@pytest.fixture
def run(tmp_path, capsys):
    """Run the CLI with output redirected to tmp_path; returns (code, stdout)."""
    def _run(*argv):
        code = main(["--output", str(tmp_path), *argv])
        return code, capsys.readouterr().out
    return _run


def test_hull_of_cube(run, fixtures_dir, tmp_path):
    code, out = run("hull", str(fixtures_dir / "cube.json"))
    assert code == EXIT_OK
    assert "f-vector: 8 12 6" in out
    assert "euler sum: 2" in out
    assert "seed: 0" in out
    lattice = json.loads((tmp_path / "cube.lattice.json").read_text())
    assert lattice["kind"] == "lattice"
    assert len(lattice["payload"]["facets"]) == 6
    report = json.loads((tmp_path / "cube.hull-report.json").read_text())
    assert report["payload"]["data"]["f_vector"] == [8, 12, 6]


def test_hull_reports_non_vertices(run, fixtures_dir):
    code, out = run("hull", str(fixtures_dir / "square_center.json"))
    assert code == EXIT_OK
    assert "non-vertices: 5" in out


def test_seed_is_echoed(run, fixtures_dir):
    code, out = run("--seed", "17", "hull", str(fixtures_dir / "triangle.json"))
    assert code == EXIT_OK
    assert "seed: 17" in out


def test_lattice_of_a_lattice_document(run, fixtures_dir, tmp_path):
    run("hull", str(fixtures_dir / "octahedron.json"))
    code, out = run("lattice", str(tmp_path / "octahedron.lattice.json"))
    assert code == EXIT_OK
    assert "graded: true; diamond: true" in out


def test_steinitz_rejects_k5(run, fixtures_dir):
    code, out = run("steinitz", str(fixtures_dir / "k5.json"))
    assert code == EXIT_OK
    assert "planar: false; 3-polytopal: false" in out
    code, out = run("steinitz", "--realize", str(fixtures_dir / "k5.json"))
    assert code == EXIT_PRECONDITION
    assert "failed predicate: planar" in out


def test_steinitz_realizes_k4(run, fixtures_dir, tmp_path):
    code, out = run("steinitz", "--realize", str(fixtures_dir / "k4.json"))
    assert code == EXIT_OK
    assert "verified: true" in out
    assert (tmp_path / "k4.points.json").exists()


def test_lawrence_extension_and_reconstruction(run, fixtures_dir, tmp_path):
    code, out = run("lawrence", str(fixtures_dir / "square.json"), "--index", "1")
    assert code == EXIT_OK
    assert "5 points in dimension 3" in out
    code, out = run("lawrence", str(tmp_path / "square.lawrence.points.json"), "--reconstruct", "1_", "1^")
    assert code == EXIT_OK
    assert "reconstructed point: (0, 0)" in out


def test_lawrence_needs_a_target(run, fixtures_dir):
    code, _ = run("lawrence", str(fixtures_dir / "square.json"))
    assert code == EXIT_USAGE


def test_bad_heights_are_a_precondition_error(run, fixtures_dir):
    code, _ = run("lawrence", str(fixtures_dir / "square.json"), "--index", "1", "--h1", "2", "--h2", "1")
    assert code == EXIT_PRECONDITION


@pytest.mark.slow
def test_pascal(run, tmp_path):
    code, out = run("pascal")
    assert code == EXIT_OK
    assert "dim 5, 12 vertices" in out
    assert "checks passed: true" in out
    assert (tmp_path / "pascal5.lattice.json").exists()


def test_pascal_with_parallel_opposite_edges_is_degenerate(run):
    code, _ = run("pascal", "--xs", "1", "2", "3", "4", "5", "6")
    assert code == EXIT_DEGENERATE


def test_connected_sum_of_tetrahedra(run, fixtures_dir):
    tetra = str(fixtures_dir / "tetrahedron.json")
    code, out = run("consum", tetra, tetra, "--facet1", "2,3,4", "--facet2", "2,3,4")
    assert code == EXIT_OK
    assert "connected sum: 5 vertices" in out
    assert "facets: 6 (= 4 + 4 - 2)" in out
    assert "glued facet: triangle" in out


def test_connected_sum_of_mismatched_facets(run, fixtures_dir):
    code, _ = run(
        "consum", str(fixtures_dir / "tetrahedron.json"), str(fixtures_dir / "cube.json"),
        "--facet1", "2,3,4", "--facet2", "1,2,3",
    )
    assert code == EXIT_PRECONDITION


def test_realization_space_systems(run, fixtures_dir, tmp_path):
    code, out = run("rs", str(fixtures_dir / "triangle.json"))
    assert code == EXIT_OK
    assert "variables: 0; equations: 0" in out
    code, out = run("rs", str(fixtures_dir / "cube.json"))
    assert code == EXIT_OK
    assert "variables: 12; equations: 6; primary: true" in out
    system = json.loads((tmp_path / "cube.system.json").read_text())
    assert system["payload"]["variables"][0] == "x3_0"


def test_rs_rejects_a_dependent_basis(run, fixtures_dir):
    code, _ = run("rs", str(fixtures_dir / "cube.json"), "--basis", "1,2,3,4")
    assert code == EXIT_PRECONDITION


def test_shor_on_an_emitted_system(run, tmp_path):
    system = {
        "kind": "system",
        "format_version": 1,
        "payload": {"variables": ["x"], "equations": ["x**2 - 2"], "strict": [], "nonstrict": []},
    }
    path = tmp_path / "sqrt2.json"
    path.write_text(json.dumps(system))
    code, out = run("shor", str(path), "--bound", "x=3/2")
    assert code == EXIT_OK
    assert "flag: total" in out
    compiled = json.loads((tmp_path / "sqrt2.shor.json").read_text())
    assert compiled["payload"]["constraints"] == [[1, 1, 3, "add"], [2, 2, 3, "mul"]]


def test_realize_square(run, fixtures_dir):
    code, out = run("realize", str(fixtures_dir / "square.json"), "--restarts", "3")
    assert code == EXIT_OK
    assert "success: true" in out
    assert "certified: true" in out


def test_malformed_json_is_a_usage_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"kind": "points",')
    code = main(["--output", str(tmp_path), "hull", str(path)])
    assert code == EXIT_USAGE
    assert "line 1" in capsys.readouterr().err


def test_wrong_document_kind(run, fixtures_dir):
    code, _ = run("hull", str(fixtures_dir / "k4.json"))
    assert code == EXIT_USAGE


def test_coincident_points_are_degenerate(run, tmp_path):
    path = tmp_path / "twice.json"
    path.write_text(json.dumps({"kind": "points", "payload": {"dim": 2, "points": [["1", "1"], ["1", "1"]]}}))
    code, _ = run("hull", str(path))
    assert code == EXIT_DEGENERATE


def test_unsupported_format_version():
    with pytest.raises(SystemExit) as info:
        main(["--format-version", "9", "selftest"])
    assert info.value.code == EXIT_USAGE


def test_selftest(run):
    code, out = run("selftest")
    assert code == EXIT_OK
    assert "FAIL" not in out
    assert "PASS Steinitz K4" in out


def test_realize_a_lattice_document(run, fixtures_dir, tmp_path):
    run("hull", str(fixtures_dir / "cube.json"))
    code, out = run("realize", str(tmp_path / "cube.lattice.json"))
    assert code == EXIT_OK
    assert "certified: true" in out
    assert "tangent dimension: 6" in out
    assert (tmp_path / "cube.lattice.realized.points.json").exists()


def test_steinitz_realizes_the_dodecahedron(run, fixtures_dir, tmp_path):
    code, out = run("steinitz", "--realize", str(fixtures_dir / "dodecahedron.json"))
    assert code == EXIT_OK
    assert "verified: true" in out
    assert (tmp_path / "dodecahedron.points.json").exists()


def test_connected_sum_along_a_square_is_not_certified_flat(run, fixtures_dir):
    pyramid = str(fixtures_dir / "square_pyramid.json")
    code, out = run("consum", pyramid, pyramid, "--facet1", "1,2,3,4", "--facet2", "1,2,3,4")
    assert code == EXIT_OK
    assert "connected sum: 6 vertices" in out
    assert "facets: 8 (= 5 + 5 - 2)" in out
    assert "boundary of the glued facet preserved: true" in out
    assert "glued facet: none" in out


def _system_file(tmp_path, name, equations, strict=()):
    path = tmp_path / f"{name}.json"
    payload = {"variables": ["x"], "equations": list(equations), "strict": list(strict), "nonstrict": []}
    path.write_text(json.dumps({"kind": "system", "format_version": 1, "payload": payload}))
    return str(path)


def test_shor_flag_depends_on_the_lower_bound(run, tmp_path):
    code, out = run("shor", _system_file(tmp_path, "free", ["x**2 - 2"]))
    assert code == EXIT_OK
    assert "flag: partial" in out
    code, out = run("shor", _system_file(tmp_path, "bounded", ["x**2 - 2"], ["x - 1"]))
    assert code == EXIT_OK
    assert "flag: total" in out


def test_shor_growth_report(run, tmp_path):
    code, out = run("shor", _system_file(tmp_path, "sqrt2", ["x**2 - 2"]), "--growth", "5")
    assert code == EXIT_OK
    assert "growth exponent:" in out
    assert "quadratic fit R^2:" in out
