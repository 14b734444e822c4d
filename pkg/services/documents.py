"""
JSON documents exchanged by the command line.

Every file is a ``Document`` envelope (kind, format_version, payload).
Rationals are written as "p/q" strings (integers as plain digit strings) so
fixtures stay exact and diffable. Files are written atomically.
"""
import json
import os
import re
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from models import Document, DocumentKind
from services.hull_lattice import FaceLattice, Graph
from services.numeric_core import PointConfiguration, PolytopeToolkitError, format_rational, to_rational
from services.semialgebra import (
    PolynomialZ,
    SemialgebraicSystem,
    ShorCompilation,
)


class DocumentParseError(PolytopeToolkitError):
    """
    Raised when a document cannot be read.

    Carries the 1-based line and column when the offending key can be located
    in the source text, and None for both otherwise.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is None:
            super().__init__(f"{message} (no source position)")
        else:
            super().__init__(f"line {line}, column {column}: {message}")


def _source_position(text: str, loc: tuple) -> tuple[int | None, int | None]:
    """Line and column of the deepest object key of ``loc`` found in the JSON text."""
    offset, found = 0, None
    for part in loc:
        if not isinstance(part, str):
            continue
        match = re.compile(rf'"{re.escape(part)}"\s*:').search(text, offset)
        if match is None:
            break
        found = offset = match.start()
    if found is None:
        return None, None
    line = text.count("\n", 0, found) + 1
    return line, found - (text.rfind("\n", 0, found) + 1) + 1


def parse_document(text: str, expected: DocumentKind | None = None) -> Document:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentParseError(e.msg, e.lineno, e.colno)
    try:
        document = Document.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        message = f"{where}: {first['msg']}" if where else first["msg"]
        raise DocumentParseError(message, *_source_position(text, first["loc"]))
    if expected is not None and document.kind != expected:
        raise DocumentParseError(
            f"expected a {expected.value} document, got {document.kind.value}", *_source_position(text, ("kind",))
        )
    return document


def serialize_document(document: Document) -> str:
    return json.dumps(document.model_dump(mode="json"), indent=2) + "\n"


def read_document(path: str | Path, expected: DocumentKind | None = None) -> Document:
    return parse_document(Path(path).read_text(encoding="utf-8"), expected)


def write_document(document: Document, path: str | Path) -> Path:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(serialize_document(document))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _rational(value: Any, where: str) -> Fraction:
    try:
        return to_rational(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise DocumentParseError(f"{where}: {value!r} is not a rational number")


def points_document(config: PointConfiguration) -> Document:
    return Document(kind=DocumentKind.POINTS, payload={
        "dim": config.dim,
        "labels": list(config.labels),
        "points": [[format_rational(c) for c in p] for p in config.points],
    })


def configuration_from_document(document: Document) -> PointConfiguration:
    payload = document.payload
    try:
        rows = payload["points"]
        points = [tuple(_rational(c, f"points[{i}]") for c in row) for i, row in enumerate(rows)]
        dim = int(payload.get("dim", len(points[0]) if points else 0))
        return PointConfiguration(dim, tuple(points), tuple(payload.get("labels") or ()))
    except DocumentParseError:
        raise
    except (KeyError, IndexError) as e:
        raise DocumentParseError(f"points payload is missing {e}")
    except (ValueError, PolytopeToolkitError) as e:
        raise DocumentParseError(str(e))


def graph_document(graph: Graph) -> Document:
    return Document(kind=DocumentKind.GRAPH, payload={"n": graph.n, "edges": [list(e) for e in sorted(graph.edges)]})


def graph_from_document(document: Document) -> Graph:
    payload = document.payload
    try:
        return Graph.from_edges(int(payload["n"]), payload["edges"])
    except KeyError as e:
        raise DocumentParseError(f"graph payload is missing {e}")
    except (TypeError, ValueError) as e:
        raise DocumentParseError(f"invalid graph: {e}")


def lattice_document(lattice: FaceLattice, labels: list[str] | None = None) -> Document:
    faces = {
        str(r): [sorted(f) for f in lattice.faces_of_rank(r)] for r in range(lattice.dim)
    }
    payload = {"vertices": list(lattice.vertices), "facets": [sorted(f) for f in lattice.facets()], "faces": faces}
    if labels is not None:
        payload["labels"] = labels
    return Document(kind=DocumentKind.LATTICE, payload=payload)


def lattice_from_document(document: Document) -> FaceLattice:
    payload = document.payload
    try:
        return FaceLattice.from_facets(payload["vertices"], payload["facets"])
    except KeyError as e:
        raise DocumentParseError(f"lattice payload is missing {e}")


def system_document(system: SemialgebraicSystem) -> Document:
    names = list(system.variables)
    return Document(kind=DocumentKind.SYSTEM, payload={
        "variables": names,
        "equations": [p.to_text(names) for p in system.equations],
        "strict": [p.to_text(names) for p in system.strict],
        "nonstrict": [p.to_text(names) for p in system.nonstrict],
    })


def system_from_document(document: Document) -> SemialgebraicSystem:
    payload = document.payload
    names = list(payload.get("variables", []))
    parsed = {}
    for key in ("equations", "strict", "nonstrict"):
        polys = []
        for i, text in enumerate(payload.get(key, [])):
            try:
                polys.append(PolynomialZ.parse(text, names))
            except (ValueError, SyntaxError, TypeError) as e:
                raise DocumentParseError(f"{key}[{i}]: cannot parse {text!r}: {e}")
        parsed[key] = tuple(polys)
    return SemialgebraicSystem(len(names), parsed["equations"], parsed["strict"], parsed["nonstrict"], tuple(names))


def shor_document(compiled: ShorCompilation) -> Document:
    form = compiled.normal_form
    return Document(kind=DocumentKind.SHOR, payload={
        "n": form.n,
        "variable_map": compiled.variable_map,
        "constraints": [[c.i, c.j, c.k, c.op.value] for c in form.constraints],
        "flag": compiled.flag.value,
        "order": list(form.order) if form.order is not None else None,
        "relations": [list(r) for r in compiled.relations],
        "contradiction": list(compiled.contradiction) if compiled.contradiction else None,
    })


def report_document(text: str, data: dict[str, Any]) -> Document:
    return Document(kind=DocumentKind.REPORT, payload={"text": text, "data": data})
