"""
Shared fixtures: the JSON documents under fixtures/ and a few small configurations.
"""
from pathlib import Path

import pytest

from models import DocumentKind
from services.documents import configuration_from_document, graph_from_document, read_document
from services.numeric_core import PointConfiguration

FIXTURES = Path(__file__).parent.parent / "fixtures"


def load_points(name: str) -> PointConfiguration:
    return configuration_from_document(read_document(FIXTURES / f"{name}.json", DocumentKind.POINTS))


def load_graph(name: str):
    return graph_from_document(read_document(FIXTURES / f"{name}.json", DocumentKind.GRAPH))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def cube() -> PointConfiguration:
    return load_points("cube")


@pytest.fixture
def square() -> PointConfiguration:
    return load_points("square")


@pytest.fixture
def tetrahedron() -> PointConfiguration:
    return load_points("tetrahedron")


@pytest.fixture
def octahedron() -> PointConfiguration:
    return load_points("octahedron")


@pytest.fixture
def triangular_prism() -> PointConfiguration:
    return load_points("triangular_prism")
