"""
Steinitz's theorem as a decision procedure, plus an integer realizer.

A graph is the edge graph of a 3-polytope iff it is simple, planar and
3-connected. Realization goes Tutte embedding -> Maxwell-Cremona lift ->
integer scaling. The lift needs a triangular outer face; graphs without one
have a degree-3 vertex, so their dual is realized instead and polarized.
"""
from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import networkx as nx

from services.hull_lattice import FaceLattice, Graph, convex_hull, is_realization
from services.numeric_core import (
    MatrixQ,
    PointConfiguration,
    PolytopeToolkitError,
    SolutionKind,
    Vector,
    dot,
    solve_linear,
    sub,
    to_vector,
)

logger = logging.getLogger(__name__)


class TooSmallGraphError(PolytopeToolkitError):
    """Raised when a connectivity question needs at least four vertices."""
    pass


class NotPolytopalError(PolytopeToolkitError):
    """Raised when a graph fails one of Steinitz's three conditions."""

    def __init__(self, predicate: str):
        self.predicate = predicate
        super().__init__(f"graph is not 3-polytopal: {predicate} check failed")


class LatticeDimensionError(PolytopeToolkitError):
    """Raised when a lattice has the wrong rank for the question asked."""
    pass


@dataclass(frozen=True)
class PlanarEmbedding:
    """Combinatorial plane embedding: directed face cycles, one per face."""

    graph: Graph
    faces: tuple[tuple[int, ...], ...]
    outer_face: int

    def euler_characteristic(self) -> int:
        return self.graph.n - len(self.graph.edges) + len(self.faces)

    def half_edge_faces(self) -> dict[tuple[int, int], int]:
        """Face index owning each directed half-edge."""
        owner = {}
        for k, cycle in enumerate(self.faces):
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                owner[(a, b)] = k
        return owner

    def with_outer_face(self, k: int) -> "PlanarEmbedding":
        return PlanarEmbedding(self.graph, self.faces, k)


def _as_edge_list(g) -> list[tuple[int, int]]:
    if isinstance(g, Graph):
        return sorted(g.edges)
    if isinstance(g, nx.Graph):
        return [(int(a), int(b)) for a, b in g.edges()]
    return [(int(a), int(b)) for a, b in g]


def is_simple(g) -> bool:
    """No loops and no parallel edges; accepts an edge list or a networkx multigraph."""
    edges = _as_edge_list(g)
    if any(a == b for a, b in edges):
        return False
    counts = Counter(tuple(sorted(e)) for e in edges)
    return all(c == 1 for c in counts.values())


def to_graph(g, n: int | None = None) -> Graph:
    if isinstance(g, Graph):
        return g
    edges = _as_edge_list(g)
    if n is None:
        n = max((max(e) for e in edges), default=-1) + 1
    return Graph.from_edges(n, edges)


def _smallest_face(faces: Sequence[tuple[int, ...]]) -> int:
    def key(k: int):
        cycle = faces[k]
        rotations = [cycle[i:] + cycle[:i] for i in range(len(cycle))]
        return (len(cycle), min(rotations))
    return min(range(len(faces)), key=key)


def is_planar(g: Graph) -> tuple[bool, PlanarEmbedding | None]:
    """Planarity test with a combinatorial embedding as witness."""
    planar, embedding = nx.check_planarity(g.to_networkx())
    if not planar:
        return False, None
    visited: set[tuple[int, int]] = set()
    faces: list[tuple[int, ...]] = []
    for v, w in sorted(embedding.edges()):
        if (v, w) in visited:
            continue
        cycle = embedding.traverse_face(v, w, mark_half_edges=visited)
        faces.append(tuple(cycle))
    return True, PlanarEmbedding(g, tuple(faces), _smallest_face(faces) if faces else 0)


def is_3connected(g: Graph) -> bool:
    """No vertex cut of size two or less."""
    if g.n < 4:
        raise TooSmallGraphError(f"3-connectivity needs at least 4 vertices, got {g.n}")
    graph = g.to_networkx()
    if not nx.is_connected(graph):
        return False
    return nx.node_connectivity(graph) >= 3


def polytopality_checks(g) -> dict[str, bool]:
    """The three Steinitz predicates, evaluated lazily left to right."""
    checks = {"simple": is_simple(g)}
    if not checks["simple"]:
        return {**checks, "planar": False, "3-connected": False}
    graph = to_graph(g)
    checks["planar"] = is_planar(graph)[0]
    checks["3-connected"] = graph.n >= 4 and is_3connected(graph)
    return checks


def is_3polytopal(g) -> bool:
    return all(polytopality_checks(g).values())


def embedding_lattice(embedding: PlanarEmbedding) -> FaceLattice:
    """Face lattice whose facets are the embedding's face cycles."""
    return FaceLattice.from_facets(range(embedding.graph.n), embedding.faces)


def _convex_polygon(k: int) -> list[Vector]:
    """k points on the parabola y = x^2, in convex position in this order."""
    return [(Fraction(i), Fraction(i * i)) for i in range(k)]


def tutte_embedding(embedding: PlanarEmbedding, outer_polygon: Sequence[Sequence] | None = None) -> list[Vector]:
    """Barycentric embedding with unit weights and the outer face pinned to a convex polygon."""
    g = embedding.graph
    outer = embedding.faces[embedding.outer_face]
    polygon = [to_vector(p) for p in outer_polygon] if outer_polygon else _convex_polygon(len(outer))
    if len(polygon) != len(outer):
        raise ValueError(f"outer face has {len(outer)} vertices, polygon has {len(polygon)}")
    pinned = dict(zip(outer, polygon))
    interior = [v for v in range(g.n) if v not in pinned]
    column = {v: i for i, v in enumerate(interior)}
    positions: dict[int, Vector] = dict(pinned)
    if interior:
        rows, rhs_x, rhs_y = [], [], []
        for v in interior:
            row = [Fraction(0)] * len(interior)
            bx = by = Fraction(0)
            neighbors = g.neighbors(v)
            row[column[v]] = Fraction(len(neighbors))
            for u in neighbors:
                if u in pinned:
                    bx += pinned[u][0]
                    by += pinned[u][1]
                else:
                    row[column[u]] -= 1
            rows.append(row)
            rhs_x.append(bx)
            rhs_y.append(by)
        m = MatrixQ.from_rows(rows)
        xs, ys = solve_linear(m, rhs_x), solve_linear(m, rhs_y)
        if xs.kind != SolutionKind.UNIQUE or ys.kind != SolutionKind.UNIQUE:
            raise NotPolytopalError("3-connected")
        for v in interior:
            positions[v] = (xs.particular[column[v]], ys.particular[column[v]])
    return [positions[v] for v in range(g.n)]


def maxwell_cremona_lift(embedding: PlanarEmbedding, positions: Sequence[Vector]) -> list[Fraction]:
    """
    Heights turning the unit-stress Tutte drawing into a convex polyhedral surface.

    Face planes are propagated across interior edges; consistency around each
    interior vertex is exactly its equilibrium condition.
    """
    outer = embedding.outer_face
    owner = embedding.half_edge_faces()
    gradient: dict[int, Vector] = {}
    offset: dict[int, Fraction] = {}
    start = next(k for k in range(len(embedding.faces)) if k != outer)
    gradient[start], offset[start] = (Fraction(0), Fraction(0)), Fraction(0)
    queue = deque([start])
    while queue:
        g_face = queue.popleft()
        cycle = embedding.faces[g_face]
        for v, u in zip(cycle, cycle[1:] + cycle[:1]):
            f_face = owner[(u, v)]
            if f_face == outer or f_face in gradient:
                continue
            # unit stress: a_F = a_G + J(p_v - p_u) with J(x, y) = (-y, x)
            dx, dy = sub(positions[v], positions[u])
            a_g = gradient[g_face]
            a_f = (a_g[0] - dy, a_g[1] + dx)
            gradient[f_face] = a_f
            offset[f_face] = offset[g_face] + dot(sub(a_g, a_f), positions[u])
            queue.append(f_face)

    heights: list[Fraction | None] = [None] * embedding.graph.n
    for k, cycle in enumerate(embedding.faces):
        if k == outer:
            continue
        for v in cycle:
            if heights[v] is None:
                heights[v] = dot(gradient[k], positions[v]) + offset[k]

    for k, cycle in enumerate(embedding.faces):
        if k == outer:
            continue
        for u, v in zip(cycle, cycle[1:] + cycle[:1]):
            other = owner[(v, u)]
            if other == outer:
                continue
            w = next(x for x in embedding.faces[other] if x not in (u, v))
            plane_value = dot(gradient[k], positions[w]) + offset[k]
            if plane_value > heights[w]:
                return [-h for h in heights]
            return list(heights)
    return list(heights)


def _clear_denominators(points: Iterable[Vector]) -> list[Vector]:
    points = list(points)
    common = lcm(*(x.denominator for p in points for x in p))
    return [tuple(x * common for x in p) for p in points]


def coordinate_bit_length(config: PointConfiguration) -> int:
    """Largest bit length among coordinate numerators and denominators."""
    return max(
        (max(abs(x.numerator).bit_length(), x.denominator.bit_length()) for p in config.points for x in p),
        default=0,
    )


def _lift_with_triangle(embedding: PlanarEmbedding, polygon: Sequence[Sequence] | None = None) -> list[Vector]:
    positions = tutte_embedding(embedding, polygon)
    heights = maxwell_cremona_lift(embedding, positions)
    return [(p[0], p[1], h) for p, h in zip(positions, heights)]


def dual_graph(embedding: PlanarEmbedding) -> Graph:
    owner = embedding.half_edge_faces()
    edges = {tuple(sorted((owner[(a, b)], owner[(b, a)]))) for a, b in owner}
    return Graph.from_edges(len(embedding.faces), edges)


def _polar_realization(embedding: PlanarEmbedding) -> list[Vector]:
    """Realize via the dual (which has a triangle) and take the polar polytope."""
    dual = dual_graph(embedding)
    _, dual_embedding = is_planar(dual)
    dual_points = _realize_points(dual_embedding)
    n_dual = len(dual_points)
    centroid = tuple(sum(c) / n_dual for c in zip(*dual_points))
    hull = convex_hull(PointConfiguration.from_points(dual_points))
    faces_at_vertex = {
        frozenset(k for k, cycle in enumerate(embedding.faces) if v in cycle): v
        for v in range(embedding.graph.n)
    }
    polar: dict[int, Vector] = {}
    for members, plane in hull.facets:
        v = faces_at_vertex[members]
        shifted = plane.offset - dot(plane.normal, centroid)
        polar[v] = tuple(c / shifted for c in plane.normal)
    return [polar[v] for v in range(embedding.graph.n)]


def _realize_points(embedding: PlanarEmbedding) -> list[Vector]:
    outer = embedding.faces[embedding.outer_face]
    if len(outer) == 3:
        return _lift_with_triangle(embedding)
    logger.debug("no triangular face; realizing the dual and polarizing")
    return _polar_realization(embedding)


def realize_3polytope(g) -> PointConfiguration:
    """Integer-coordinate 3-polytope whose edge graph is g."""
    checks = polytopality_checks(g)
    failed = next((name for name, ok in checks.items() if not ok), None)
    if failed:
        raise NotPolytopalError(failed)
    graph = to_graph(g)
    _, embedding = is_planar(graph)
    points = _clear_denominators(_realize_points(embedding))
    config = PointConfiguration.from_points(points, [str(v) for v in range(graph.n)])
    if not is_realization(config, embedding_lattice(embedding)):
        raise PolytopeToolkitError("lifted coordinates failed exact verification")
    logger.info("realized %d-vertex graph with coordinates of %d bits", graph.n, coordinate_bit_length(config))
    return config


def prescribe_facet(g, face: Sequence[int], polygon: Sequence[Sequence]) -> PointConfiguration | None:
    """
    Realize g with one face placed exactly at the given convex polygon (z = 0).

    Returns None when the unit-stress lift does not keep that face planar;
    this is a check on examples, not a general construction.
    """
    graph = to_graph(g)
    planar, embedding = is_planar(graph)
    if not planar:
        raise NotPolytopalError("planar")
    target = tuple(face)
    match = None
    for k, cycle in enumerate(embedding.faces):
        for seq in (cycle, tuple(reversed(cycle))):
            rotations = [seq[i:] + seq[:i] for i in range(len(seq))]
            if target in rotations:
                match = k
                ordered = target
    if match is None:
        raise ValueError(f"{list(face)} is not a face cycle of the graph")
    cycle = embedding.faces[match]
    polygon_by_vertex = dict(zip(ordered, (to_vector(p) for p in polygon)))
    outer_embedding = embedding.with_outer_face(match)
    positions = tutte_embedding(outer_embedding, [polygon_by_vertex[v] for v in cycle])
    heights = maxwell_cremona_lift(outer_embedding, positions)
    # shear so the first three face vertices sit at z = 0
    anchors = cycle[:3]
    shear = solve_linear(
        MatrixQ.from_rows([(positions[v][0], positions[v][1], 1) for v in anchors]),
        [heights[v] for v in anchors],
    ).particular
    points = [
        (p[0], p[1], h - shear[0] * p[0] - shear[1] * p[1] - shear[2])
        for p, h in zip(positions, heights)
    ]
    config = PointConfiguration.from_points(points, [str(v) for v in range(graph.n)])
    if any(points[v][2] != 0 for v in cycle):
        return None
    if not is_realization(config, embedding_lattice(embedding)):
        return None
    return config


def realization_space_dim_3(lattice: FaceLattice) -> int:
    """Dimension e - 6 of the realization space of a 3-polytope with e edges."""
    if lattice.dim != 3:
        raise LatticeDimensionError(f"expected a 3-polytope lattice, got rank {lattice.dim}")
    return len(lattice.edges()) - 6
