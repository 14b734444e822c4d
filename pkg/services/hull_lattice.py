"""
Exact convex hulls, face lattices and combinatorial equivalence.

Hulls are built by beneath-beyond insertion over a simplicial boundary,
then coplanar simplices are merged into (possibly non-simplicial) facets.
Face lattices are the intersection closure of the facet vertex sets.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from services.numeric_core import (
    Hyperplane,
    MatrixQ,
    PointConfiguration,
    PolytopeToolkitError,
    Vector,
    affine_basis,
    affine_dim,
    hyperplane_through,
    pivot_columns,
    rank,
    scale,
)

logger = logging.getLogger(__name__)

Face = frozenset[int]


class DegenerateInputError(PolytopeToolkitError):
    """Raised when a configuration has no proper convex hull."""
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.n - 1}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        return cls(n, frozenset(tuple(sorted((int(a), int(b)))) for a, b in edges))

    def neighbors(self, v: int) -> set[int]:
        return {j if i == v else i for i, j in self.edges if v in (i, j)}

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class HullResult:
    """Facets of conv(config) with outward hyperplanes (interior side is <)."""

    facets: tuple[tuple[Face, Hyperplane], ...]
    vertex_indices: tuple[int, ...]
    dim: int
    config: PointConfiguration

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    def non_vertices(self) -> list[int]:
        return [i for i in range(len(self.config)) if i not in self.vertex_indices]


@dataclass(frozen=True)
class FaceLattice:
    """
    Combinatorial type of a polytope: faces as sets of vertex ids with ranks.

    ``vertices`` are the ids used inside the faces (point indices of the
    configuration the lattice came from).
    """

    vertices: tuple[int, ...]
    ranks: Mapping[Face, int] = field(hash=False, compare=False)

    @classmethod
    def from_facets(cls, vertices: Iterable[int], facets: Iterable[Iterable[int]]) -> "FaceLattice":
        """Intersection closure of the facets, ranked by longest chain length."""
        vertices = tuple(sorted(vertices))
        facet_sets = list(dict.fromkeys(frozenset(f) for f in facets))
        top = frozenset(vertices)
        faces: set[Face] = {top, frozenset()}
        frontier = list(facet_sets)
        faces.update(facet_sets)
        while frontier:
            new_faces = []
            for face in frontier:
                for facet in facet_sets:
                    meet = face & facet
                    if meet not in faces:
                        faces.add(meet)
                        new_faces.append(meet)
            frontier = new_faces
        ranks: dict[Face, int] = {}
        for face in sorted(faces, key=len):
            if not face:
                ranks[face] = -1
                continue
            # the largest proper meet with a facet is a face covered by this one
            meets = [face & f for f in facet_sets if not face <= f]
            ranks[face] = ranks[max(meets, key=len)] + 1 if meets else 0
        return cls(vertices, ranks)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def dim(self) -> int:
        return self.ranks[frozenset(self.vertices)]

    @property
    def faces(self) -> frozenset[Face]:
        return frozenset(self.ranks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FaceLattice):
            return NotImplemented
        return self.vertices == other.vertices and dict(self.ranks) == dict(other.ranks)

    def __hash__(self) -> int:
        return hash((self.vertices, self.faces))

    def faces_of_rank(self, r: int) -> list[Face]:
        return sorted((f for f, k in self.ranks.items() if k == r), key=sorted)

    def facets(self) -> list[Face]:
        return self.faces_of_rank(self.dim - 1)

    def edges(self) -> list[Face]:
        return self.faces_of_rank(1)

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.faces_of_rank(r)) for r in range(self.dim))

    def rank_of(self, face: Iterable[int]) -> int | None:
        return self.ranks.get(frozenset(face))

    def interval(self, lower: Face, upper: Face) -> list[Face]:
        return [f for f in self.ranks if lower <= f <= upper]

    def _covers(self) -> dict[Face, list[Face]]:
        covers: dict[Face, list[Face]] = defaultdict(list)
        by_rank = defaultdict(list)
        for f, r in self.ranks.items():
            by_rank[r].append(f)
        for f, r in self.ranks.items():
            covers[f] = [g for g in by_rank[r + 1] if f < g]
        return covers

    def is_graded(self) -> bool:
        """Every strict inclusion F < G factors through a face of rank rank(F) + 1."""
        covers = self._covers()
        for f, rf in self.ranks.items():
            for g, rg in self.ranks.items():
                if f < g and rg <= rf:
                    return False
                if f < g and rg > rf + 1 and not any(h < g for h in covers[f]):
                    return False
        return True

    def diamond_property_holds(self) -> bool:
        """Every interval of length two contains exactly four elements."""
        covers = self._covers()
        for f, rf in self.ranks.items():
            uppers: dict[Face, int] = defaultdict(int)
            for h in covers[f]:
                for g in covers[h]:
                    uppers[g] += 1
            if any(count != 2 for count in uppers.values()):
                return False
        return True

    def euler_sum(self) -> int:
        """Alternating sum of proper nonempty face counts."""
        return sum((-1) ** r * c for r, c in enumerate(self.f_vector()))

    def relabel(self, correspondence: Mapping[int, int]) -> "FaceLattice":
        ranks = {frozenset(correspondence[v] for v in f): r for f, r in self.ranks.items()}
        return FaceLattice(tuple(sorted(correspondence[v] for v in self.vertices)), ranks)

    def sublattice(self, face: Iterable[int]) -> "FaceLattice":
        """Lattice of the faces contained in ``face``, with the same vertex ids."""
        face = frozenset(face)
        if face not in self.ranks:
            raise KeyError(f"{sorted(face)} is not a face")
        return FaceLattice(tuple(sorted(face)), {f: r for f, r in self.ranks.items() if f <= face})

    def normalized(self) -> tuple["FaceLattice", dict[int, int]]:
        """Relabel vertices to 0..n-1 in sorted order; returns the lattice and the map used."""
        mapping = {v: i for i, v in enumerate(self.vertices)}
        return self.relabel(mapping), mapping


def _project_to_affine_hull(config: PointConfiguration) -> tuple[list[int], list[Vector]]:
    """Coordinate subset onto which the affine hull projects isomorphically."""
    base = config.points[0]
    diffs = MatrixQ.from_rows([tuple(a - b for a, b in zip(p, base)) for p in config.points])
    coords = pivot_columns(diffs)
    return coords, [tuple(p[c] for c in coords) for p in config.points]


def _beneath_beyond(points: Sequence[Vector]) -> list[tuple[Face, Hyperplane]]:
    """Simplicial boundary of conv(points) for a full-dimensional point list."""
    d = len(points[0])
    start = affine_basis(points)
    centroid = scale(Fraction(1, d + 1), tuple(sum(c) for c in zip(*(points[i] for i in start))))
    facets: dict[Face, Hyperplane] = {}
    for omit in start:
        simplex = frozenset(i for i in start if i != omit)
        facets[simplex] = hyperplane_through([points[i] for i in sorted(simplex)], centroid)
    for idx, p in enumerate(points):
        if idx in start:
            continue
        visible = [f for f, h in facets.items() if h.evaluate(p) > 0]
        if not visible:
            continue
        ridge_count: dict[Face, int] = defaultdict(int)
        for f in visible:
            for ridge in combinations(sorted(f), d - 1):
                ridge_count[frozenset(ridge)] += 1
        horizon = [r for r, c in ridge_count.items() if c == 1]
        for f in visible:
            del facets[f]
        for ridge in horizon:
            simplex = ridge | {idx}
            facets[simplex] = hyperplane_through([points[i] for i in sorted(simplex)], centroid)
        logger.debug("inserted point %d: %d visible, %d horizon ridges", idx, len(visible), len(horizon))
    return list(facets.items())


def convex_hull(config: PointConfiguration) -> HullResult:
    """
    Exact convex hull of a configuration.

    Lower-dimensional configurations are hulled inside their affine hull; the
    returned hyperplanes then have zero entries in the dropped coordinates.
    """
    k = affine_dim(config)
    if k == 0:
        raise DegenerateInputError("all points coincide; the hull has no facets")
    if k < config.dim:
        coords, projected = _project_to_affine_hull(config)
    else:
        coords, projected = list(range(config.dim)), list(config.points)

    simplices = _beneath_beyond(projected)
    planes: dict[tuple, Hyperplane] = {}
    for _, plane in simplices:
        planes.setdefault((plane.normal, plane.offset), plane)

    on_plane = {key: [i for i, p in enumerate(projected) if plane.contains(p)] for key, plane in planes.items()}
    vertices = []
    seen_points: set[Vector] = set()
    for i, p in enumerate(projected):
        normals = [planes[key].normal for key, members in on_plane.items() if i in members]
        if p in seen_points or not normals:
            continue
        seen_points.add(p)
        if rank(MatrixQ.from_rows(normals)) == k:
            vertices.append(i)

    facets = []
    for key, plane in planes.items():
        members = frozenset(i for i in on_plane[key] if i in vertices)
        normal = [Fraction(0)] * config.dim
        for c, value in zip(coords, plane.normal):
            normal[c] = value
        facets.append((members, Hyperplane(tuple(normal), plane.offset)))
    facets.sort(key=lambda item: sorted(item[0]))
    logger.debug("hull of %d points in dim %d: %d facets, %d vertices", len(config), k, len(facets), len(vertices))
    return HullResult(tuple(facets), tuple(vertices), k, config)


def face_lattice(hull: HullResult) -> FaceLattice:
    """Face lattice of a hull, over the configuration's point indices."""
    return FaceLattice.from_facets(hull.vertex_indices, (f for f, _ in hull.facets))


def hull_lattice(config: PointConfiguration) -> tuple[HullResult, FaceLattice]:
    hull = convex_hull(config)
    return hull, face_lattice(hull)


def lattice_isomorphic_under(l1: FaceLattice, l2: FaceLattice, correspondence: Mapping[int, int] | Sequence[int]) -> bool:
    """True iff relabelling l1 by the vertex correspondence yields l2's faces."""
    if not isinstance(correspondence, Mapping):
        correspondence = dict(zip(l1.vertices, correspondence))
    if l1.n_vertices != l2.n_vertices or len(correspondence) != l1.n_vertices:
        return False
    if set(correspondence.values()) != set(l2.vertices):
        return False
    return l1.relabel(correspondence).faces == l2.faces


def _incidence_graph(lattice: FaceLattice) -> nx.Graph:
    g = nx.Graph()
    for v in lattice.vertices:
        g.add_node(("v", v), side="vertex")
    for k, facet in enumerate(lattice.facets()):
        g.add_node(("f", k), side="facet")
        for v in facet:
            g.add_edge(("v", v), ("f", k))
    return g


def find_lattice_isomorphism(l1: FaceLattice, l2: FaceLattice) -> dict[int, int] | None:
    """Some vertex correspondence carrying l1 onto l2, found on the vertex-facet incidences."""
    if l1.n_vertices != l2.n_vertices or l1.f_vector() != l2.f_vector():
        return None
    matcher = GraphMatcher(
        _incidence_graph(l1), _incidence_graph(l2), node_match=lambda a, b: a["side"] == b["side"]
    )
    for mapping in matcher.isomorphisms_iter():
        correspondence = {a[1]: b[1] for a, b in mapping.items() if a[0] == "v"}
        if lattice_isomorphic_under(l1, l2, correspondence):
            return correspondence
    return None


def lattices_isomorphic(l1: FaceLattice, l2: FaceLattice) -> bool:
    return find_lattice_isomorphism(l1, l2) is not None


def is_realization(q: PointConfiguration, p_lattice: FaceLattice) -> bool:
    """True iff conv(q) has every point as a vertex and the lattice of p under p_i -> q_i."""
    if len(q) != p_lattice.n_vertices:
        return False
    try:
        if affine_dim(q) != q.dim:
            return False
        hull, lattice = hull_lattice(q)
    except DegenerateInputError:
        return False
    if len(hull.vertex_indices) != len(q):
        return False
    return lattice_isomorphic_under(lattice, p_lattice, dict(zip(range(len(q)), p_lattice.vertices)))


def edge_graph(lattice: FaceLattice) -> Graph:
    """Graph of the rank-one faces, on positions 0..n-1 of the lattice's vertices."""
    position = {v: i for i, v in enumerate(lattice.vertices)}
    return Graph.from_edges(lattice.n_vertices, ([position[v] for v in sorted(e)] for e in lattice.edges()))


def candidate_basis(config: PointConfiguration, basis: Sequence[int]) -> bool:
    """True iff the chosen d+1 points are affinely independent in this realization."""
    if len(basis) != config.dim + 1 or len(set(basis)) != len(basis):
        return False
    if any(not 0 <= i < len(config) for i in basis):
        return False
    return affine_dim(config.subset(basis)) == config.dim
