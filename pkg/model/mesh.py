"""
Triangular mesh with bisection genealogy
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np

from utils.errors import InvalidArgumentError

DOMAIN_AREA = 4.0


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Element:
    """Record view of one triangle of the genealogy"""
    element_id: int
    vertex_ids: Tuple[int, int, int]
    refinement_edge: int
    parent_id: Optional[int]
    generation: int
    children_ids: Optional[Tuple[int, int]]

    @property
    def newest_vertex(self) -> int:
        return self.vertex_ids[self.refinement_edge]


@dataclass(frozen=True)
class Edge:
    """Record view of one active edge"""
    vertex_ids: Tuple[int, int]
    kind: str
    adjacent_elements: Tuple[int, ...]
    length: float
    normal: Tuple[float, float]


@dataclass(frozen=True, eq=False)
class EdgeTable:
    """Active edges of a mesh

    Edge e is adjacent to active positions elements[e, 0] < elements[e, 1]
    (elements[e, 1] = -1 on the boundary). normals[e] is the unit normal
    exterior to the first element and vertices[e] runs counterclockwise
    with respect to it. element_edges[E, i] is the edge opposite local vertex i.
    """
    vertices: np.ndarray
    elements: np.ndarray
    local_index: np.ndarray
    normals: np.ndarray
    lengths: np.ndarray
    element_edges: np.ndarray

    @property
    def num_edges(self) -> int:
        return len(self.lengths)

    @property
    def interior(self) -> np.ndarray:
        return self.elements[:, 1] >= 0

    @property
    def boundary(self) -> np.ndarray:
        return self.elements[:, 1] < 0


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation of [-1, 1]^2 holding its bisection genealogy

    Element records are never removed: refinement appends children and
    coarsening retires them (alive = False), so ids stay stable across a
    mesh sequence. Only alive leaves are active. retired maps a coarsened
    parent to its former children; bisecting that parent again revives them,
    so the record count is bounded by the finest mesh ever reached.
    """
    vertices: np.ndarray
    triangles: np.ndarray
    refinement_edge: np.ndarray
    parent: np.ndarray
    generation: np.ndarray
    children: np.ndarray
    alive: np.ndarray
    lineage: str
    generation_counter: int = 0
    midpoints: Dict[Tuple[int, int], int] = field(default_factory=dict)
    retired: Dict[int, Tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        for array in (self.vertices, self.triangles, self.refinement_edge, self.parent,
                      self.generation, self.children, self.alive):
            _freeze(array)

    @property
    def num_records(self) -> int:
        return len(self.triangles)

    @cached_property
    def active_ids(self) -> np.ndarray:
        return _freeze(np.flatnonzero(self.alive & (self.children[:, 0] < 0)))

    @property
    def num_active(self) -> int:
        return len(self.active_ids)

    @cached_property
    def active_position(self) -> np.ndarray:
        """Map element id -> position among active elements (-1 if inactive)"""
        position = np.full(self.num_records, -1, dtype=np.int64)
        position[self.active_ids] = np.arange(self.num_active)
        return _freeze(position)

    def is_active(self, element_id: int) -> bool:
        return 0 <= element_id < self.num_records and self.active_position[element_id] >= 0

    def element(self, element_id: int) -> Element:
        if not 0 <= element_id < self.num_records:
            raise InvalidArgumentError(f"Unknown element id {element_id}")
        parent = int(self.parent[element_id])
        children = self.children[element_id]
        return Element(
            element_id=int(element_id),
            vertex_ids=tuple(int(v) for v in self.triangles[element_id]),
            refinement_edge=int(self.refinement_edge[element_id]),
            parent_id=parent if parent >= 0 else None,
            generation=int(self.generation[element_id]),
            children_ids=tuple(int(c) for c in children) if children[0] >= 0 else None,
        )

    def coordinates(self, element_ids: np.ndarray) -> np.ndarray:
        """Vertex coordinates (n, 3, 2) of any element records"""
        return self.vertices[self.triangles[np.asarray(element_ids)]]

    @cached_property
    def active_coordinates(self) -> np.ndarray:
        return _freeze(self.coordinates(self.active_ids))

    @cached_property
    def signed_areas(self) -> np.ndarray:
        c = self.active_coordinates
        d1 = c[:, 1] - c[:, 0]
        d2 = c[:, 2] - c[:, 0]
        return _freeze(0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))

    @property
    def areas(self) -> np.ndarray:
        return np.abs(self.signed_areas)

    @cached_property
    def side_lengths(self) -> np.ndarray:
        """(n_active, 3) lengths, column i opposite local vertex i"""
        c = self.active_coordinates
        lengths = np.stack([
            np.linalg.norm(c[:, (i + 2) % 3] - c[:, (i + 1) % 3], axis=1) for i in range(3)
        ], axis=1)
        return _freeze(lengths)

    @property
    def diameters(self) -> np.ndarray:
        return self.side_lengths.max(axis=1)

    def min_angle(self) -> float:
        """Smallest interior angle (radians) over active elements"""
        c = self.active_coordinates
        angles = []
        for i in range(3):
            u = c[:, (i + 1) % 3] - c[:, i]
            v = c[:, (i + 2) % 3] - c[:, i]
            cos = np.einsum("nd,nd->n", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            angles.append(np.arccos(np.clip(cos, -1.0, 1.0)))
        return float(np.min(angles))

    def shape_regularity(self) -> float:
        """max_E h_E^2 / |E|"""
        return float(np.max(self.diameters ** 2 / self.areas))

    @cached_property
    def edges(self) -> EdgeTable:
        tri = self.triangles[self.active_ids]
        n = len(tri)
        local = np.tile(np.arange(3), n)
        owner = np.repeat(np.arange(n), 3)
        a = tri[owner, (local + 1) % 3]
        b = tri[owner, (local + 2) % 3]
        keys = np.column_stack([np.minimum(a, b), np.maximum(a, b)])
        _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        if np.any(counts > 2):
            raise InvalidArgumentError("Edge shared by more than two active elements")
        order = np.argsort(inverse, kind="stable")
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        first = order[starts]
        second = np.where(counts == 2, order[np.minimum(starts + 1, len(order) - 1)], -1)

        elements = np.column_stack([owner[first], np.where(second >= 0, owner[second], -1)])
        local_index = np.column_stack([local[first], np.where(second >= 0, local[second], -1)])
        start = self.vertices[a[first]]
        end = self.vertices[b[first]]
        tangent = end - start
        lengths = np.linalg.norm(tangent, axis=1)
        normals = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / lengths[:, None]

        element_edges = np.empty((n, 3), dtype=np.int64)
        element_edges[owner, local] = inverse
        return EdgeTable(
            vertices=_freeze(np.column_stack([a[first], b[first]])),
            elements=_freeze(elements),
            local_index=_freeze(local_index),
            normals=_freeze(normals),
            lengths=_freeze(lengths),
            element_edges=_freeze(element_edges),
        )

    def edge(self, index: int) -> Edge:
        table = self.edges
        pair = table.elements[index]
        adjacent = tuple(int(self.active_ids[p]) for p in pair if p >= 0)
        return Edge(
            vertex_ids=(int(table.vertices[index, 0]), int(table.vertices[index, 1])),
            kind="interior" if pair[1] >= 0 else "boundary",
            adjacent_elements=adjacent,
            length=float(table.lengths[index]),
            normal=(float(table.normals[index, 0]), float(table.normals[index, 1])),
        )

    def is_conforming(self, tol: float = 1e-12) -> bool:
        """No hanging nodes: every single-sided edge lies on the domain boundary"""
        table = self.edges
        ends = self.vertices[table.vertices[table.boundary]]
        on_side = np.zeros(len(ends), dtype=bool)
        for axis in (0, 1):
            for value in (-1.0, 1.0):
                on_side |= np.all(np.abs(ends[:, :, axis] - value) < tol, axis=1)
        return bool(np.all(on_side))
