"""
Mesh service: uniform initial meshes, newest vertex bisection and sibling coarsening
"""
import logging
import uuid
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Set, Tuple

import numpy as np

from model.fields import VelocityField
from model.mesh import Mesh
from service.quadrature_service import QuadratureService
from utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

EdgeKey = Tuple[int, int]


def _key(a: int, b: int) -> EdgeKey:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, eq=False)
class EdgeClassification:
    """Inflow/outflow tags of element boundary quadrature points

    Arrays are indexed (active element, local edge, quadrature point);
    inflow = V.n_E < 0, outflow is the complement.
    """
    points: np.ndarray
    normal_velocity: np.ndarray
    inflow: np.ndarray

    @property
    def outflow(self) -> np.ndarray:
        return ~self.inflow


class _Builder:
    """Mutable working copy of a mesh genealogy"""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.vertices: List[np.ndarray] = list(mesh.vertices)
        self.triangles: List[Tuple[int, int, int]] = [tuple(t) for t in mesh.triangles.tolist()]
        self.refinement_edge: List[int] = mesh.refinement_edge.tolist()
        self.parent: List[int] = mesh.parent.tolist()
        self.generation: List[int] = mesh.generation.tolist()
        self.children: List[List[int]] = mesh.children.tolist()
        self.alive: List[bool] = mesh.alive.tolist()
        self.midpoints: Dict[EdgeKey, int] = dict(mesh.midpoints)
        self.retired: Dict[int, Tuple[int, int]] = dict(mesh.retired)

    def refinement_key(self, element_id: int) -> EdgeKey:
        tri = self.triangles[element_id]
        r = self.refinement_edge[element_id]
        return _key(tri[(r + 1) % 3], tri[(r + 2) % 3])

    def midpoint(self, a: int, b: int) -> int:
        key = _key(a, b)
        if key not in self.midpoints:
            self.vertices.append(0.5 * (np.asarray(self.vertices[a]) + np.asarray(self.vertices[b])))
            self.midpoints[key] = len(self.vertices) - 1
        return self.midpoints[key]

    def bisect(self, element_id: int) -> Tuple[int, int]:
        if element_id in self.retired:
            first, second = self.retired.pop(element_id)
            self.alive[first] = self.alive[second] = True
            self.children[element_id] = [first, second]
            return first, second
        tri = self.triangles[element_id]
        r = self.refinement_edge[element_id]
        p, a, b = tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]
        m = self.midpoint(a, b)
        first = len(self.triangles)
        # (p, a, m) and (p, m, b) keep counterclockwise orientation; m is newest
        self.triangles.extend([(p, a, m), (p, m, b)])
        self.refinement_edge.extend([2, 1])
        self.parent.extend([element_id, element_id])
        self.generation.extend([self.generation[element_id] + 1] * 2)
        self.children.extend([[-1, -1], [-1, -1]])
        self.alive.extend([True, True])
        self.children[element_id] = [first, first + 1]
        return first, first + 1

    def build(self) -> Mesh:
        return Mesh(
            vertices=np.array(self.vertices, dtype=float).reshape(-1, 2),
            triangles=np.array(self.triangles, dtype=np.int64).reshape(-1, 3),
            refinement_edge=np.array(self.refinement_edge, dtype=np.int64),
            parent=np.array(self.parent, dtype=np.int64),
            generation=np.array(self.generation, dtype=np.int64),
            children=np.array(self.children, dtype=np.int64).reshape(-1, 2),
            alive=np.array(self.alive, dtype=bool),
            lineage=self.mesh.lineage,
            generation_counter=self.mesh.generation_counter + 1,
            midpoints=self.midpoints,
            retired=self.retired,
        )


class MeshService:
    """Operations producing new meshes from old ones"""

    @staticmethod
    def uniform_initial_mesh(n: int) -> Mesh:
        """
        Uniform mesh of [-1, 1]^2 with (2n)^2 squares split along one diagonal

        Every square is cut by the diagonal from its lower-left to its
        upper-right corner; that hypotenuse is the refinement edge of both
        triangles, so the two halves of each square are a compatible pair.

        Args:
            n: Subdivisions per unit length (mesh size 1/n)

        Returns:
            Mesh with all elements of generation 0
        """
        if n < 1:
            raise InvalidArgumentError(f"Number of subdivisions must be at least 1, got {n}")
        m = 2 * n
        coords = np.linspace(-1.0, 1.0, m + 1)
        xx, yy = np.meshgrid(coords, coords, indexing="xy")
        vertices = np.column_stack([xx.ravel(), yy.ravel()])

        j, i = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        i, j = i.ravel(), j.ravel()
        p00 = j * (m + 1) + i
        p10 = p00 + 1
        p01 = p00 + (m + 1)
        p11 = p01 + 1
        lower = np.column_stack([p00, p10, p11])
        upper = np.column_stack([p00, p11, p01])
        triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)
        refinement_edge = np.tile([1, 2], m * m)

        count = len(triangles)
        mesh = Mesh(
            vertices=vertices,
            triangles=triangles.astype(np.int64),
            refinement_edge=refinement_edge.astype(np.int64),
            parent=np.full(count, -1, dtype=np.int64),
            generation=np.zeros(count, dtype=np.int64),
            children=np.full((count, 2), -1, dtype=np.int64),
            alive=np.ones(count, dtype=bool),
            lineage=str(uuid.uuid4()),
        )
        logger.debug(f"Uniform initial mesh n={n}: {count} triangles, {len(vertices)} vertices")
        return mesh

    @staticmethod
    def refine(mesh: Mesh, marked: Iterable[int]) -> Mesh:
        """
        Bisect marked elements by newest vertex bisection with conforming closure

        Refinement edges of marked elements are marked; every active element
        with a marked edge gets its own refinement edge marked until the set is
        closed. Elements are then bisected until no active element has a
        marked refinement edge, which removes every hanging node.

        Args:
            mesh: Source mesh (left untouched)
            marked: Active element ids to refine

        Returns:
            New mesh; the input mesh when nothing is marked
        """
        marked = sorted({int(e) for e in marked})
        if not marked:
            return mesh
        for element_id in marked:
            if not mesh.is_active(element_id):
                raise InvalidArgumentError(f"Element {element_id} is not active")

        builder = _Builder(mesh)
        active = [int(e) for e in mesh.active_ids]
        edge_elements: Dict[EdgeKey, List[int]] = defaultdict(list)
        for element_id in active:
            tri = builder.triangles[element_id]
            for i in range(3):
                edge_elements[_key(tri[(i + 1) % 3], tri[(i + 2) % 3])].append(element_id)

        marked_edges: Set[EdgeKey] = {builder.refinement_key(e) for e in marked}
        stack = sorted(marked_edges)
        while stack:
            key = stack.pop()
            for element_id in edge_elements[key]:
                ref = builder.refinement_key(element_id)
                if ref not in marked_edges:
                    marked_edges.add(ref)
                    stack.append(ref)

        queue = [e for e in active if builder.refinement_key(e) in marked_edges]
        bisections = 0
        while queue:
            next_queue = []
            for element_id in queue:
                for child in builder.bisect(element_id):
                    if builder.refinement_key(child) in marked_edges:
                        next_queue.append(child)
                bisections += 1
            queue = next_queue

        refined = builder.build()
        logger.debug(
            f"Refined {len(marked)} marked elements with {bisections} bisections: "
            f"{mesh.num_active} -> {refined.num_active} active elements"
        )
        return refined

    @staticmethod
    def coarsen(mesh: Mesh, marked: Iterable[int]) -> Mesh:
        """
        Merge marked sibling pairs back into their parents

        A bisection vertex m is removed when every active element touching it
        is a marked child whose parent was bisected at m: two children on the
        boundary, four (two sibling pairs) inside the domain. Other marks are
        skipped. Generation-0 elements are never coarsened.

        Args:
            mesh: Source mesh (left untouched)
            marked: Active element ids proposed for coarsening

        Returns:
            New mesh; the input mesh when no pair is eligible
        """
        marked_set = {
            int(e) for e in marked
            if mesh.is_active(int(e)) and mesh.generation[int(e)] > 0
        }
        if not marked_set:
            return mesh

        parents_at: Dict[int, Set[int]] = defaultdict(set)
        for element_id in sorted(marked_set):
            parent = int(mesh.parent[element_id])
            first, second = (int(c) for c in mesh.children[parent])
            if first in marked_set and second in marked_set:
                newest = int(mesh.triangles[element_id][mesh.refinement_edge[element_id]])
                parents_at[newest].add(parent)
        if not parents_at:
            return mesh

        touching: Dict[int, Set[int]] = defaultdict(set)
        for element_id in mesh.active_ids:
            for v in mesh.triangles[element_id]:
                if int(v) in parents_at:
                    touching[int(v)].add(int(element_id))

        merge: List[int] = []
        for vertex in sorted(parents_at):
            parents = parents_at[vertex]
            expected = {int(c) for p in parents for c in mesh.children[p]}
            if len(parents) in (1, 2) and touching[vertex] == expected:
                merge.extend(sorted(parents))
        if not merge:
            return mesh

        builder = _Builder(mesh)
        for parent in merge:
            first, second = builder.children[parent]
            builder.alive[first] = builder.alive[second] = False
            builder.retired[parent] = (first, second)
            builder.children[parent] = [-1, -1]
        coarsened = builder.build()
        logger.debug(
            f"Coarsened {len(merge)} sibling pairs: {mesh.num_active} -> {coarsened.num_active} active elements"
        )
        return coarsened

    @staticmethod
    def outflow_mask(normal_velocity: np.ndarray) -> np.ndarray:
        """Outflow where V.n >= 0 (complement of the inflow set)"""
        return normal_velocity >= 0.0

    @classmethod
    def edge_classification(cls, mesh: Mesh, velocity: VelocityField, degree: int = 4) -> EdgeClassification:
        """
        Tag element boundary quadrature points as inflow or outflow

        Args:
            mesh: Mesh whose active elements are classified
            velocity: Velocity field V
            degree: Exactness degree of the edge rule

        Returns:
            EdgeClassification with arrays shaped (n_active, 3, n_points)
        """
        rule = QuadratureService.edge_rule(degree)
        t = rule.points
        c = mesh.active_coordinates
        points = np.empty((mesh.num_active, 3, len(t), 2))
        normals = np.empty((mesh.num_active, 3, 2))
        for i in range(3):
            start = c[:, (i + 1) % 3]
            end = c[:, (i + 2) % 3]
            points[:, i] = start[:, None, :] + t[None, :, None] * (end - start)[:, None, :]
            tangent = end - start
            length = np.linalg.norm(tangent, axis=1)
            normals[:, i] = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / length[:, None]
        v = velocity(points[..., 0], points[..., 1])
        vn = np.einsum("eiqd,eid->eiq", v, normals)
        return EdgeClassification(points=points, normal_velocity=vn, inflow=~cls.outflow_mask(vn))
