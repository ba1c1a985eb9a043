"""
Quadrature service: collapsed Gauss rules on triangles and Gauss rules on edges
"""
import logging
from functools import lru_cache

import numpy as np

from model.quadrature import QuadratureRule

logger = logging.getLogger(__name__)


class QuadratureService:
    """Builds and caches reference quadrature rules"""

    @staticmethod
    @lru_cache(maxsize=None)
    def element_rule(degree: int) -> QuadratureRule:
        """
        Collapsed (Duffy) Gauss-Legendre rule on the reference triangle

        r = a, s = b (1 - a) maps the unit square onto the triangle with
        Jacobian (1 - a), so n points per direction with 2n - 1 >= degree + 1
        integrate polynomials of total degree `degree` exactly.

        Args:
            degree: Polynomial degree to integrate exactly

        Returns:
            QuadratureRule with barycentric points
        """
        n = max(1, (degree + 3) // 2)
        g, w = np.polynomial.legendre.leggauss(n)
        t = 0.5 * (g + 1.0)
        wt = 0.5 * w
        a, b = np.meshgrid(t, t, indexing="ij")
        wa, wb = np.meshgrid(wt, wt, indexing="ij")
        r = a.ravel()
        s = (b * (1.0 - a)).ravel()
        weights = (wa * wb * (1.0 - a)).ravel()
        points = np.column_stack([1.0 - r - s, r, s])
        return QuadratureRule(points=points, weights=weights, degree=degree, kind="element")

    @staticmethod
    @lru_cache(maxsize=None)
    def edge_rule(degree: int) -> QuadratureRule:
        """Gauss-Legendre rule on [0, 1] exact to the given degree"""
        n = max(1, (degree + 2) // 2)
        g, w = np.polynomial.legendre.leggauss(n)
        return QuadratureRule(points=0.5 * (g + 1.0), weights=0.5 * w, degree=degree, kind="edge")

    @classmethod
    @lru_cache(maxsize=None)
    def composite_element_rule(cls, degree: int, level: int) -> QuadratureRule:
        """
        Element rule applied on 4**level congruent sub-triangles

        Used for data that is only piecewise smooth inside an element
        (indicator functions of disks and squares).
        """
        base = cls.element_rule(degree)
        if level == 0:
            return base
        triangles = [np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])]
        for _ in range(level):
            refined = []
            for tri in triangles:
                m01 = 0.5 * (tri[0] + tri[1])
                m12 = 0.5 * (tri[1] + tri[2])
                m20 = 0.5 * (tri[2] + tri[0])
                refined.extend([
                    np.array([tri[0], m01, m20]),
                    np.array([m01, tri[1], m12]),
                    np.array([m20, m12, tri[2]]),
                    np.array([m12, m20, m01]),
                ])
            triangles = refined
        ref = base.reference_points
        points, weights = [], []
        for tri in triangles:
            jac = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
            points.append(tri[0] + ref @ jac.T)
            weights.append(base.weights * abs(np.linalg.det(jac)))
        rs = np.vstack(points)
        bary = np.column_stack([1.0 - rs[:, 0] - rs[:, 1], rs])
        logger.debug(f"Composite element rule: degree {degree}, level {level}, {len(rs)} points")
        return QuadratureRule(points=bary, weights=np.concatenate(weights), degree=degree, kind="element")
