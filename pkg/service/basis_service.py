"""
Basis service: orthonormalised monomial bases per polynomial degree
"""
import logging
from functools import lru_cache
from math import factorial

import numpy as np

from model.basis import OrthonormalBasis

logger = logging.getLogger(__name__)


class BasisService:
    """Builds the orthonormal modal basis used on every element"""

    MAX_DEGREE = 4

    @staticmethod
    def dofs_per_element(degree: int) -> int:
        return (degree + 1) * (degree + 2) // 2

    @staticmethod
    def monomial_moment(a: int, b: int) -> float:
        """Exact integral of r^a s^b over the reference triangle"""
        return factorial(a) * factorial(b) / factorial(a + b + 2)

    @classmethod
    @lru_cache(maxsize=None)
    def get(cls, degree: int) -> OrthonormalBasis:
        """
        Orthonormalise the monomials r^a s^b, a + b <= degree

        The Gram matrix is assembled from exact moments and factored with
        Cholesky, G = L L^T; phi = L^{-1} m is then orthonormal.

        Args:
            degree: Polynomial degree q (1..4)

        Returns:
            OrthonormalBasis
        """
        if degree < 0 or degree > cls.MAX_DEGREE:
            raise ValueError(f"Polynomial degree must be in [0, {cls.MAX_DEGREE}], got {degree}")
        exponents = np.array(
            [(total - j, j) for total in range(degree + 1) for j in range(total + 1)],
            dtype=int,
        )
        gram = np.array([
            [cls.monomial_moment(ea[0] + eb[0], ea[1] + eb[1]) for eb in exponents]
            for ea in exponents
        ])
        lower = np.linalg.cholesky(gram)
        coefficients = np.linalg.inv(lower)
        logger.debug(f"Built orthonormal basis of degree {degree} with {len(exponents)} functions")
        return OrthonormalBasis(degree=degree, exponents=exponents, coefficients=coefficients)
