"""
Orthonormal modal basis on the reference triangle
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """P^q basis orthonormal in L2 of the reference triangle

    phi_i = sum_k coefficients[i, k] * r**exponents[k, 0] * s**exponents[k, 1]
    """
    degree: int
    exponents: np.ndarray
    coefficients: np.ndarray

    @property
    def size(self) -> int:
        return len(self.exponents)

    def _monomials(self, ref: np.ndarray, dr: int = 0, ds: int = 0) -> np.ndarray:
        r = ref[..., 0][..., None]
        s = ref[..., 1][..., None]
        a = self.exponents[:, 0]
        b = self.exponents[:, 1]
        fa = np.ones_like(a, dtype=float)
        fb = np.ones_like(b, dtype=float)
        for i in range(dr):
            fa = fa * (a - i)
        for i in range(ds):
            fb = fb * (b - i)
        pa = np.maximum(a - dr, 0)
        pb = np.maximum(b - ds, 0)
        return fa * fb * r ** pa * s ** pb

    def values(self, ref: np.ndarray) -> np.ndarray:
        """Basis values at reference points (..., 2) -> (..., nb)"""
        return self._monomials(ref) @ self.coefficients.T

    def gradients(self, ref: np.ndarray) -> np.ndarray:
        """Reference gradients (..., 2) -> (..., nb, 2)"""
        gr = self._monomials(ref, dr=1) @ self.coefficients.T
        gs = self._monomials(ref, ds=1) @ self.coefficients.T
        return np.stack([gr, gs], axis=-1)

    def hessians(self, ref: np.ndarray) -> np.ndarray:
        """Reference second derivatives (..., 2) -> (..., nb, 2, 2)"""
        hrr = self._monomials(ref, dr=2) @ self.coefficients.T
        hrs = self._monomials(ref, dr=1, ds=1) @ self.coefficients.T
        hss = self._monomials(ref, ds=2) @ self.coefficients.T
        row0 = np.stack([hrr, hrs], axis=-1)
        row1 = np.stack([hrs, hss], axis=-1)
        return np.stack([row0, row1], axis=-2)
