"""
Assembled SIPG operator of one time step
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import sparse

from model.dg_space import DGSpace


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """a_h = D_h + O_h + K_h + J_h on a space, with its term breakdown

    terms holds the four sparse matrices keyed "D", "O", "K", "J"; the
    mass matrix is kept for the time derivative and the right-hand side.
    """
    space: DGSpace
    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    terms: Dict[str, sparse.csr_matrix] = field(default_factory=dict)
    rhs: Optional[np.ndarray] = None
    kappa0: float = 0.0

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    def bilinear(self, u: np.ndarray, v: np.ndarray, term: Optional[str] = None) -> float:
        """a_h(u, v), or one of its terms; u and v are coefficient vectors"""
        matrix = self.stiffness if term is None else self.terms[term]
        return float(v @ (matrix @ u))
