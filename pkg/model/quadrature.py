"""
Quadrature rules on the reference triangle and the reference edge
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Points and weights of a reference rule

    Element rules store barycentric triples (nq, 3) and weights summing to 1/2,
    the area of the reference triangle {r, s >= 0, r + s <= 1}. Edge rules store
    abscissae (nq,) in [0, 1] and weights summing to 1.
    """
    points: np.ndarray
    weights: np.ndarray
    degree: int
    kind: str = "element"

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def num_points(self) -> int:
        return len(self.weights)

    @property
    def reference_points(self) -> np.ndarray:
        """(r, s) coordinates of element points"""
        if self.kind != "element":
            raise ValueError("reference_points is defined for element rules only")
        return self.points[:, 1:]
