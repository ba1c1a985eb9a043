"""
A posteriori error indicators
"""
from dataclasses import dataclass
from typing import ClassVar, Iterator, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class ElementIndicator(BaseModel):
    """Indicator components of one element"""
    model_config = ConfigDict(frozen=True)

    element_id: int
    eta_R: float = Field(..., ge=0)
    eta_0: float = Field(..., ge=0)
    theta: float = Field(..., ge=0)

    @property
    def eta_sq(self) -> float:
        return self.eta_R ** 2 + self.eta_0 ** 2


@dataclass(frozen=True, eq=False)
class StabilityConstants:
    """kappa0 and the weights rho_E (per active element) and rho_e (per edge)"""
    kappa0: float
    rho_element: np.ndarray
    rho_edge: np.ndarray
    c_star: float


@dataclass(frozen=True, eq=False)
class IndicatorTable:
    """Indicators of all active elements, aligned with mesh.active_ids"""
    element_ids: np.ndarray
    generations: np.ndarray
    eta_R: np.ndarray
    eta_0: np.ndarray
    theta: np.ndarray
    kappa0: float

    # Column order of indicators_{k}.csv
    CSV_COLUMNS: ClassVar[List[str]] = ["element_id", "eta_R", "eta_0", "theta", "eta_sq"]

    def __post_init__(self):
        for array in (self.element_ids, self.generations, self.eta_R, self.eta_0, self.theta):
            array.setflags(write=False)

    def __len__(self) -> int:
        return len(self.element_ids)

    def __iter__(self) -> Iterator[ElementIndicator]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, position: int) -> ElementIndicator:
        return ElementIndicator(
            element_id=int(self.element_ids[position]),
            eta_R=float(self.eta_R[position]),
            eta_0=float(self.eta_0[position]),
            theta=float(self.theta[position]),
        )

    @property
    def eta_sq(self) -> np.ndarray:
        return self.eta_R ** 2 + self.eta_0 ** 2

    @property
    def max_eta(self) -> float:
        return float(np.sqrt(np.max(self.eta_sq))) if len(self) else 0.0

    @property
    def global_eta(self) -> float:
        return float(np.sqrt(np.sum(self.eta_sq)))

    @property
    def global_theta(self) -> float:
        return float(np.sqrt(np.sum(self.theta ** 2)))

    def csv_rows(self) -> List[List[str]]:
        eta_sq = self.eta_sq
        return [
            [str(int(e)), f"{r:.6e}", f"{z:.6e}", f"{t:.6e}", f"{s:.6e}"]
            for e, r, z, t, s in zip(self.element_ids, self.eta_R, self.eta_0, self.theta, eta_sq)
        ]
