"""
Convergence study records
"""
from typing import ClassVar, List

from pydantic import BaseModel, Field


class ConvergenceLevel(BaseModel):
    """Errors and indicator on one uniform mesh"""
    n: int = Field(..., ge=1)
    h: float = Field(..., gt=0)
    dofs: int = Field(..., ge=1)
    l2_error: float = Field(..., ge=0)
    dg_error: float = Field(..., ge=0)
    eta: float = Field(..., ge=0)
    theta: float = Field(0.0, ge=0)

    @property
    def effectivity(self) -> float:
        return self.eta / self.dg_error if self.dg_error > 0 else float("inf")


class ConvergenceReport(BaseModel):
    """Levels of a study with observed orders"""
    problem: str
    levels: List[ConvergenceLevel]
    l2_rates: List[float] = Field(default_factory=list)
    dg_rates: List[float] = Field(default_factory=list)
    l2_order: float = 0.0
    dg_order: float = 0.0

    CSV_COLUMNS: ClassVar[List[str]] = ["n", "h", "dofs", "l2_error", "dg_error", "eta", "effectivity"]

    @property
    def effectivity_spread(self) -> float:
        values = [level.effectivity for level in self.levels]
        return max(values) / min(values)

    def csv_rows(self) -> List[List[str]]:
        return [
            [str(level.n), f"{level.h:.6g}", str(level.dofs), f"{level.l2_error:.6e}",
             f"{level.dg_error:.6e}", f"{level.eta:.6e}", f"{level.effectivity:.6e}"]
            for level in self.levels
        ]
