"""
Per-time-step diagnostics of a run
"""
from typing import ClassVar, List

from pydantic import BaseModel, Field


class StepRecord(BaseModel):
    """Diagnostics emitted once per time step"""
    k: int = Field(..., ge=1)
    t: float
    newton_iters: int = Field(..., ge=0)
    final_residual: float = Field(..., ge=0)
    residual_target: float = Field(0.0, ge=0)
    dofs: int = Field(..., ge=1)
    elements: int = Field(..., ge=1)
    max_element_indicator: float = Field(..., ge=0)
    global_indicator: float = Field(0.0, ge=0)
    data_oscillation: float = Field(0.0, ge=0)
    adapt_cycles: int = Field(0, ge=0)
    solution_min: float = 0.0
    solution_max: float = 0.0

    # Fixed column order of timeseries.csv
    CSV_COLUMNS: ClassVar[List[str]] = ["k", "t", "dofs", "newton_iters", "residual", "max_eta", "adapt_cycles"]

    def csv_row(self) -> List[str]:
        return [
            str(self.k),
            f"{self.t:.12g}",
            str(self.dofs),
            str(self.newton_iters),
            f"{self.final_residual:.6e}",
            f"{self.max_element_indicator:.6e}",
            str(self.adapt_cycles),
        ]
