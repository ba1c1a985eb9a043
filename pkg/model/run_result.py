"""
Results of nonlinear solves and full runs
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from model.dg_space import DGFunction
from model.indicator import IndicatorTable
from model.step_record import StepRecord


@dataclass(frozen=True, eq=False)
class NewtonResult:
    """Converged Newton iterate with its residual-norm history"""
    solution: DGFunction
    iterations: int
    history: List[float]
    final_residual: float
    target: float = 0.0


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Solution kept at a snapshot time, with the indicator table it was accepted with"""
    k: int
    t: float
    solution: DGFunction
    indicators: Optional[IndicatorTable] = None


@dataclass(frozen=True, eq=False)
class RunResult:
    """Everything a run produces: one record per step, the final state, snapshots and adapt events"""
    records: List[StepRecord]
    solution: DGFunction
    snapshots: List[Snapshot] = field(default_factory=list)
    indicator_events: List[Tuple[int, IndicatorTable]] = field(default_factory=list)
