"""
Marking and adaptation records
"""
from dataclasses import dataclass
from typing import FrozenSet, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from model.dg_space import DGFunction, DGSpace
from model.mesh import Mesh


class MarkSets(BaseModel):
    """Elements marked for refinement (M_R) and coarsening (M_C)"""
    model_config = ConfigDict(frozen=True)

    refine_set: FrozenSet[int] = frozenset()
    coarsen_set: FrozenSet[int] = frozenset()

    @model_validator(mode="after")
    def _check_disjoint(self):
        overlap = self.refine_set & self.coarsen_set
        if overlap:
            raise ValueError(f"Elements marked for both refinement and coarsening: {sorted(overlap)[:10]}")
        return self

    @property
    def is_empty(self) -> bool:
        return not self.refine_set and not self.coarsen_set


@dataclass(frozen=True)
class AdaptDriver:
    """How a run adapts: initial mesh and whether/how often to adapt per step"""
    initial_mesh: Mesh
    enabled: bool = True
    max_cycles: int = 1
    projection_subdivisions: int = 2


@dataclass(frozen=True, eq=False)
class AdaptResult:
    """Outcome of one mark/refine/coarsen/transfer pass"""
    mesh: Mesh
    space: DGSpace
    u_prev: DGFunction
    marks: MarkSets
    elements_before: int
    elements_after: int
    changed: bool
    step: Optional[int] = None
