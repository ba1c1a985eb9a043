"""
Experiment configuration: problem data plus how to run and where to write
"""
from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

import config
from model.problem_spec import NewtonConfig, ProblemSpec


class ExperimentConfig(BaseModel):
    """One named run of the solver"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    problem: str
    mode: Literal["adaptive", "uniform"] = "adaptive"
    scale: Literal["desk", "paper"] = "desk"
    initial_n: int = Field(4, ge=1)
    uniform_n: int = Field(16, ge=1)
    max_adapt_cycles: int = Field(1, ge=0)
    projection_subdivisions: int = Field(2, ge=0, le=5)
    snapshot_times: List[float] = Field(default_factory=list)
    output_dir: str = config.ADVAC_OUTPUT_DIR
    spec: ProblemSpec
    newton: NewtonConfig = NewtonConfig()

    @model_validator(mode="after")
    def _check_snapshots(self):
        final_time = self.spec.final_time
        for t in self.snapshot_times:
            if t < 0.0 or t > final_time * (1.0 + 1e-12):
                raise ValueError(f"Snapshot time {t} outside [0, {final_time}]")
        return self

    @property
    def adaptive(self) -> bool:
        return self.mode == "adaptive"

    @property
    def run_name(self) -> str:
        return f"{self.problem}_{self.mode}"
