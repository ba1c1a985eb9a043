"""
Verification service: quick invariant checks behind `advac verify`
"""
import logging
from typing import Callable, List, Tuple

import numpy as np

from model.dg_space import DGFunction
from model.fields import ManufacturedSolution, ScalarField, VelocityField
from model.mesh import DOMAIN_AREA, Mesh
from model.problem_spec import ProblemSpec
from model.verification import CheckResult
from service.estimator_service import EstimatorService
from service.forms_service import FormsService
from service.mesh_service import MeshService
from service.space_service import SpaceService
from service.stepper_service import StepperService
from utils.errors import AdvacError

logger = logging.getLogger(__name__)


class VerificationService:
    """Self-checks of mesh, forms, solver and estimator on small problems"""

    @staticmethod
    def random_adapt_sequence(mesh: Mesh, operations: int, seed: int) -> List[Mesh]:
        """Apply random refine/coarsen operations, returning every intermediate mesh"""
        rng = np.random.default_rng(seed)
        meshes = [mesh]
        for _ in range(operations):
            active = mesh.active_ids
            count = max(1, len(active) // 10)
            chosen = rng.choice(active, size=min(count, len(active)), replace=False)
            if rng.random() < 0.5 or mesh.num_active < 16:
                mesh = MeshService.refine(mesh, chosen)
            else:
                mesh = MeshService.coarsen(mesh, active[mesh.generation[active] > 0])
            meshes.append(mesh)
        return meshes

    @classmethod
    def check_mesh_invariants(cls, seed: int = 0, operations: int = 40) -> CheckResult:
        mesh0 = MeshService.uniform_initial_mesh(1)
        angle0 = mesh0.min_angle()
        regularity0 = mesh0.shape_regularity()
        for mesh in cls.random_adapt_sequence(mesh0, operations, seed):
            area = float(np.sum(mesh.areas))
            if not mesh.is_conforming():
                return CheckResult(name="mesh_invariants", passed=False, detail="hanging node found")
            if abs(area - DOMAIN_AREA) > 1e-12:
                return CheckResult(name="mesh_invariants", passed=False, detail=f"total area {area!r}")
            if mesh.min_angle() < 0.5 * angle0 - 1e-12:
                return CheckResult(name="mesh_invariants", passed=False, detail="minimum angle degraded")
            if mesh.shape_regularity() > regularity0 * (1.0 + 1e-9):
                return CheckResult(name="mesh_invariants", passed=False, detail="shape regularity degraded")
        return CheckResult(name="mesh_invariants", passed=True, detail=f"{operations} operations, seed {seed}")

    @staticmethod
    def jacobian_error(seed: int = 0, step: float = 1e-7) -> float:
        """Relative Frobenius error of the analytic Jacobian against central differences"""
        spec = ProblemSpec(
            epsilon=0.1,
            velocity=VelocityField(kind="sine", v0=1.0),
            tau=0.1,
            final_time=0.1,
        )
        space = SpaceService.create_space(MeshService.uniform_initial_mesh(1), spec.degree)
        rng = np.random.default_rng(seed)
        u = DGFunction(space=space, coefficients=rng.uniform(-0.5, 1.5, space.total_dofs))
        u_prev = DGFunction(space=space, coefficients=rng.uniform(0.0, 1.0, space.total_dofs))
        system = FormsService.assemble(space, spec, u_prev)
        _, jacobian = FormsService.assemble_residual_and_jacobian(space, spec, u, u_prev, system)
        numeric = np.empty((space.total_dofs, space.total_dofs))
        for j in range(space.total_dofs):
            shift = np.zeros(space.total_dofs)
            shift[j] = step
            plus = FormsService.residual(system, spec, DGFunction(space=space, coefficients=u.coefficients + shift))
            minus = FormsService.residual(system, spec, DGFunction(space=space, coefficients=u.coefficients - shift))
            numeric[:, j] = (plus - minus) / (2.0 * step)
        analytic = jacobian.toarray()
        return float(np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic))

    @classmethod
    def check_jacobian(cls) -> CheckResult:
        error = cls.jacobian_error()
        return CheckResult(name="jacobian", passed=error < 1e-6, detail=f"relative error {error:.3e}")

    @staticmethod
    def check_coercivity() -> CheckResult:
        mesh = MeshService.uniform_initial_mesh(2)
        values = []
        for velocity in (VelocityField(kind="expanding", v0=10.0), VelocityField(kind="sheer", v0=100.0)):
            spec = ProblemSpec(epsilon=0.01, velocity=velocity, tau=0.001, final_time=0.001)
            system = FormsService.assemble_bilinear(SpaceService.create_space(mesh, spec.degree), spec)
            values.append(FormsService.check_coercivity(system))
        return CheckResult(name="coercivity", passed=True, detail=f"min a_h(v, v) {min(values):.3e}")

    @staticmethod
    def check_fixed_points() -> CheckResult:
        """u = 0 under both flows and u = 1 without flow are preserved by a step"""
        mesh = MeshService.uniform_initial_mesh(2)
        cases: List[Tuple[VelocityField, float]] = [
            (VelocityField(kind="expanding", v0=10.0), 0.0),
            (VelocityField(kind="sheer", v0=100.0), 0.0),
            (VelocityField(kind="zero"), 0.0),
            (VelocityField(kind="zero"), 1.0),
        ]
        worst = 0.0
        for velocity, value in cases:
            spec = ProblemSpec(epsilon=0.01, velocity=velocity, tau=0.001, final_time=0.001,
                               initial_condition=ScalarField(kind="constant", value=value))
            space = SpaceService.create_space(mesh, spec.degree)
            u_prev = SpaceService.project_l2(space, spec.initial_condition)
            u = StepperService.solve_step(space, spec, u_prev)
            worst = max(worst, float(np.max(np.abs(u.values - value))))
        return CheckResult(name="fixed_points", passed=worst < 1e-10, detail=f"max deviation {worst:.3e}")

    @staticmethod
    def check_estimator_zero() -> CheckResult:
        """A linear exact solution is reproduced and not flagged by the indicator"""
        spec = ProblemSpec(
            epsilon=1.0,
            velocity=VelocityField(kind="affine", b=1.0, d=0.5),
            tau=1.0,
            final_time=1.0,
            reaction="none",
            manufactured=ManufacturedSolution(kind="linear", a=1.0, b=-2.0, c=0.5),
        )
        space = SpaceService.create_space(MeshService.uniform_initial_mesh(2), spec.degree)
        u_prev = SpaceService.zero(space)
        u = StepperService.solve_step(space, spec, u_prev)
        table = EstimatorService.estimate(u, u_prev, spec)
        eta = table.global_eta
        return CheckResult(name="estimator_zero", passed=eta < 1e-8, detail=f"eta {eta:.3e}")

    @classmethod
    def checks(cls) -> List[Tuple[str, Callable[[], CheckResult]]]:
        return [
            ("mesh_invariants", cls.check_mesh_invariants),
            ("jacobian", cls.check_jacobian),
            ("coercivity", cls.check_coercivity),
            ("fixed_points", cls.check_fixed_points),
            ("estimator_zero", cls.check_estimator_zero),
        ]

    @classmethod
    def run_all(cls) -> List[CheckResult]:
        results = []
        for name, check in cls.checks():
            try:
                result = check()
            except AdvacError as e:
                result = CheckResult(name=name, passed=False, detail=str(e))
            level = logging.INFO if result.passed else logging.ERROR
            logger.log(level, f"Check {result.name}: {'passed' if result.passed else 'FAILED'} ({result.detail})")
            results.append(result)
        return results
