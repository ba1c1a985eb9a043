"""
Stepper service: backward Euler in time with a damped Newton solve per step
"""
import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.sparse.linalg import spsolve

from model.adaptation import AdaptDriver
from model.dg_space import DGFunction, DGSpace
from model.indicator import IndicatorTable
from model.problem_spec import NewtonConfig, ProblemSpec, is_close_time
from model.run_result import NewtonResult, RunResult, Snapshot
from model.step_record import StepRecord
from service.adapt_service import AdaptService
from service.estimator_service import EstimatorService
from service.forms_service import FormsService
from service.space_service import SpaceService
from utils.errors import StepFailureError

logger = logging.getLogger(__name__)


class StepperService:
    """Rothe time loop: one semilinear elliptic solve per time level"""

    @staticmethod
    def newton_solve(space: DGSpace, spec: ProblemSpec, u_prev: DGFunction,
                     newton: Optional[NewtonConfig] = None, step: Optional[int] = None,
                     initial_guess: Optional[DGFunction] = None) -> NewtonResult:
        """
        Solve a_h(u, v) + r_h(u)(v) = l_h(v) by Newton's method with backtracking

        Converged when ||R(u)|| <= abs_tol or ||R(u)|| <= rel_tol ||R(u_0)||,
        u_0 being the initial guess (u_prev by default). A step that increases
        the residual norm is shortened by the damping factor up to
        max_halvings times.

        Args:
            space: Space of the unknown
            spec: Problem data
            u_prev: Previous time level on space
            newton: Solver settings
            step: Time step index, for messages
            initial_guess: Starting iterate

        Returns:
            NewtonResult

        Raises:
            StepFailureError: if max_iters iterations do not converge
        """
        newton = newton or NewtonConfig()
        system = FormsService.assemble(space, spec, u_prev)
        coefficients = np.array((initial_guess or u_prev).coefficients)
        u = DGFunction(space=space, coefficients=coefficients)
        residual = FormsService.residual(system, spec, u)
        norm = float(np.linalg.norm(residual))
        history = [norm]
        target = max(newton.abs_tol, newton.rel_tol * norm)
        if norm <= target:
            return NewtonResult(solution=u, iterations=0, history=history, final_residual=norm, target=target)

        for iteration in range(1, newton.max_iters + 1):
            jacobian = (system.stiffness + FormsService.nonlinear_jacobian(spec, u)).tocsc()
            delta = np.atleast_1d(spsolve(jacobian, -residual))
            if not np.all(np.isfinite(delta)):
                raise StepFailureError(f"Singular Newton system at step {step}, iteration {iteration}",
                                       history=history, step=step)

            length = 1.0
            candidate = DGFunction(space=space, coefficients=u.coefficients + delta)
            candidate_residual = FormsService.residual(system, spec, candidate)
            candidate_norm = float(np.linalg.norm(candidate_residual))
            halvings = 0
            while candidate_norm > norm and halvings < newton.max_halvings:
                length *= newton.damping
                halvings += 1
                candidate = DGFunction(space=space, coefficients=u.coefficients + length * delta)
                candidate_residual = FormsService.residual(system, spec, candidate)
                candidate_norm = float(np.linalg.norm(candidate_residual))

            u, residual, norm = candidate, candidate_residual, candidate_norm
            history.append(norm)
            logger.debug(f"Newton step {step} iteration {iteration}: |R| = {norm:.6e} (step length {length:g})")
            if norm <= target:
                logger.info(f"Newton converged at step {step} in {iteration} iterations, |R| = {norm:.3e}")
                return NewtonResult(solution=u, iterations=iteration, history=history,
                                    final_residual=norm, target=target)

        raise StepFailureError(
            f"Newton did not converge at step {step} after {newton.max_iters} iterations (|R| = {norm:.3e})",
            history=history,
            step=step,
        )

    @classmethod
    def solve_step(cls, space: DGSpace, spec: ProblemSpec, u_prev: DGFunction,
                   newton: Optional[NewtonConfig] = None, step: Optional[int] = None) -> DGFunction:
        """u_h^k on space from u_h^{k-1}, starting Newton at u_prev"""
        return cls.newton_solve(space, spec, u_prev, newton=newton, step=step).solution

    @classmethod
    def run(cls, spec: ProblemSpec, driver: AdaptDriver, newton: Optional[NewtonConfig] = None,
            snapshot_times: Iterable[float] = ()) -> RunResult:
        """
        March from t = 0 to T

        For every step: solve on the current mesh and estimate. With
        adaptation enabled and a non-empty mark set, the mesh is refined and
        coarsened, u_prev is transferred and the step is solved again, at most
        driver.max_cycles times. Without adaptation the indicators are still
        recorded.

        Args:
            spec: Problem data
            driver: Initial mesh and adaptation settings
            newton: Nonlinear solver settings
            snapshot_times: Times at which to keep a copy of the solution

        Returns:
            RunResult with one StepRecord per step
        """
        newton = newton or NewtonConfig()
        snapshot_times = sorted(float(t) for t in snapshot_times)
        mesh = driver.initial_mesh
        space = SpaceService.create_space(mesh, spec.degree)
        FormsService.check_coercivity(FormsService.assemble_bilinear(space, spec), samples=20)
        u_prev = SpaceService.project_l2(space, spec.initial_condition, subdivisions=driver.projection_subdivisions)

        snapshots: List[Snapshot] = []
        if any(is_close_time(t, 0.0) for t in snapshot_times):
            snapshots.append(Snapshot(k=0, t=0.0, solution=u_prev))

        records: List[StepRecord] = []
        events: List[Tuple[int, IndicatorTable]] = []
        times = spec.step_times()
        logger.info(
            f"Starting run: {spec.num_steps} steps, tau = {spec.tau}, {mesh.num_active} elements, "
            f"adaptive = {driver.enabled}"
        )
        for k in range(1, spec.num_steps + 1):
            t = float(times[k])
            result = cls.newton_solve(space, spec, u_prev, newton=newton, step=k)
            table = EstimatorService.estimate(result.solution, u_prev, spec)

            cycles = 0
            while driver.enabled and cycles < driver.max_cycles:
                if AdaptService.mark(table, spec).is_empty:
                    break
                adapted = AdaptService.adapt_once(mesh, space, result.solution, u_prev, spec,
                                                  indicators=table, step=k)
                if not adapted.changed:
                    break
                events.append((k, table))
                cycles += 1
                mesh, space, u_prev = adapted.mesh, adapted.space, adapted.u_prev
                result = cls.newton_solve(space, spec, u_prev, newton=newton, step=k)
                table = EstimatorService.estimate(result.solution, u_prev, spec)

            u = result.solution
            records.append(StepRecord(
                k=k,
                t=t,
                newton_iters=result.iterations,
                final_residual=result.final_residual,
                residual_target=result.target,
                dofs=space.total_dofs,
                elements=mesh.num_active,
                max_element_indicator=table.max_eta,
                global_indicator=table.global_eta,
                data_oscillation=table.global_theta,
                adapt_cycles=cycles,
                solution_min=float(u.values.min()),
                solution_max=float(u.values.max()),
            ))
            if any(is_close_time(t, s) for s in snapshot_times):
                snapshots.append(Snapshot(k=k, t=t, solution=u, indicators=table))
            u_prev = u

        logger.info(f"Run finished: {len(records)} steps, final DoFs {space.total_dofs}")
        return RunResult(records=records, solution=u_prev, snapshots=snapshots, indicator_events=events)
