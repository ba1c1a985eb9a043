"""
Output service: VTK snapshots, time series and indicator tables
"""
import csv
import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np

from model.convergence import ConvergenceReport
from model.dg_space import DGFunction
from model.experiment import ExperimentConfig
from model.indicator import IndicatorTable
from model.mesh import Mesh
from model.run_result import RunResult
from model.step_record import StepRecord
from service.config_service import ConfigService
from service.space_service import SpaceService
from utils.errors import MissingDependencyError

logger = logging.getLogger(__name__)

REFERENCE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def _with_z(points: np.ndarray) -> np.ndarray:
    return np.column_stack([points, np.zeros(len(points))])


def _meshio():
    try:
        import meshio
    except ImportError as e:
        from utils.dependency_checker import DependencyChecker
        help_msg = DependencyChecker.get_installation_help_message("vtk")
        logger.error(f"VTK output not available: {e}")
        raise MissingDependencyError(f"VTK output not available: {e}. {help_msg}", feature="vtk") from e
    return meshio


class OutputService:
    """Writes run results to disk"""

    @staticmethod
    def _prepare(path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def _write_rows(path: Path, header: List[str], rows: Iterable[Iterable]) -> Path:
        path = OutputService._prepare(path)
        try:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        return path

    @classmethod
    def write_mesh_vtk(cls, mesh: Mesh, path: Path) -> Path:
        """Active triangles with element ids and generations as cell data"""
        meshio = _meshio()
        path = cls._prepare(path)
        active = mesh.active_ids
        vtk_mesh = meshio.Mesh(
            points=_with_z(mesh.vertices),
            cells=[("triangle", mesh.triangles[active])],
            cell_data={
                "element_id": [active.astype(np.int64)],
                "generation": [mesh.generation[active].astype(np.int64)],
            },
        )
        meshio.write(str(path), vtk_mesh, file_format="vtk42", binary=False)
        logger.info(f"Mesh written to {path}")
        return path

    @classmethod
    def write_solution_vtk(cls, u: DGFunction, path: Path) -> Path:
        """
        Elementwise solution values as point data

        Vertices are duplicated per element so the discontinuous field is
        represented without averaging.
        """
        meshio = _meshio()
        path = cls._prepare(path)
        space = u.space
        mesh = space.mesh
        n = space.num_elements
        points = mesh.active_coordinates.reshape(3 * n, 2)
        vertex_values = u.local @ space.basis.values(REFERENCE_VERTICES).T
        vtk_mesh = meshio.Mesh(
            points=_with_z(points),
            cells=[("triangle", np.arange(3 * n).reshape(n, 3))],
            point_data={"u": vertex_values.reshape(3 * n)},
            cell_data={
                "element_id": [mesh.active_ids.astype(np.int64)],
                "generation": [mesh.generation[mesh.active_ids].astype(np.int64)],
            },
        )
        try:
            meshio.write(str(path), vtk_mesh, file_format="vtk42", binary=False)
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        logger.info(f"Solution written to {path}")
        return path

    @classmethod
    def write_timeseries(cls, records: List[StepRecord], path: Path) -> Path:
        path = cls._write_rows(path, StepRecord.CSV_COLUMNS, (r.csv_row() for r in records))
        logger.info(f"Time series with {len(records)} rows written to {path}")
        return path

    @classmethod
    def write_indicators(cls, table: IndicatorTable, path: Path) -> Path:
        return cls._write_rows(path, IndicatorTable.CSV_COLUMNS, table.csv_rows())

    @classmethod
    def write_coefficients(cls, u: DGFunction, path: Path) -> Path:
        rows = ((e, d, f"{v:.17g}") for e, d, v in SpaceService.coefficient_rows(u))
        return cls._write_rows(path, ["element_id", "local_dof", "value"], rows)

    @classmethod
    def write_convergence(cls, report: ConvergenceReport, path: Path) -> Path:
        path = cls._write_rows(path, ConvergenceReport.CSV_COLUMNS, report.csv_rows())
        logger.info(f"Convergence table written to {path}")
        return path

    @classmethod
    def write_outputs(cls, config: ExperimentConfig, result: RunResult, out_dir: Path,
                      vtk: bool = True) -> Dict[str, List[Path]]:
        """
        Write every artefact of a run

        {problem}_{mode}_{k}.vtk per snapshot, timeseries.csv,
        indicators_{k}.csv per adapt event and the resolved config.yaml.
        With vtk=False the snapshots are skipped.

        Returns:
            Paths grouped by kind
        """
        out_dir = Path(out_dir)
        written: Dict[str, List[Path]] = {"snapshots": [], "timeseries": [], "indicators": [], "config": []}
        for snapshot in (result.snapshots if vtk else []):
            path = out_dir / f"{config.run_name}_{snapshot.k}.vtk"
            written["snapshots"].append(cls.write_solution_vtk(snapshot.solution, path))
        written["timeseries"].append(cls.write_timeseries(result.records, out_dir / "timeseries.csv"))

        seen: Counter = Counter()
        for k, table in result.indicator_events:
            seen[k] += 1
            suffix = f"{k}" if seen[k] == 1 else f"{k}_{seen[k]}"
            written["indicators"].append(cls.write_indicators(table, out_dir / f"indicators_{suffix}.csv"))
        written["config"].append(ConfigService.dump(config, out_dir / "config.yaml"))
        logger.info(
            f"Wrote {len(written['snapshots'])} snapshots and {len(written['indicators'])} indicator tables to {out_dir}"
        )
        return written
