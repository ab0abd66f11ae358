"""
Training-size sweeps: every method at every training size, tuned by inner CV and
scored on a common holdout, with paired significance flags against the competitors.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from clustervar.core.errors import DataError
from clustervar.models.evaluation import GrangerGraph
from clustervar.models.experiment import COMPETITORS, MethodName, SweepConfig, SweepMode
from clustervar.models.panel import TimeSeriesPanel
from clustervar.models.scenario import SimulationConfig, default_scenario
from clustervar.models.var import VarModel
from clustervar.services.cv import cv_splits, grid_search_cv
from clustervar.services.evaluate import (
    granger_accuracy,
    granger_graph_from_w,
    graph_stats,
    holdout_mse,
    paired_ttest_onesided,
    pointwise_errors,
)
from clustervar.services.ingest import load_source, source_plan, transform_split
from clustervar.services.methods import fit_method, grid_points
from clustervar.services.simulate import make_scenario, simulate_var
from clustervar.services.timeseries import build_holdout_design, build_lag_design, split_holdout

logger = logging.getLogger(__name__)


@dataclass
class CellJob:
    """One (seed, training size) cell with its data already prepared"""
    config: SweepConfig
    seed: int
    size: int
    train: TimeSeriesPanel
    holdout: TimeSeriesPanel
    true_model: Optional[VarModel] = None
    truth: Optional[GrangerGraph] = None


@dataclass
class MethodScore:
    mse: float
    relative_mse: float
    errors: np.ndarray
    hyperparameters: Dict[str, Any]
    granger_accuracy: Optional[float] = None
    n_edges: int = 0
    n_leading: int = 0


@dataclass
class CellResult:
    seed: int
    size: int
    reference_mse: float
    scores: Dict[str, MethodScore] = field(default_factory=dict)


def run_cell(job: CellJob) -> CellResult:
    """Tune, fit and score every configured method on one training window"""
    cfg = job.config
    design = build_lag_design(job.train, cfg.p)
    holdout = build_holdout_design(job.train, job.holdout, cfg.p)

    fitted = {}
    splits = None
    for method in cfg.methods:
        points = grid_points(method, cfg.grid, design.n_series)
        point = points[0]
        if len(points) > 1:
            # one set of fold designs per cell, shared by every method
            splits = splits or cv_splits(design, cfg.folds)
            point = grid_search_cv(
                design, method, cfg.grid, cfg.folds, cfg.pgd, cfg.outer, cfg.mcvar_init, points=points, splits=splits
            ).best
        fitted[method] = fit_method(method, design, point, cfg.pgd, cfg.outer, cfg.mcvar_init)

    if job.true_model is not None:
        reference_mse = holdout_mse(job.true_model, holdout)[1]
    else:
        rw = fitted.get(MethodName.RW) or fit_method(MethodName.RW, design)
        reference_mse = holdout_mse(rw.model, holdout)[1]

    result = CellResult(seed=job.seed, size=job.size, reference_mse=reference_mse)
    for method, fit in fitted.items():
        mse = holdout_mse(fit.model, holdout)[1]
        score = MethodScore(
            mse=mse,
            relative_mse=mse / reference_mse,
            errors=pointwise_errors(fit.model, holdout),
            hyperparameters=fit.hyperparameters,
        )
        var_model = fit.var_model
        if var_model is not None:
            graph = granger_graph_from_w(var_model, cfg.edge_threshold)
            summary = graph_stats(graph)
            score.n_edges, score.n_leading = summary.n_edges, summary.n_leading
            if job.truth is not None:
                score.granger_accuracy = granger_accuracy(graph, job.truth)
        result.scores[method.value] = score

    logger.info(f"Sweep cell seed={job.seed} size={job.size} done")
    return result


def _synthetic_jobs(cfg: SweepConfig) -> List[CellJob]:
    jobs = []
    longest = max(cfg.sizes)
    for seed in cfg.seeds:
        spec = default_scenario(cfg.scenario, seed=seed, p=cfg.p)
        true_model, truth = make_scenario(spec)
        panel = simulate_var(
            true_model, SimulationConfig(T=longest + cfg.t_holdout, burn_in=cfg.burn_in, seed=seed)
        )
        train_all, holdout = split_holdout(panel, cfg.t_holdout)
        for size in cfg.sizes:
            train = train_all.rows(longest - size, None)
            jobs.append(CellJob(cfg, seed, size, train, holdout, true_model, truth))
    return jobs


def _real_jobs(cfg: SweepConfig) -> List[CellJob]:
    raw = load_source(cfg.data)
    train_all, holdout = transform_split(raw, source_plan(cfg.data), cfg.t_holdout)
    jobs = []
    for size in cfg.sizes:
        if size > train_all.n_obs:
            logger.warning(f"Skipping size {size}: only {train_all.n_obs} processed training rows")
            continue
        jobs.append(CellJob(cfg, cfg.seeds[0], size, train_all.rows(train_all.n_obs - size, None), holdout))
    return jobs


def significance_string(cells: List[CellResult], method: str, alpha: float) -> str:
    """Flags of ``method`` against each competitor in row order, errors pooled over seeds"""
    flags = []
    for competitor in COMPETITORS:
        if competitor.value == method or competitor.value not in cells[0].scores:
            continue
        own = np.concatenate([cell.scores[method].errors for cell in cells])
        other = np.concatenate([cell.scores[competitor.value].errors for cell in cells])
        flags.append(paired_ttest_onesided(own, other, alpha).value)
    return "".join(flags)


class SweepResult:
    """Seed-averaged tables indexed by training size, one column per method"""

    def __init__(self, config: SweepConfig, cells: List[CellResult]):
        self.config = config
        self.cells = cells

    @property
    def methods(self) -> List[str]:
        return [m.value for m in self.config.methods]

    def _by_size(self) -> Dict[int, List[CellResult]]:
        groups: Dict[int, List[CellResult]] = {}
        for cell in self.cells:
            groups.setdefault(cell.size, []).append(cell)
        return dict(sorted(groups.items()))

    def _table(self, metric: str) -> pd.DataFrame:
        rows = {}
        for size, cells in self._by_size().items():
            row = {}
            for method in self.methods:
                values = [getattr(cell.scores[method], metric) for cell in cells]
                row[method] = np.nan if any(v is None for v in values) else float(np.mean(values))
            rows[size] = row
        frame = pd.DataFrame.from_dict(rows, orient="index", columns=self.methods)
        frame.index.name = "size"
        return frame

    def relative_mse(self) -> pd.DataFrame:
        return self._table("relative_mse")

    def granger_accuracy(self) -> pd.DataFrame:
        return self._table("granger_accuracy")

    def n_edges(self) -> pd.DataFrame:
        return self._table("n_edges")

    def n_leading(self) -> pd.DataFrame:
        return self._table("n_leading")

    def significance(self) -> pd.DataFrame:
        rows = {
            size: {method: significance_string(cells, method, self.config.alpha) for method in self.methods}
            for size, cells in self._by_size().items()
        }
        frame = pd.DataFrame.from_dict(rows, orient="index", columns=self.methods)
        frame.index.name = "size"
        return frame

    def cells_frame(self) -> pd.DataFrame:
        """Long table: one row per (seed, size, method)"""
        records = []
        for cell in self.cells:
            for method, score in cell.scores.items():
                records.append({
                    "seed": cell.seed,
                    "size": cell.size,
                    "method": method,
                    "mse": score.mse,
                    "reference_mse": cell.reference_mse,
                    "relative_mse": score.relative_mse,
                    "granger_accuracy": score.granger_accuracy,
                    "n_edges": score.n_edges,
                    "n_leading": score.n_leading,
                    **{f"hp_{key}": value for key, value in score.hyperparameters.items()},
                })
        return pd.DataFrame.from_records(records)


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run every (seed, size) cell, in a process pool when ``n_jobs`` > 1"""
    jobs = _synthetic_jobs(cfg) if cfg.mode == SweepMode.SYNTHETIC else _real_jobs(cfg)
    if not jobs:
        raise DataError("sweep has no training size that fits the data")
    logger.info(f"Sweep: {len(jobs)} cells, methods={[m.value for m in cfg.methods]}, n_jobs={cfg.n_jobs}")

    if cfg.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
            cells = list(pool.map(run_cell, jobs))
    else:
        cells = [run_cell(job) for job in jobs]
    return SweepResult(cfg, cells)
