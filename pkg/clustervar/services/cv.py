"""
Hyperparameter selection by blocked k-fold cross-validation over design rows
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from clustervar.core.config import settings
from clustervar.core.errors import DataError
from clustervar.models.evaluation import CvResult, CvRow
from clustervar.models.experiment import Grid, MethodName
from clustervar.models.options import OuterOptions, PgdOptions
from clustervar.models.panel import LagDesign
from clustervar.models.var import McvarInit
from clustervar.services.evaluate import holdout_mse
from clustervar.services.methods import fit_method, grid_points

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


def blocked_folds(n_rows: int, folds: int) -> List[np.ndarray]:
    """Contiguous chronological validation blocks that cover every row once"""
    if folds < 2:
        raise DataError(f"need at least 2 folds, got {folds}")
    if n_rows < folds:
        raise DataError(f"{n_rows} design rows cannot fill {folds} folds")
    return np.array_split(np.arange(n_rows), folds)


def select_best(table: List[CvRow]) -> CvRow:
    """Lowest mean validation MSE; near-ties go to larger lambda, then smaller kappa, then smaller r"""
    if not table:
        raise DataError("empty cross-validation table")
    best_mse = min(row.mean_mse for row in table)
    tied = [row for row in table if row.mean_mse <= best_mse + TIE_TOL * max(1.0, abs(best_mse))]

    def strength(row: CvRow):
        return (
            -(row.lam if row.lam is not None else 0.0),
            row.kappa if row.kappa is not None else 0.0,
            row.r if row.r is not None else 0,
        )

    return min(tied, key=strength)


def cv_splits(design: LagDesign, folds: int) -> List[Tuple[LagDesign, LagDesign]]:
    """(training, validation) designs for every blocked fold"""
    blocks = blocked_folds(design.n_rows, folds)
    all_rows = np.arange(design.n_rows)
    return [(design.take(np.setdiff1d(all_rows, block)), design.take(block)) for block in blocks]


def warm_paths(points: List[Dict[str, Any]]) -> List[List[int]]:
    """Point indices grouped by everything except lambda, each group ordered from the largest lambda down"""
    paths: Dict[Tuple, List[int]] = {}
    for index, point in enumerate(points):
        key = tuple(sorted((name, value) for name, value in point.items() if name != "lam"))
        paths.setdefault(key, []).append(index)
    return [sorted(path, key=lambda i: -points[i].get("lam", 0.0)) for path in paths.values()]


def scoring_options(outer: Optional[OuterOptions]) -> OuterOptions:
    """Outer budget of the fits that only score a grid point"""
    outer = outer or OuterOptions()
    return OuterOptions(max_iter=outer.max_iter, tol=max(outer.tol, settings.CV_OUTER_TOL))


def grid_search_cv(
    design: LagDesign,
    method: MethodName,
    grid: Optional[Grid] = None,
    folds: Optional[int] = None,
    opts: Optional[PgdOptions] = None,
    outer: Optional[OuterOptions] = None,
    mcvar_init: McvarInit = McvarInit.PROFILE,
    points: Optional[List[Dict[str, Any]]] = None,
    splits: Optional[List[Tuple[LagDesign, LagDesign]]] = None,
) -> CvResult:
    """Average validation MSE of every grid point across blocked folds and pick the best.

    ``points`` replaces the grid product when given; ``splits`` reuses fold designs
    built by ``cv_splits``. Within a fold, points that differ only in lambda are fit
    from the largest lambda down, each starting from the previous solution.
    """
    method = MethodName(method)
    grid = grid or Grid()
    points = points if points is not None else grid_points(method, grid, design.n_series)
    if not points:
        raise DataError("empty hyperparameter grid")
    if splits is None:
        splits = cv_splits(design, folds or settings.CV_FOLDS)
    folds = len(splits)
    scoring = scoring_options(outer)

    logger.info(f"Cross-validating {method.value}: {len(points)} grid points x {folds} folds")
    fold_mse: List[List[float]] = [[] for _ in points]
    for train, validation in splits:
        for path in warm_paths(points):
            warm = None
            for index in path:
                fitted = fit_method(method, train, points[index], opts, scoring, mcvar_init, warm=warm)
                fold_mse[index].append(holdout_mse(fitted.model, validation)[1])
                warm = fitted

    table: List[CvRow] = []
    for point, errors in zip(points, fold_mse):
        table.append(CvRow(**point, fold_mse=errors, mean_mse=float(np.mean(errors))))
        logger.debug(f"CV {method.value} {point}: mse={table[-1].mean_mse:.6g}")

    best = select_best(table)
    logger.info(f"CV selected {best.point()} for {method.value} (mse={best.mean_mse:.6g})")
    return CvResult(method=method.value, folds=folds, best=best.point(), table=table)
