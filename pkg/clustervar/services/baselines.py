"""
Reference forecasters: Mean, RW, per-series AR, lasso-Granger and grouped-lasso-Granger
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from clustervar.core.errors import DataError
from clustervar.models.panel import LagDesign
from clustervar.models.var import BaselineKind, BaselineModel
from clustervar.services.solvers import group_lasso_bcd, lasso_cd, ridge_solve
from clustervar.services.timeseries import lag_row_from_context

logger = logging.getLogger(__name__)

# Penalised fits average their loss over design rows (sum of squares / rows for ar,
# half of it for lg and glg), matching the scale of the structured fits.


def _penalty(kind: BaselineKind, hyperparameters: Dict[str, Any]) -> float:
    lam = hyperparameters.get("lam")
    if lam is None:
        raise DataError(f"{kind.value} needs the hyperparameter 'lam'")
    lam = float(lam)
    if lam < 0 or (kind != BaselineKind.AR and lam == 0):
        raise DataError(f"{kind.value} penalty must be positive, got {lam}")
    return lam


def fit_ar(design: LagDesign, lam: float) -> np.ndarray:
    """Each series on its own p lags by ridge; off-diagonal blocks stay zero"""
    lam = lam * design.n_rows
    W = np.zeros((design.n_series * design.p, design.n_series))
    for k in range(design.n_series):
        rows = design.block_index[k]
        W[rows.start:rows.stop, k] = ridge_solve(design.block(k), design.Y[:, k], lam)
    return W


def fit_lg(design: LagDesign, lam: float, W_init: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-task lasso over all Kp inputs"""
    return np.column_stack([
        lasso_cd(design.X, design.Y[:, k], lam * design.n_rows, w_init=None if W_init is None else W_init[:, k])
        for k in range(design.n_series)
    ])


def fit_glg(design: LagDesign, lam: float, W_init: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-task group lasso with the K lag blocks as groups"""
    groups = list(design.block_index.values())
    return np.column_stack([
        group_lasso_bcd(
            design.X, design.Y[:, k], lam * design.n_rows, groups, w_init=None if W_init is None else W_init[:, k]
        )
        for k in range(design.n_series)
    ])


def fit_baseline(
    kind: BaselineKind,
    design: LagDesign,
    hyperparameters: Optional[Dict[str, Any]] = None,
    W_init: Optional[np.ndarray] = None,
) -> BaselineModel:
    """Fit a reference forecaster on a lag design.

    mean stores the training means of Y, rw is stateless; ar, lg and glg need
    ``{"lam": value}``. lg and glg start their descent from ``W_init`` when given.
    """
    kind = BaselineKind(kind)
    hyperparameters = dict(hyperparameters or {})
    logger.info(f"Fitting baseline {kind.value}: K={design.n_series}, p={design.p}, rows={design.n_rows}")

    if kind == BaselineKind.MEAN:
        return BaselineModel(kind=kind, p=design.p, names=design.names, means=design.Y.mean(axis=0))
    if kind == BaselineKind.RW:
        return BaselineModel(kind=kind, p=design.p, names=design.names)

    lam = _penalty(kind, hyperparameters)
    if kind == BaselineKind.AR:
        W = fit_ar(design, lam)
    elif kind == BaselineKind.LG:
        W = fit_lg(design, lam, W_init)
    else:
        W = fit_glg(design, lam, W_init)
    return BaselineModel(kind=kind, p=design.p, names=design.names, W=W, hyperparameters={"lam": lam})


def forecast_baseline(model: BaselineModel, context: np.ndarray) -> np.ndarray:
    """One-step-ahead forecast from the chronological context rows (most recent last)"""
    context = np.atleast_2d(np.asarray(context, dtype=float))
    if context.shape[1] != model.n_series:
        raise DataError(f"context has {context.shape[1]} series, model has {model.n_series}")
    needed = model.required_context
    if context.shape[0] < needed:
        raise DataError(f"{model.kind.value} forecast needs {needed} past rows, got {context.shape[0]}")

    if model.kind == BaselineKind.MEAN:
        return np.array(model.means)
    if model.kind == BaselineKind.RW:
        return context[-1].copy()
    return lag_row_from_context(context, model.p) @ model.W
