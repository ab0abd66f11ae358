"""
Forecast evaluation: one-step forecasts, holdout MSE, Granger graphs and paired significance tests
"""

import logging
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats
from sklearn.metrics import adjusted_rand_score

from clustervar.core.config import settings
from clustervar.core.errors import DataError
from clustervar.models.evaluation import EvalReport, GrangerGraph, GraphStats, SignificanceFlag
from clustervar.models.panel import LagDesign
from clustervar.models.var import BaselineModel, VarModel

logger = logging.getLogger(__name__)

Forecaster = Union[VarModel, BaselineModel]


def forecast_one_step(model: VarModel, lag_row: np.ndarray) -> np.ndarray:
    """Column k of the result is <w[., k], x>"""
    lag_row = np.asarray(lag_row, dtype=float)
    if lag_row.shape != (model.W.shape[0],):
        raise DataError(f"lag row has shape {lag_row.shape}, model expects ({model.W.shape[0]},)")
    return lag_row @ model.W


def squared_errors(model: Forecaster, design: LagDesign) -> np.ndarray:
    """(rows, K) squared one-step errors over a design"""
    if design.n_rows == 0:
        raise DataError("holdout design has no rows")
    if tuple(model.names) != tuple(design.names) or model.p != design.p:
        raise DataError("model and holdout design disagree on series or lag order")
    return (design.Y - model.predict(design.X)) ** 2


def holdout_mse(model: Forecaster, design: LagDesign) -> Tuple[np.ndarray, float]:
    """Per-series MSE over the holdout rows and its average across series"""
    per_series = squared_errors(model, design).mean(axis=0)
    return per_series, float(per_series.mean())


def pointwise_errors(model: Forecaster, design: LagDesign) -> np.ndarray:
    """Squared error of every holdout point averaged across series, the pairing unit of the t-test"""
    return squared_errors(model, design).mean(axis=1)


def relative_mse(mse: float, mse_reference: float) -> float:
    if not mse_reference > 0:
        raise DataError(f"reference MSE must be positive, got {mse_reference}")
    return float(mse / mse_reference)


def granger_graph_from_w(model: VarModel, threshold: Optional[float] = None) -> GrangerGraph:
    """Edge l -> k when ||w[l,k]|| > threshold * (1 + ||W||_F) / K"""
    threshold = settings.EDGE_THRESHOLD if threshold is None else threshold
    if threshold < 0:
        raise DataError(f"edge threshold must be nonnegative, got {threshold}")
    cutoff = threshold * (1.0 + np.linalg.norm(model.W)) / model.n_series
    return GrangerGraph(adjacency=model.block_norms() > cutoff, names=model.names)


def _off_diagonal(n_nodes: int) -> np.ndarray:
    return ~np.eye(n_nodes, dtype=bool)


def granger_accuracy(predicted: GrangerGraph, truth: GrangerGraph) -> float:
    """(TP + TN) / (TP + TN + FP + FN) over the K(K-1) ordered pairs"""
    if predicted.n_nodes != truth.n_nodes:
        raise DataError(f"graphs have {predicted.n_nodes} and {truth.n_nodes} nodes")
    if truth.n_nodes < 2:
        raise DataError("accuracy needs at least two nodes")
    mask = _off_diagonal(truth.n_nodes)
    return float(np.mean(predicted.adjacency[mask] == truth.adjacency[mask]))


def graph_stats(graph: GrangerGraph) -> GraphStats:
    """Edge count, number of nodes with an out-edge and the out-degree of every node"""
    out_degree = graph.adjacency.sum(axis=1)
    return GraphStats(
        n_edges=graph.n_edges,
        n_leading=int(np.count_nonzero(out_degree)),
        out_degree=tuple(int(d) for d in out_degree),
    )


def paired_ttest_onesided(
    errors_a: np.ndarray, errors_b: np.ndarray, alpha: Optional[float] = None
) -> SignificanceFlag:
    """Is A significantly better (lower errors) than B, worse, or neither?

    Zero-variance differences are decided by their sign; all-zero differences are equal.
    """
    alpha = settings.SIGNIFICANCE_ALPHA if alpha is None else alpha
    errors_a = np.asarray(errors_a, dtype=float)
    errors_b = np.asarray(errors_b, dtype=float)
    if errors_a.shape != errors_b.shape or errors_a.ndim != 1:
        raise DataError("paired errors must be vectors of equal length")
    if errors_a.size < 2:
        raise DataError("paired t-test needs at least two pairs")

    diff = errors_b - errors_a
    if not np.any(diff):
        return SignificanceFlag.EQUAL
    if np.all(diff == diff[0]):
        return SignificanceFlag.BETTER if diff[0] > 0 else SignificanceFlag.WORSE

    if stats.ttest_rel(errors_b, errors_a, alternative="greater").pvalue < alpha:
        return SignificanceFlag.BETTER
    if stats.ttest_rel(errors_a, errors_b, alternative="greater").pvalue < alpha:
        return SignificanceFlag.WORSE
    return SignificanceFlag.EQUAL


def critical_value(alpha: float, df: int) -> float:
    """One-sided t critical value; a t statistic above it is significant at alpha"""
    return float(stats.t.ppf(1.0 - alpha, df))


def cluster_recovery(labels_true: Sequence[int], labels_pred: Sequence[int]) -> float:
    """Adjusted Rand index between two partitions of the series"""
    return float(adjusted_rand_score(labels_true, labels_pred))


def evaluate_model(
    method: str,
    model: Forecaster,
    holdout: LagDesign,
    reference: Optional[Forecaster] = None,
    truth: Optional[GrangerGraph] = None,
    threshold: Optional[float] = None,
    competitors: Optional[Dict[str, np.ndarray]] = None,
    alpha: Optional[float] = None,
) -> EvalReport:
    """Holdout report of one model.

    ``reference`` gives the relative-MSE denominator, ``truth`` the graph used for the
    accuracy, and ``competitors`` maps method names to their pointwise errors.
    """
    per_series, mse = holdout_mse(model, holdout)

    reference_mse = relative = None
    if reference is not None:
        reference_mse = holdout_mse(reference, holdout)[1]
        relative = relative_mse(mse, reference_mse)

    var_model = model.as_var_model() if isinstance(model, BaselineModel) else model
    accuracy = None
    if var_model is not None:
        graph = granger_graph_from_w(var_model, threshold)
        graph_summary = graph_stats(graph)
        if truth is not None:
            accuracy = granger_accuracy(graph, truth)
    else:
        graph_summary = GraphStats(n_edges=0, n_leading=0, out_degree=(0,) * model.n_series)

    significance = {}
    if competitors:
        own = pointwise_errors(model, holdout)
        significance = {
            name: paired_ttest_onesided(own, errors, alpha) for name, errors in competitors.items()
        }

    logger.info(f"Evaluated {method}: mse={mse:.6g}, relative={relative}, accuracy={accuracy}")
    return EvalReport(
        method=method,
        names=holdout.names,
        n_holdout=holdout.n_rows,
        per_series_mse=per_series.tolist(),
        mse=mse,
        reference_mse=reference_mse,
        relative_mse=relative,
        granger_accuracy=accuracy,
        n_edges=graph_summary.n_edges,
        n_leading=graph_summary.n_leading,
        out_degree=list(graph_summary.out_degree),
        significance=significance,
    )


def w_frame(model: VarModel) -> pd.DataFrame:
    """W as a labeled table: rows '<series>_lag<j>', columns the predicted series"""
    index = [f"{name}_lag{j}" for name in model.names for j in range(1, model.p + 1)]
    return pd.DataFrame(np.asarray(model.W), index=index, columns=list(model.names))


def w_from_frame(frame: pd.DataFrame, p: int) -> VarModel:
    """Inverse of ``w_frame``"""
    return VarModel(W=frame.to_numpy(dtype=float), p=p, names=tuple(str(c) for c in frame.columns))
