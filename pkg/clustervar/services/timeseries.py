"""
Time-series operations: stationarity transforms, lag designs and chronological splits
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from clustervar.core.errors import DataError
from clustervar.models.panel import LagDesign, SeriesStats, TimeSeriesPanel, TransformKind, TransformSpec

logger = logging.getLogger(__name__)


def _transform_column(
    column: np.ndarray, spec: TransformSpec, name: str
) -> Tuple[np.ndarray, Optional[SeriesStats]]:
    """Apply one transform to one series; returns the new column and any fitted stats"""
    n_obs = column.shape[0]

    if spec.kind == TransformKind.ZSCORE:
        if spec.stats is not None:
            if name not in spec.stats:
                raise DataError(f"zscore stats missing for series '{name}'")
            stats = spec.stats[name]
            return (column - stats.mean) / stats.sd, None
        if n_obs < 2:
            raise DataError(f"zscore of series '{name}' needs at least two observations")
        mean = float(np.mean(column))
        sd = float(np.std(column))
        if not sd > 0:
            raise DataError(f"series '{name}' is constant; zscore undefined")
        return (column - mean) / sd, SeriesStats(mean=mean, sd=sd)

    lag = spec.period
    if lag >= n_obs:
        raise DataError(f"period {lag} must be smaller than the {n_obs} observations of '{name}'")
    if spec.is_log and np.any(column <= 0):
        raise DataError(f"{spec.kind.value} needs strictly positive values in series '{name}'")

    if spec.kind == TransformKind.DIFFERENCE:
        return column[lag:] - column[:-lag], None
    if spec.kind == TransformKind.LOG_DIFFERENCE:
        logged = np.log(column)
        return logged[lag:] - logged[:-lag], None
    # log year-on-year growth: ln(y_t / y_{t-period})
    return np.log(column[lag:] / column[:-lag]), None


def apply_transforms(panel: TimeSeriesPanel, specs: Sequence[TransformSpec]) -> TimeSeriesPanel:
    """Apply transforms in order, series by series, then align every series on its
    most recent common rows. zscore steps without stats record the stats they fit,
    so replaying the returned ``transform_log`` reproduces the panel exactly."""
    columns: List[np.ndarray] = [panel.values[:, i] for i in range(panel.n_series)]
    recorded: List[TransformSpec] = []

    for spec in specs:
        if spec.series is not None:
            unknown = set(spec.series) - set(panel.names)
            if unknown:
                raise DataError(f"transform targets unknown series: {sorted(unknown)}")

        fitted: Dict[str, SeriesStats] = {}
        for i, name in enumerate(panel.names):
            if not spec.applies_to(name):
                continue
            columns[i], stats = _transform_column(columns[i], spec, name)
            if stats is not None:
                fitted[name] = stats

        recorded.append(spec.model_copy(update={"stats": fitted}) if fitted else spec)

    common = min(column.shape[0] for column in columns)
    values = np.column_stack([column[column.shape[0] - common:] for column in columns])
    return TimeSeriesPanel(
        values=values,
        names=panel.names,
        transform_log=panel.transform_log + tuple(recorded),
    )


def apply_transform(panel: TimeSeriesPanel, spec: TransformSpec) -> TimeSeriesPanel:
    """Apply a single transform and append it to the panel's transform log"""
    return apply_transforms(panel, [spec])


def build_lag_design(panel: TimeSeriesPanel, p: int) -> LagDesign:
    """Regression matrices of a VAR(p): T - p rows, lag blocks most recent first"""
    if p < 1:
        raise DataError(f"lag order must be positive, got {p}")
    n_obs, n_series = panel.values.shape
    if n_obs <= p:
        raise DataError(f"need more than p={p} observations, got {n_obs}")

    values = panel.values
    X = np.empty((n_obs - p, n_series * p))
    for b in range(n_series):
        for j in range(1, p + 1):
            X[:, b * p + j - 1] = values[p - j:n_obs - j, b]

    return LagDesign(Y=values[p:], X=X, p=p, names=panel.names)


def split_holdout(panel: TimeSeriesPanel, n_holdout: int) -> Tuple[TimeSeriesPanel, TimeSeriesPanel]:
    """Chronological split; the holdout is the final ``n_holdout`` rows"""
    if n_holdout < 1 or n_holdout >= panel.n_obs:
        raise DataError(f"holdout size must lie in [1, {panel.n_obs - 1}], got {n_holdout}")
    cut = panel.n_obs - n_holdout
    return panel.rows(None, cut), panel.rows(cut, None)


def build_holdout_design(train: TimeSeriesPanel, holdout: TimeSeriesPanel, p: int) -> LagDesign:
    """Design over the holdout rows with the last p training rows prepended as lag context"""
    if tuple(train.names) != tuple(holdout.names):
        raise DataError("training and holdout panels have different series")
    if train.n_obs < p:
        raise DataError(f"training panel has {train.n_obs} rows, lag context needs {p}")
    context = np.vstack([train.values[train.n_obs - p:], holdout.values])
    return build_lag_design(TimeSeriesPanel(values=context, names=train.names), p)


def lag_row_from_context(context: np.ndarray, p: int) -> np.ndarray:
    """One Kp design row built from the most recent p observations (chronological rows)"""
    context = np.atleast_2d(np.asarray(context, dtype=float))
    if context.shape[0] < p:
        raise DataError(f"forecast needs {p} past observations, got {context.shape[0]}")
    recent = context[::-1][:p]  # row j holds lag j+1
    return recent.T.reshape(-1)
