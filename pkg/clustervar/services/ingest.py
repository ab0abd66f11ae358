"""
CSV panel ingestion and the config-driven preprocessing pipeline
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from clustervar.core.errors import DataError
from clustervar.models.experiment import CsvSchema, DataSource, Frequency
from clustervar.models.panel import TimeSeriesPanel, TransformSpec
from clustervar.services.timeseries import apply_transforms, split_holdout

logger = logging.getLogger(__name__)

TransformPlan = Union[Sequence[TransformSpec], Dict[str, Sequence[TransformSpec]]]


def _check_dates(raw: pd.Series, frequency: Frequency):
    dates = pd.to_datetime(raw, errors="coerce")
    bad = dates.isna()
    if bad.any():
        row = int(np.argmax(bad.to_numpy()))
        raise DataError(f"unparseable date '{raw.iloc[row]}' in data row {row + 1}")
    if dates.duplicated().any():
        row = int(np.argmax(dates.duplicated().to_numpy()))
        raise DataError(f"duplicate date {dates.iloc[row].date()} in data row {row + 1}")
    steps = dates.diff().iloc[1:]
    if (steps <= pd.Timedelta(0)).any():
        row = int(np.argmax((steps <= pd.Timedelta(0)).to_numpy())) + 1
        raise DataError(f"dates out of order at data row {row + 1}")

    if frequency == Frequency.DAILY:
        gaps = steps != pd.Timedelta(days=1)
    elif frequency == Frequency.QUARTERLY:
        quarters = dates.dt.to_period("Q")
        ordinal = quarters.dt.year * 4 + quarters.dt.quarter
        gaps = ordinal.diff().iloc[1:] != 1
    else:
        return
    if gaps.any():
        row = int(np.argmax(gaps.to_numpy())) + 1
        raise DataError(f"gap in the {frequency.value} date sequence before data row {row + 1}")


def load_csv_panel(path: Union[str, Path], schema: Optional[CsvSchema] = None) -> TimeSeriesPanel:
    """Read a UTF-8 CSV with a header row into a panel.

    Rows must be chronological; blank or non-numeric cells are rejected with the
    offending data row (1-based, header excluded) and column.
    """
    schema = schema or CsvSchema()
    path = Path(path)
    if not path.exists():
        raise DataError(f"CSV file not found: {path}")

    try:
        frame = pd.read_csv(path, sep=schema.delimiter, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"cannot parse {path}: {e}") from e
    frame.columns = [str(c).strip() for c in frame.columns]

    if schema.date_column is not None and schema.date_column not in frame.columns:
        raise DataError(f"date column '{schema.date_column}' missing from {path.name}")
    series = schema.series or [c for c in frame.columns if c != schema.date_column]
    missing = [name for name in series if name not in frame.columns]
    if missing:
        raise DataError(f"series columns missing from {path.name}: {missing}")
    if not series:
        raise DataError(f"{path.name} has no series columns")
    if frame.empty:
        raise DataError(f"{path.name} has no data rows")

    values = np.empty((len(frame), len(series)))
    for j, name in enumerate(series):
        cells = frame[name].str.strip()
        blank = cells == ""
        if blank.any():
            row = int(np.argmax(blank.to_numpy()))
            raise DataError(f"blank cell in data row {row + 1}, column '{name}'")
        numeric = pd.to_numeric(cells, errors="coerce")
        bad = numeric.isna() | ~np.isfinite(numeric)
        if bad.any():
            row = int(np.argmax(bad.to_numpy()))
            raise DataError(f"non-numeric cell '{cells.iloc[row]}' in data row {row + 1}, column '{name}'")
        values[:, j] = numeric.to_numpy(dtype=float)

    if schema.date_column is not None:
        _check_dates(frame[schema.date_column].str.strip(), schema.frequency)

    logger.info(f"Loaded {path.name}: {values.shape[0]} rows x {values.shape[1]} series")
    return TimeSeriesPanel(values=values, names=tuple(series))


def expand_plan(plan: TransformPlan) -> List[TransformSpec]:
    """A per-series map becomes an ordered list of series-targeted specs"""
    if isinstance(plan, dict):
        return [
            spec.model_copy(update={"series": [name]})
            for name, specs in plan.items()
            for spec in specs
        ]
    return list(plan)


def run_pipeline(panel: TimeSeriesPanel, plan: TransformPlan) -> TimeSeriesPanel:
    """Apply transforms in order and truncate every series to the common surviving length"""
    specs = expand_plan(plan)
    if not specs:
        return panel
    return apply_transforms(panel, specs)


def source_plan(source: DataSource) -> List[TransformSpec]:
    return expand_plan(source.transforms) + expand_plan(source.transform_map)


def replay_transforms(raw: TimeSeriesPanel, log: Sequence[TransformSpec]) -> TimeSeriesPanel:
    """Re-apply a recorded transform log; zscore steps reuse their recorded stats"""
    return run_pipeline(TimeSeriesPanel(values=raw.values, names=raw.names), list(log))


def transform_split(
    raw: TimeSeriesPanel, plan: TransformPlan, n_holdout: int
) -> Tuple[TimeSeriesPanel, TimeSeriesPanel]:
    """Fit the pipeline on the raw training window, then replay it over the whole
    series so the last ``n_holdout`` raw points come out transformed with the
    training statistics and full lag history."""
    raw_train, _ = split_holdout(raw, n_holdout)
    train = run_pipeline(raw_train, plan)
    full = replay_transforms(raw, train.transform_log)
    holdout = full.rows(full.n_obs - n_holdout, None)
    return train, holdout


def transform_holdout(
    raw_context: TimeSeriesPanel, raw_holdout: TimeSeriesPanel, log: Sequence[TransformSpec]
) -> TimeSeriesPanel:
    """Transform raw holdout rows using raw training rows before them as history"""
    if tuple(raw_context.names) != tuple(raw_holdout.names):
        raise DataError("context and holdout panels have different series")
    joined = TimeSeriesPanel(values=np.vstack([raw_context.values, raw_holdout.values]), names=raw_holdout.names)
    full = replay_transforms(joined, log)
    if full.n_obs < raw_holdout.n_obs:
        raise DataError("raw context is too short for the recorded transforms")
    return full.rows(full.n_obs - raw_holdout.n_obs, None)


def load_source(source: DataSource) -> TimeSeriesPanel:
    """Raw panel of a configured data source"""
    return load_csv_panel(source.path, source.csv)
