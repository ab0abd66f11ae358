"""
Time-series panel models
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator


def frozen_array(value, ndim: int, name: str) -> np.ndarray:
    """Copy ``value`` into a read-only float array of the given rank"""
    array = np.array(value, dtype=float)
    if array.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.flags.writeable = False
    return array


class TransformKind(str, Enum):
    """Stationarity transforms"""
    DIFFERENCE = "difference"
    LOG_DIFFERENCE = "log_difference"
    LOG_YOY_GROWTH = "log_yoy_growth"
    ZSCORE = "zscore"


class SeriesStats(BaseModel):
    """Normalisation statistics of one series"""
    model_config = ConfigDict(frozen=True)

    mean: float
    sd: float = Field(gt=0)


class TransformSpec(BaseModel):
    """One preprocessing step; ``series=None`` applies it to every series"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: TransformKind
    period: int = Field(default=1, ge=1)
    stats: Optional[Dict[str, SeriesStats]] = None
    series: Optional[List[str]] = None

    @property
    def shrinks(self) -> bool:
        return self.kind != TransformKind.ZSCORE

    @property
    def is_log(self) -> bool:
        return self.kind in (TransformKind.LOG_DIFFERENCE, TransformKind.LOG_YOY_GROWTH)

    def applies_to(self, name: str) -> bool:
        return self.series is None or name in self.series


class TimeSeriesPanel(BaseModel):
    """T x K observations, rows are time points and columns are series"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    names: Tuple[str, ...]
    transform_log: Tuple[TransformSpec, ...] = ()

    @field_validator("values", mode="before")
    @classmethod
    def _values(cls, value):
        array = np.array(value, dtype=float)
        if array.ndim == 1:
            array = array[:, None]
        return frozen_array(array, 2, "values")

    @model_validator(mode="after")
    def _check(self):
        n_rows, n_series = self.values.shape
        if n_rows < 1:
            raise ValueError("panel needs at least one time point")
        if len(self.names) != n_series:
            raise ValueError(f"{len(self.names)} names for {n_series} series")
        if len(set(self.names)) != len(self.names):
            raise ValueError("series names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("panel contains missing or non-finite values")
        return self

    @field_serializer("values")
    def _dump_values(self, values: np.ndarray):
        return values.tolist()

    @classmethod
    def from_array(cls, values, names: Optional[List[str]] = None) -> "TimeSeriesPanel":
        array = np.array(values, dtype=float)
        if array.ndim == 1:
            array = array[:, None]
        if names is None:
            names = [f"y{i + 1}" for i in range(array.shape[1])]
        return cls(values=array, names=tuple(names))

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_series(self) -> int:
        return self.values.shape[1]

    def rows(self, start: Optional[int] = None, stop: Optional[int] = None) -> "TimeSeriesPanel":
        """Chronological slice keeping names and transform history"""
        return TimeSeriesPanel(
            values=self.values[start:stop],
            names=self.names,
            transform_log=self.transform_log,
        )


class LagDesign(BaseModel):
    """Paired (Y, X) regression matrices of a VAR(p).

    Row t of X is the concatenation over series b of (y[t-1,b], ..., y[t-p,b]),
    so series b occupies columns b*p .. b*p+p-1, most recent lag first.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    Y: np.ndarray
    X: np.ndarray
    p: int = Field(ge=1)
    names: Tuple[str, ...]

    @field_validator("Y", "X", mode="before")
    @classmethod
    def _matrices(cls, value, info):
        return frozen_array(value, 2, info.field_name)

    @model_validator(mode="after")
    def _check(self):
        n_rows, n_series = self.Y.shape
        if self.X.shape != (n_rows, n_series * self.p):
            raise ValueError(
                f"X has shape {self.X.shape}, expected {(n_rows, n_series * self.p)}"
            )
        if len(self.names) != n_series:
            raise ValueError("names do not match the number of series")
        return self

    @property
    def n_rows(self) -> int:
        return self.Y.shape[0]

    @property
    def n_series(self) -> int:
        return self.Y.shape[1]

    @property
    def block_index(self) -> Dict[int, range]:
        """Series b -> column range of its p-column block in X"""
        return {b: range(b * self.p, (b + 1) * self.p) for b in range(self.n_series)}

    def block(self, b: int) -> np.ndarray:
        return self.X[:, b * self.p:(b + 1) * self.p]

    def blocks(self) -> np.ndarray:
        """X viewed as (rows, series, lag)"""
        return self.X.reshape(self.n_rows, self.n_series, self.p)

    def take(self, rows) -> "LagDesign":
        """Sub-design on the given row indices"""
        rows = np.asarray(rows)
        return LagDesign(Y=self.Y[rows], X=self.X[rows], p=self.p, names=self.names)
