"""
Experiment configuration models, parsed from JSON config files
"""

from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from clustervar.core.config import settings
from clustervar.models.options import OuterOptions, PgdOptions
from clustervar.models.panel import TransformSpec
from clustervar.models.scenario import ScenarioId
from clustervar.models.var import McvarInit


class MethodName(str, Enum):
    """Forecasting methods"""
    SCVAR = "scvar"
    MCVAR = "mcvar"
    MEAN = "mean"
    RW = "rw"
    AR = "ar"
    LG = "lg"
    GLG = "glg"


# Competitors in the order significance strings are written
COMPETITORS = (MethodName.MEAN, MethodName.RW, MethodName.AR, MethodName.LG, MethodName.GLG)


class Frequency(str, Enum):
    """Sampling frequency used to check the date column for gaps"""
    DAILY = "daily"
    QUARTERLY = "quarterly"
    NONE = "none"


class SweepMode(str, Enum):
    SYNTHETIC = "synthetic"
    REAL = "real"


def _log_grid(low: float, high: float, n: int) -> List[float]:
    return np.logspace(np.log10(low), np.log10(high), n).tolist()


class Grid(BaseModel):
    """Hyperparameter grid; r_values=None means {1, 2, 3, ceil(K/4), K}"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda_values: List[float] = Field(default_factory=lambda: _log_grid(1e-4, 1.0, 10))
    kappa_values: List[float] = Field(default_factory=lambda: _log_grid(1e-2, 10.0, 4))
    r_values: Optional[List[int]] = None

    @field_validator("lambda_values", "kappa_values")
    @classmethod
    def _positive_sorted(cls, values: List[float]):
        if not values:
            raise ValueError("grid axes must not be empty")
        if any(v <= 0 for v in values):
            raise ValueError("grid values must be strictly positive")
        if list(values) != sorted(values):
            raise ValueError("grid values must be sorted ascending")
        return values

    @field_validator("r_values")
    @classmethod
    def _ranks(cls, values: Optional[List[int]]):
        if values is None:
            return None
        if not values or any(v < 1 for v in values) or list(values) != sorted(set(values)):
            raise ValueError("r_values must be distinct positive integers in ascending order")
        return values

    def ranks_for(self, n_series: int) -> List[int]:
        if self.r_values is not None:
            return [r for r in self.r_values if r <= n_series]
        return sorted({r for r in (1, 2, 3, -(-n_series // 4), n_series) if r <= n_series})


class CsvSchema(BaseModel):
    """Layout of an input CSV; series=None takes every column except the date"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    date_column: Optional[str] = "date"
    series: Optional[List[str]] = None
    delimiter: str = ","
    frequency: Frequency = Frequency.NONE


class Hyperparameters(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    lam: Optional[float] = Field(default=None, gt=0)
    kappa: Optional[float] = Field(default=None, gt=0)
    r: Optional[int] = Field(default=None, ge=1)


class DataSource(BaseModel):
    """A CSV panel plus its preprocessing"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    path: Path
    csv: CsvSchema = Field(default_factory=CsvSchema)
    transforms: List[TransformSpec] = Field(default_factory=list)
    transform_map: Dict[str, List[TransformSpec]] = Field(default_factory=dict)


class FitConfig(BaseModel):
    """``fit`` and ``cv-fit`` runs"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    method: MethodName
    p: int = Field(default=3, ge=1)
    data: DataSource
    n_holdout: Optional[int] = Field(default=None, ge=1)
    hyperparameters: Hyperparameters = Field(default_factory=Hyperparameters)
    grid: Grid = Field(default_factory=Grid)
    folds: int = Field(default=settings.CV_FOLDS, ge=2)
    mcvar_init: McvarInit = McvarInit.PROFILE
    pgd: PgdOptions = Field(default_factory=PgdOptions)
    outer: OuterOptions = Field(default_factory=OuterOptions)


class SimulateConfig(BaseModel):
    """``simulate`` runs"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioId
    seed: int = 0
    t_train: int = Field(default=100, ge=2)
    t_holdout: int = Field(default=500, ge=1)
    p: int = Field(default=3, ge=1)
    burn_in: int = Field(default=settings.BURN_IN, ge=100)
    target_spectral_radius: float = Field(default=settings.TARGET_SPECTRAL_RADIUS, gt=0, lt=1)


class SweepConfig(BaseModel):
    """Training-size sweep over methods, synthetic or on a CSV panel"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: SweepMode = SweepMode.SYNTHETIC
    scenario: Optional[ScenarioId] = None
    seeds: List[int] = Field(default_factory=lambda: [0])
    data: Optional[DataSource] = None
    sizes: List[int] = Field(default_factory=lambda: [30, 50, 75, 100, 200, 500])
    t_holdout: int = Field(default=500, ge=2)
    p: int = Field(default=3, ge=1)
    methods: List[MethodName] = Field(default_factory=lambda: list(MethodName))
    grid: Grid = Field(default_factory=Grid)
    folds: int = Field(default=settings.CV_FOLDS, ge=2)
    mcvar_init: McvarInit = McvarInit.PROFILE
    alpha: float = Field(default=settings.SIGNIFICANCE_ALPHA, gt=0, lt=1)
    edge_threshold: float = Field(default=settings.EDGE_THRESHOLD, ge=0)
    burn_in: int = Field(default=settings.BURN_IN, ge=100)
    n_jobs: int = Field(default=1, ge=1)
    pgd: PgdOptions = Field(default_factory=PgdOptions)
    outer: OuterOptions = Field(default_factory=OuterOptions)

    @model_validator(mode="after")
    def _check(self):
        if self.mode == SweepMode.SYNTHETIC and self.scenario is None:
            raise ValueError("synthetic sweeps need a scenario")
        if self.mode == SweepMode.REAL and self.data is None:
            raise ValueError("real-data sweeps need a data source")
        if not self.sizes or any(size <= self.p for size in self.sizes):
            raise ValueError(f"training sizes must exceed p={self.p}")
        if not self.methods or len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must be a non-empty list without duplicates")
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        return self

    @property
    def reference(self) -> str:
        """Denominator of the relative MSE"""
        return "true" if self.mode == SweepMode.SYNTHETIC else MethodName.RW.value
