"""
VAR parameter and fitted-state models
"""

from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from clustervar.models.panel import frozen_array

SIMPLEX_TOL = 1e-8


class VarModel(BaseModel):
    """Kp x K parameter matrix W of a VAR(p); column k predicts series k"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    W: np.ndarray
    p: int = Field(ge=1)
    names: Tuple[str, ...]

    @field_validator("W", mode="before")
    @classmethod
    def _w(cls, value):
        return frozen_array(value, 2, "W")

    @model_validator(mode="after")
    def _check(self):
        n_series = len(self.names)
        if self.W.shape != (n_series * self.p, n_series):
            raise ValueError(f"W has shape {self.W.shape}, expected {(n_series * self.p, n_series)}")
        return self

    @field_serializer("W")
    def _dump_w(self, W: np.ndarray):
        return W.tolist()

    @property
    def n_series(self) -> int:
        return len(self.names)

    def block(self, b: int, k: int) -> np.ndarray:
        """Weights of input series b in the model of series k"""
        return self.W[b * self.p:(b + 1) * self.p, k]

    def block_norms(self) -> np.ndarray:
        """K x K matrix of L2 norms of the (b, k) blocks"""
        blocks = self.W.reshape(self.n_series, self.p, self.n_series)
        return np.sqrt(np.sum(blocks ** 2, axis=1))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.W


def _check_simplex_columns(matrix: np.ndarray, total: float, label: str):
    if np.any(matrix < -SIMPLEX_TOL):
        raise ValueError(f"{label} has negative entries")
    sums = matrix.sum(axis=0)
    if np.any(np.abs(sums - total) > SIMPLEX_TOL * max(1.0, total)):
        raise ValueError(f"{label} columns must sum to {total}, got {sums}")


class ScvarState(BaseModel):
    """Structural parameters of a SingleCluster-VAR fit"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha_bar: np.ndarray
    V: np.ndarray
    Gamma: np.ndarray
    tau: float = 1.0
    kappa: float = Field(gt=0)
    lam: float = Field(gt=0)
    objective_trace: Tuple[float, ...] = ()
    n_iter: int = 0
    converged: bool = False

    @field_validator("alpha_bar", mode="before")
    @classmethod
    def _alpha(cls, value):
        return frozen_array(value, 1, "alpha_bar")

    @field_validator("V", "Gamma", mode="before")
    @classmethod
    def _matrices(cls, value, info):
        return frozen_array(value, 2, info.field_name)

    @model_validator(mode="after")
    def _check(self):
        _check_simplex_columns(self.alpha_bar[:, None], self.kappa, "alpha_bar")
        if not np.all(np.diag(self.Gamma) == self.tau):
            raise ValueError("diag(Gamma) must equal tau")
        return self

    @field_serializer("alpha_bar", "V", "Gamma")
    def _dump(self, value: np.ndarray):
        return value.tolist()


class McvarState(BaseModel):
    """Dictionary D (K x r), weights G (r x K) and raw weights of a MultiCluster-VAR fit"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    D: np.ndarray
    G: np.ndarray
    V: np.ndarray
    Gamma: np.ndarray
    r: int = Field(ge=1)
    kappa: float = Field(gt=0)
    lam: float = Field(gt=0)
    objective_trace: Tuple[float, ...] = ()
    n_iter: int = 0
    converged: bool = False

    @field_validator("D", "G", "V", "Gamma", mode="before")
    @classmethod
    def _matrices(cls, value, info):
        return frozen_array(value, 2, info.field_name)

    @model_validator(mode="after")
    def _check(self):
        n_series = self.Gamma.shape[0]
        if self.D.shape != (n_series, self.r) or self.G.shape != (self.r, n_series):
            raise ValueError("D must be K x r and G must be r x K")
        _check_simplex_columns(self.D, self.kappa, "D")
        _check_simplex_columns(self.G, 1.0, "G")
        if not np.all(np.diag(self.Gamma) == 1.0):
            raise ValueError("diag(Gamma) must equal 1")
        return self

    @field_serializer("D", "G", "V", "Gamma")
    def _dump(self, value: np.ndarray):
        return value.tolist()

    @property
    def A(self) -> np.ndarray:
        return self.D @ self.G


class McvarInit(str, Enum):
    """Starting points for D and G"""
    UNIFORM = "uniform"
    PROFILE = "profile"
    SCVAR = "scvar"


class BaselineKind(str, Enum):
    """Reference forecasters"""
    MEAN = "mean"
    RW = "rw"
    AR = "ar"
    LG = "lg"
    GLG = "glg"


class BaselineModel(BaseModel):
    """Fitted reference forecaster; mean and rw carry no W"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: BaselineKind
    p: int = Field(ge=1)
    names: Tuple[str, ...]
    W: Optional[np.ndarray] = None
    means: Optional[np.ndarray] = None
    hyperparameters: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("W", mode="before")
    @classmethod
    def _w(cls, value):
        return None if value is None else frozen_array(value, 2, "W")

    @field_validator("means", mode="before")
    @classmethod
    def _means(cls, value):
        return None if value is None else frozen_array(value, 1, "means")

    @model_validator(mode="after")
    def _check(self):
        n_series = len(self.names)
        if self.kind in (BaselineKind.AR, BaselineKind.LG, BaselineKind.GLG):
            if self.W is None or self.W.shape != (n_series * self.p, n_series):
                raise ValueError(f"{self.kind.value} needs a {(n_series * self.p, n_series)} W")
        elif self.W is not None:
            raise ValueError(f"{self.kind.value} stores no W")
        if self.kind == BaselineKind.MEAN and (self.means is None or self.means.shape != (n_series,)):
            raise ValueError("mean model needs one mean per series")
        if self.kind == BaselineKind.AR:
            blocks = self.W.reshape(n_series, self.p, n_series)
            off_diagonal = ~np.eye(n_series, dtype=bool)
            if np.any(np.transpose(blocks, (0, 2, 1))[off_diagonal] != 0):
                raise ValueError("ar weights must be confined to the diagonal blocks")
        return self

    @field_serializer("W", "means")
    def _dump(self, value: Optional[np.ndarray]):
        return None if value is None else value.tolist()

    @property
    def n_series(self) -> int:
        return len(self.names)

    @property
    def required_context(self) -> int:
        """Number of past observations a one-step forecast needs"""
        return {BaselineKind.MEAN: 0, BaselineKind.RW: 1}.get(self.kind, self.p)

    def as_var_model(self) -> Optional[VarModel]:
        if self.W is None:
            return None
        return VarModel(W=self.W, p=self.p, names=self.names)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == BaselineKind.MEAN:
            return np.tile(self.means, (X.shape[0], 1))
        if self.kind == BaselineKind.RW:
            # lag-1 value of every series sits first in its block
            return X[:, ::self.p].copy()
        return X @ self.W
