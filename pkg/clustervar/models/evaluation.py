"""
Evaluation models: Granger graphs and forecast reports
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator


def _dot_id(text: str) -> str:
    """Double-quoted DOT identifier"""
    escaped = str(text).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


class SignificanceFlag(str, Enum):
    """Outcome of a one-sided paired comparison"""
    BETTER = "+"
    WORSE = "-"
    EQUAL = "="


class GraphStats(BaseModel):
    """Edge and leading-indicator counts of a Granger graph"""
    model_config = ConfigDict(frozen=True)

    n_edges: int = Field(ge=0)
    n_leading: int = Field(ge=0)
    out_degree: Tuple[int, ...] = ()


class GrangerGraph(BaseModel):
    """Directed graph over series; adjacency[l, k] is the edge l -> k. Self-loops are dropped."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    adjacency: np.ndarray
    names: Tuple[str, ...]

    @field_validator("adjacency", mode="before")
    @classmethod
    def _adjacency(cls, value):
        adjacency = np.array(value, dtype=bool)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adjacency.shape}")
        np.fill_diagonal(adjacency, False)
        adjacency.flags.writeable = False
        return adjacency

    @model_validator(mode="after")
    def _check(self):
        if len(self.names) != self.adjacency.shape[0]:
            raise ValueError("names do not match the adjacency size")
        return self

    @field_serializer("adjacency")
    def _dump(self, adjacency: np.ndarray):
        return adjacency.astype(int).tolist()

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum())

    def edges(self) -> List[Tuple[str, str]]:
        sources, targets = np.nonzero(self.adjacency)
        return [(self.names[l], self.names[k]) for l, k in zip(sources, targets)]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "nodes": list(self.names),
            "edges": [{"source": source, "target": target} for source, target in self.edges()],
            "adjacency": self.adjacency.astype(int).tolist(),
        }

    def to_dot(self, name: str = "granger") -> str:
        lines = [f"digraph {_dot_id(name)} {{"]
        lines.extend(f"  {_dot_id(node)};" for node in self.names)
        lines.extend(f"  {_dot_id(source)} -> {_dot_id(target)};" for source, target in self.edges())
        lines.append("}")
        return "\n".join(lines) + "\n"


class EvalReport(BaseModel):
    """Holdout forecast accuracy and recovered structure of one model"""
    model_config = ConfigDict(frozen=True)

    method: str
    names: Tuple[str, ...]
    n_holdout: int = Field(ge=1)
    per_series_mse: List[float]
    mse: float = Field(ge=0)
    reference_mse: Optional[float] = None
    relative_mse: Optional[float] = None
    granger_accuracy: Optional[float] = Field(default=None, ge=0, le=1)
    n_edges: int = Field(default=0, ge=0)
    n_leading: int = Field(default=0, ge=0)
    out_degree: List[int] = Field(default_factory=list)
    significance: Dict[str, SignificanceFlag] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self):
        n_series = len(self.names)
        if len(self.per_series_mse) != n_series:
            raise ValueError("per_series_mse must have one entry per series")
        if self.n_edges > n_series * (n_series - 1):
            raise ValueError("more edges than ordered pairs of series")
        return self


class CvRow(BaseModel):
    """Validation MSE of one grid point"""
    model_config = ConfigDict(frozen=True)

    lam: Optional[float] = None
    kappa: Optional[float] = None
    r: Optional[int] = None
    fold_mse: List[float]
    mean_mse: float

    def point(self) -> Dict[str, Any]:
        return {key: value for key, value in (("lam", self.lam), ("kappa", self.kappa), ("r", self.r)) if value is not None}


class CvResult(BaseModel):
    """Selected hyperparameters and the full cross-validation table"""
    model_config = ConfigDict(frozen=True)

    method: str
    folds: int = Field(ge=2)
    best: Dict[str, Any]
    table: List[CvRow]
