"""
Synthetic scenario models
"""

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from clustervar.core.config import settings
from clustervar.models.panel import frozen_array


class ScenarioId(str, Enum):
    """Synthetic structures"""
    A = "A"  # one cluster, shared leading indicators
    B = "B"  # two clusters
    C = "C"  # diagonal only
    D = "D"  # fully connected
    E = "E"  # K=30, three clusters, one weak


class ClusterSpec(BaseModel):
    """Series of one cluster (0-based) and the leading indicators driving them"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    members: List[int]
    leading: List[int] = Field(default_factory=list)
    weak: bool = False


class ScenarioSpec(BaseModel):
    """Ground-truth structure of a simulated VAR"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: ScenarioId
    K: int = Field(ge=1)
    p: int = Field(default=3, ge=1)
    clusters: List[ClusterSpec]
    target_spectral_radius: float = Field(default=settings.TARGET_SPECTRAL_RADIUS, gt=0, lt=1)
    seed: int = 0
    coef_low: float = Field(default=0.2, gt=0)
    coef_high: float = Field(default=0.6, gt=0)

    @model_validator(mode="after")
    def _check(self):
        if not self.clusters:
            raise ValueError("scenario needs at least one cluster")
        members = []
        for cluster in self.clusters:
            if not cluster.members:
                raise ValueError("clusters must not be empty")
            members.extend(cluster.members)
            if any(not 0 <= b < self.K for b in cluster.leading):
                raise ValueError(f"leading indicators must lie in [0, {self.K - 1}]")
        if sorted(members) != list(range(self.K)):
            raise ValueError(f"clusters must partition the {self.K} series")
        if self.coef_low >= self.coef_high:
            raise ValueError("coef_low must be below coef_high")
        return self

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def labels(self) -> np.ndarray:
        """Cluster label (1-based) of every series"""
        labels = np.zeros(self.K, dtype=int)
        for c, cluster in enumerate(self.clusters):
            labels[cluster.members] = c + 1
        return labels


class SimulationConfig(BaseModel):
    """Length, burn-in and Gaussian noise of one simulated panel"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    T: int = Field(ge=1)
    burn_in: int = Field(default=settings.BURN_IN, ge=100)
    noise_cov: Optional[np.ndarray] = None
    seed: int = 0

    @field_validator("noise_cov", mode="before")
    @classmethod
    def _cov(cls, value):
        if value is None:
            return None
        cov = frozen_array(value, 2, "noise_cov")
        if cov.shape[0] != cov.shape[1]:
            raise ValueError("noise_cov must be a square matrix")
        if np.any(cov[~np.eye(cov.shape[0], dtype=bool)] != 0):
            raise ValueError("noise_cov must be diagonal")
        if np.any(np.diag(cov) <= 0):
            raise ValueError("noise_cov must have a positive diagonal")
        return cov

    @field_serializer("noise_cov")
    def _dump_cov(self, value: Optional[np.ndarray]):
        return None if value is None else value.tolist()

    def covariance(self, n_series: int) -> np.ndarray:
        if self.noise_cov is None:
            return np.eye(n_series)
        if self.noise_cov.shape != (n_series, n_series):
            raise ValueError(f"noise_cov is {self.noise_cov.shape}, model has {n_series} series")
        return np.array(self.noise_cov)


def default_scenario(scenario_id: ScenarioId, seed: int = 0, p: int = 3) -> ScenarioSpec:
    """The five reference structures; indices are 0-based"""
    scenario_id = ScenarioId(scenario_id)
    if scenario_id == ScenarioId.A:
        clusters = [ClusterSpec(members=list(range(10)), leading=[1, 4])]
        K = 10
    elif scenario_id == ScenarioId.B:
        clusters = [
            ClusterSpec(members=list(range(5)), leading=[1, 3]),
            ClusterSpec(members=list(range(5, 10)), leading=[6, 8]),
        ]
        K = 10
    elif scenario_id == ScenarioId.C:
        clusters = [ClusterSpec(members=list(range(10)))]
        K = 10
    elif scenario_id == ScenarioId.D:
        clusters = [ClusterSpec(members=list(range(10)), leading=list(range(10)))]
        K = 10
    else:
        clusters = [
            ClusterSpec(members=list(range(10)), leading=[0, 5]),
            ClusterSpec(members=list(range(10, 20)), leading=[12, 17]),
            ClusterSpec(members=list(range(20, 30)), leading=[24], weak=True),
        ]
        K = 30
    return ScenarioSpec(id=scenario_id, K=K, p=p, clusters=clusters, seed=seed)
