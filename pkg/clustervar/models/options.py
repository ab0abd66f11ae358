"""
Solver option models
"""

from pydantic import BaseModel, ConfigDict, Field

from clustervar.core.config import settings


class PgdOptions(BaseModel):
    """Projected gradient descent with backtracking"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    max_iter: int = Field(default=settings.PGD_MAX_ITER, ge=1)
    tol: float = Field(default=settings.PGD_TOL, gt=0)
    beta: float = Field(default=settings.PGD_BETA, gt=0, lt=1)
    armijo: float = Field(default=settings.PGD_ARMIJO, gt=0, lt=1)
    step_init: float = Field(default=settings.PGD_STEP_INIT, gt=0)


class OuterOptions(BaseModel):
    """Alternating minimisation budget"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    max_iter: int = Field(default=settings.OUTER_MAX_ITER, ge=1)
    tol: float = Field(default=settings.OUTER_TOL, gt=0)
