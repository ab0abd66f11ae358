"""
Method registry: one entry point that fits any forecasting method from a hyperparameter point
"""

import itertools
import logging
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from clustervar.core.errors import DataError
from clustervar.models.experiment import Grid, MethodName
from clustervar.models.options import OuterOptions, PgdOptions
from clustervar.models.panel import LagDesign
from clustervar.models.var import BaselineKind, BaselineModel, McvarInit, McvarState, ScvarState, VarModel
from clustervar.services.baselines import fit_baseline
from clustervar.services.mcvar import fit_mcvar, fit_mcvar_from
from clustervar.services.scvar import fit_scvar

logger = logging.getLogger(__name__)

REQUIRED = {
    MethodName.SCVAR: ("lam", "kappa"),
    MethodName.MCVAR: ("lam", "kappa", "r"),
    MethodName.AR: ("lam",),
    MethodName.LG: ("lam",),
    MethodName.GLG: ("lam",),
    MethodName.MEAN: (),
    MethodName.RW: (),
}


class FittedModel(BaseModel):
    """A fitted forecaster with its structural state and the hyperparameters used"""
    model_config = ConfigDict(frozen=True)

    method: MethodName
    model: Union[VarModel, BaselineModel]
    state: Optional[Union[ScvarState, McvarState]] = None
    hyperparameters: Dict[str, Any] = Field(default_factory=dict)

    @property
    def var_model(self) -> Optional[VarModel]:
        if isinstance(self.model, BaselineModel):
            return self.model.as_var_model()
        return self.model


def _require(method: MethodName, point: Dict[str, Any]) -> Dict[str, Any]:
    missing = [name for name in REQUIRED[method] if point.get(name) is None]
    if missing:
        raise DataError(f"{method.value} needs hyperparameters {missing}")
    return {name: point[name] for name in REQUIRED[method]}


def fit_method(
    method: MethodName,
    design: LagDesign,
    point: Optional[Dict[str, Any]] = None,
    opts: Optional[PgdOptions] = None,
    outer: Optional[OuterOptions] = None,
    mcvar_init: McvarInit = McvarInit.PROFILE,
    warm: Optional[FittedModel] = None,
) -> FittedModel:
    """Fit ``method`` on ``design`` at the hyperparameter ``point``.

    ``warm`` is a fit of the same method at a neighbouring point (same kappa and r);
    its structure or coefficients become the starting point.
    """
    method = MethodName(method)
    point = _require(method, point or {})
    if warm is not None and warm.method != method:
        raise DataError(f"cannot warm-start {method.value} from a {warm.method.value} fit")

    if method == MethodName.SCVAR:
        alpha_init = None
        if warm is not None:
            alpha_init = warm.state.alpha_bar * (point["kappa"] / warm.state.kappa)
        state, model = fit_scvar(design, point["lam"], point["kappa"], opts, outer, alpha_init=alpha_init)
        return FittedModel(method=method, model=model, state=state, hyperparameters=point)
    if method == MethodName.MCVAR:
        r = int(point["r"])
        if warm is not None and warm.state.r == r:
            state, model = fit_mcvar(
                design, point["lam"], point["kappa"], r, opts, outer,
                D_init=warm.state.D * (point["kappa"] / warm.state.kappa), G_init=warm.state.G,
            )
        else:
            state, model = fit_mcvar_from(
                design, point["lam"], point["kappa"], r, init=mcvar_init, opts=opts, outer=outer
            )
        return FittedModel(method=method, model=model, state=state, hyperparameters=point)

    W_init = warm.model.W if warm is not None and method in (MethodName.LG, MethodName.GLG) else None
    model = fit_baseline(BaselineKind(method.value), design, point, W_init)
    return FittedModel(method=method, model=model, hyperparameters=point)


def grid_points(method: MethodName, grid: Grid, n_series: int) -> List[Dict[str, Any]]:
    """Hyperparameter points the method is tuned over"""
    method = MethodName(method)
    if method == MethodName.SCVAR:
        return [{"lam": lam, "kappa": kappa} for lam, kappa in itertools.product(grid.lambda_values, grid.kappa_values)]
    if method == MethodName.MCVAR:
        return [
            {"lam": lam, "kappa": kappa, "r": r}
            for lam, kappa, r in itertools.product(grid.lambda_values, grid.kappa_values, grid.ranks_for(n_series))
        ]
    if method in (MethodName.AR, MethodName.LG, MethodName.GLG):
        return [{"lam": lam} for lam in grid.lambda_values]
    return [{}]
