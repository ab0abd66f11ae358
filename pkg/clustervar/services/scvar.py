"""
SingleCluster-VAR

One structural vector alpha_bar, shared by every task, gates the cross-series
lag blocks. The fit alternates a ridge step for the raw weights V and a
simplex-constrained least squares step for alpha_bar.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from clustervar.core.errors import DataError
from clustervar.models.options import OuterOptions, PgdOptions
from clustervar.models.panel import LagDesign
from clustervar.models.var import ScvarState, VarModel
from clustervar.services.alternating import (
    assemble_w,
    block_products,
    dictionary_quadratic,
    gamma_from_alpha,
    own_residuals,
    penalized_objective,
    relative_change,
    solve_v,
    task_grams,
    task_matrices,
)
from clustervar.services.solvers import pgd_quadratic, project_simplex

logger = logging.getLogger(__name__)

TAU = 1.0

IterationCallback = Callable[[int, np.ndarray], None]


def _check_hyperparameters(lam: float, kappa: float):
    if not lam > 0:
        raise DataError(f"lambda must be positive, got {lam}")
    if not kappa > 0:
        raise DataError(f"kappa must be positive, got {kappa}")


def alpha_step(design: LagDesign, V: np.ndarray, alpha_bar: np.ndarray, kappa: float, opts: PgdOptions) -> np.ndarray:
    """Minimise the structured loss over alpha_bar on the kappa-simplex with V fixed"""
    H = block_products(design, V)
    P, q, s = task_grams(task_matrices(H), own_residuals(design, H))
    Q, c, const = dictionary_quadratic(P, q, s, np.ones((1, design.n_series)))
    return pgd_quadratic(Q, c, const, kappa, alpha_bar, opts).x


def fit_scvar(
    design: LagDesign,
    lam: float,
    kappa: float,
    opts: Optional[PgdOptions] = None,
    outer: Optional[OuterOptions] = None,
    alpha_init: Optional[np.ndarray] = None,
    callback: Optional[IterationCallback] = None,
) -> Tuple[ScvarState, VarModel]:
    """Alternating minimisation of ||Y - XW||^2 / rows + lam ||V||_F^2 with W built from (Gamma, V).

    alpha_bar starts at kappa/K unless ``alpha_init`` is given (projected if infeasible).
    ``callback(iteration, W)`` is called after every outer iteration.
    """
    _check_hyperparameters(lam, kappa)
    opts = opts or PgdOptions()
    outer = outer or OuterOptions()
    n_series = design.n_series

    if alpha_init is None:
        alpha_bar = np.full(n_series, kappa / n_series)
    else:
        alpha_bar = project_simplex(np.asarray(alpha_init, dtype=float), kappa)

    logger.info(f"Fitting SCVAR: K={n_series}, p={design.p}, rows={design.n_rows}, lambda={lam:g}, kappa={kappa:g}")

    trace: List[float] = []
    converged = False
    V = np.zeros((n_series * design.p, n_series))
    Gamma = gamma_from_alpha(alpha_bar, TAU)
    for it in range(1, outer.max_iter + 1):
        V = solve_v(design, Gamma, lam)
        alpha_bar = alpha_step(design, V, alpha_bar, kappa, opts)
        Gamma = gamma_from_alpha(alpha_bar, TAU)

        trace.append(penalized_objective(design, Gamma, V, lam))
        logger.debug(f"SCVAR iteration {it}: objective={trace[-1]:.10g}")
        if callback is not None:
            callback(it, assemble_w(Gamma, V, design.p, design.names).W)

        if len(trace) > 1 and relative_change(trace[-2], trace[-1]) < outer.tol:
            converged = True
            break
        if trace[-1] == 0.0:
            converged = True
            break

    if not converged:
        logger.warning(f"SCVAR stopped at max_iter={outer.max_iter} before converging")
    logger.info(f"SCVAR finished after {len(trace)} iterations, objective={trace[-1]:.6g}")

    state = ScvarState(
        alpha_bar=alpha_bar,
        V=V,
        Gamma=Gamma,
        tau=TAU,
        kappa=kappa,
        lam=lam,
        objective_trace=tuple(trace),
        n_iter=len(trace),
        converged=converged,
    )
    return state, assemble_w(Gamma, V, design.p, design.names)
