"""
MultiCluster-VAR

The structural matrix A = DG is factored into a dictionary D (K x r, columns on
the kappa-simplex, one leading-indicator prototype per cluster) and weights G
(r x K, columns on the unit simplex, soft task-to-cluster assignments).
Each outer iteration updates V, then G, then D.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from clustervar.core.errors import DataError
from clustervar.models.options import OuterOptions, PgdOptions
from clustervar.models.panel import LagDesign
from clustervar.models.var import McvarInit, McvarState, VarModel
from clustervar.services.alternating import (
    assemble_w,
    block_products,
    dictionary_quadratic,
    gamma_from_a,
    own_residuals,
    penalized_objective,
    relative_change,
    solve_v,
    task_grams,
    task_matrices,
)
from clustervar.services.scvar import IterationCallback, _check_hyperparameters, fit_scvar
from clustervar.services.solvers import pgd_quadratic, project_simplex_columns

logger = logging.getLogger(__name__)


def uniform_init(n_series: int, r: int, kappa: float) -> Tuple[np.ndarray, np.ndarray]:
    """d_ij = kappa/K and g_ij = 1/r"""
    return np.full((n_series, r), kappa / n_series), np.full((r, n_series), 1.0 / r)


def init_from_scvar(alpha_bar: np.ndarray, n_series: int, r: int, spread: float = 0.5) -> Tuple[np.ndarray, np.ndarray]:
    """Every atom equals alpha_bar; task k leans by ``spread`` toward atom k mod r.

    DG = alpha_bar 1' regardless of G, so the fit starts at the single-cluster solution.
    """
    if not 0.0 <= spread <= 1.0:
        raise DataError(f"spread must lie in [0, 1], got {spread}")
    alpha_bar = np.asarray(alpha_bar, dtype=float)
    D = np.tile(alpha_bar[:, None], (1, r))
    G = np.full((r, n_series), (1.0 - spread) / r)
    G[np.arange(n_series) % r, np.arange(n_series)] += spread
    return D, G


def profile_init(design: LagDesign, r: int, kappa: float, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """Atoms taken from the cross-series profiles of unrestricted per-task ridge fits.

    The profile of task k is its off-diagonal block-norm column rescaled to the
    kappa-simplex. Atoms are picked by farthest-point traversal starting from the
    profile farthest from the mean profile; G starts uniform.
    """
    n_series = design.n_series
    V = solve_v(design, np.ones((n_series, n_series)), lam)
    norms = assemble_w(np.ones((n_series, n_series)), V, design.p, design.names).block_norms()
    np.fill_diagonal(norms, 0.0)

    totals = norms.sum(axis=0)
    profiles = np.where(totals > 0, kappa * norms / np.where(totals > 0, totals, 1.0), kappa / n_series)

    chosen: List[int] = [int(np.argmax(np.linalg.norm(profiles - profiles.mean(axis=1, keepdims=True), axis=0)))]
    while len(chosen) < r:
        gaps = np.min(
            np.stack([np.linalg.norm(profiles - profiles[:, [j]], axis=0) for j in chosen]), axis=0
        )
        gaps[chosen] = -1.0
        chosen.append(int(np.argmax(gaps)))

    D = project_simplex_columns(profiles[:, chosen], kappa)
    return D, np.full((r, n_series), 1.0 / r)


def weights_step(
    P: np.ndarray, q: np.ndarray, s: np.ndarray, D: np.ndarray, G: np.ndarray, opts: PgdOptions
) -> np.ndarray:
    """Each g_k minimises ||r_k - H_k D g||^2 on the unit simplex"""
    r = D.shape[1]
    G_new = np.empty_like(G)
    for k in range(G.shape[1]):
        Q = D.T @ P[k] @ D
        c = D.T @ q[k]
        G_new[:, k] = pgd_quadratic(Q, c, float(s[k]), 1.0, G[:, k], opts).x if r > 1 else 1.0
    return G_new


def dictionary_step(
    P: np.ndarray, q: np.ndarray, s: np.ndarray, D: np.ndarray, G: np.ndarray, kappa: float, opts: PgdOptions
) -> np.ndarray:
    """Joint projected gradient on vec(D) with one kappa-simplex per column"""
    n_series, r = D.shape
    Q, c, const = dictionary_quadratic(P, q, s, G)
    x = pgd_quadratic(Q, c, const, kappa, D.reshape(-1, order="F"), opts, n_blocks=r).x
    return x.reshape((n_series, r), order="F")


def fit_mcvar(
    design: LagDesign,
    lam: float,
    kappa: float,
    r: int,
    opts: Optional[PgdOptions] = None,
    outer: Optional[OuterOptions] = None,
    D_init: Optional[np.ndarray] = None,
    G_init: Optional[np.ndarray] = None,
    update_weights: bool = True,
    callback: Optional[IterationCallback] = None,
) -> Tuple[McvarState, VarModel]:
    """Alternating minimisation over V, G and D.

    Starts from the uniform dictionary unless ``D_init``/``G_init`` are given.
    With ``update_weights=False`` G stays at its initial value, which with one-hot
    columns fits one structural vector per known cluster.
    """
    _check_hyperparameters(lam, kappa)
    n_series = design.n_series
    if not 1 <= r <= n_series:
        raise DataError(f"rank r must lie in [1, {n_series}], got {r}")
    opts = opts or PgdOptions()
    outer = outer or OuterOptions()

    D, G = uniform_init(n_series, r, kappa)
    if D_init is not None:
        D = np.asarray(D_init, dtype=float)
        if D.shape != (n_series, r):
            raise DataError(f"D_init has shape {D.shape}, expected {(n_series, r)}")
        D = project_simplex_columns(D, kappa)
    if G_init is not None:
        G = np.asarray(G_init, dtype=float)
        if G.shape != (r, n_series):
            raise DataError(f"G_init has shape {G.shape}, expected {(r, n_series)}")
        G = project_simplex_columns(G, 1.0)

    logger.info(
        f"Fitting MCVAR: K={n_series}, p={design.p}, rows={design.n_rows}, r={r}, lambda={lam:g}, kappa={kappa:g}"
    )

    trace: List[float] = []
    converged = False
    V = np.zeros((n_series * design.p, n_series))
    Gamma = gamma_from_a(D @ G)
    for it in range(1, outer.max_iter + 1):
        V = solve_v(design, Gamma, lam)

        H = block_products(design, V)
        P, q, s = task_grams(task_matrices(H), own_residuals(design, H))
        if update_weights and r > 1:
            G = weights_step(P, q, s, D, G, opts)
        D = dictionary_step(P, q, s, D, G, kappa, opts)
        Gamma = gamma_from_a(D @ G)

        trace.append(penalized_objective(design, Gamma, V, lam))
        logger.debug(f"MCVAR iteration {it}: objective={trace[-1]:.10g}")
        if callback is not None:
            callback(it, assemble_w(Gamma, V, design.p, design.names).W)

        if len(trace) > 1 and relative_change(trace[-2], trace[-1]) < outer.tol:
            converged = True
            break
        if trace[-1] == 0.0:
            converged = True
            break

    if not converged:
        logger.warning(f"MCVAR stopped at max_iter={outer.max_iter} before converging")
    logger.info(f"MCVAR finished after {len(trace)} iterations, objective={trace[-1]:.6g}")

    state = McvarState(
        D=D,
        G=G,
        V=V,
        Gamma=Gamma,
        r=r,
        kappa=kappa,
        lam=lam,
        objective_trace=tuple(trace),
        n_iter=len(trace),
        converged=converged,
    )
    return state, assemble_w(Gamma, V, design.p, design.names)


def fit_mcvar_from(
    design: LagDesign,
    lam: float,
    kappa: float,
    r: int,
    init: McvarInit = McvarInit.UNIFORM,
    spread: float = 0.5,
    opts: Optional[PgdOptions] = None,
    outer: Optional[OuterOptions] = None,
) -> Tuple[McvarState, VarModel]:
    """fit_mcvar with one of the named starting points"""
    init = McvarInit(init)
    if init == McvarInit.UNIFORM or r == 1:
        return fit_mcvar(design, lam, kappa, r, opts, outer)
    if init == McvarInit.PROFILE:
        D0, G0 = profile_init(design, r, kappa, lam)
    else:
        scvar_state, _ = fit_scvar(design, lam, kappa, opts, outer)
        D0, G0 = init_from_scvar(scvar_state.alpha_bar, design.n_series, r, spread)
    return fit_mcvar(design, lam, kappa, r, opts, outer, D_init=D0, G_init=G0)


def cluster_assignments(G: np.ndarray) -> np.ndarray:
    """Hard labels 1..r read off the weights; ties go to the lowest row"""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise DataError("G must be a matrix")
    return np.argmax(G, axis=0) + 1
