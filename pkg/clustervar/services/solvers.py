"""
Convex subproblem solvers shared by the fitting algorithms.

Conventions:
    ridge        ||y - Zw||^2 + lam ||w||^2
    simplex LS   ||r - Hx||^2  s.t. x >= 0, sum(x) = kappa
    lasso        1/2 ||y - Xw||^2 + lam ||w||_1
    group lasso  1/2 ||y - Xw||^2 + lam sum_g ||w_g||_2
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg, optimize

from clustervar.core.errors import DataError, NumericalError
from clustervar.models.options import PgdOptions

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-12
MAX_BACKTRACKS = 100


@dataclass
class PgdResult:
    """Outcome of a projected gradient run"""
    x: np.ndarray
    objective: float
    n_iter: int
    converged: bool


# ---------------------------------------------------------------- simplex

def project_simplex(v: np.ndarray, kappa: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = kappa} by sort and threshold"""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DataError("simplex projection needs a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise DataError("simplex projection got non-finite entries")
    if not kappa > 0:
        raise DataError(f"simplex radius must be positive, got {kappa}")

    u = np.sort(v)[::-1]
    excess = np.cumsum(u) - kappa
    ranks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - excess / ranks > 0)[0][-1]
    theta = excess[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_simplex_columns(M: np.ndarray, kappa: float = 1.0) -> np.ndarray:
    """Project every column of M onto the kappa-simplex"""
    M = np.asarray(M, dtype=float)
    return np.column_stack([project_simplex(M[:, j], kappa) for j in range(M.shape[1])])


def on_simplex(x: np.ndarray, kappa: float, tol: float = FEASIBILITY_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= 0) and abs(x.sum() - kappa) <= tol * max(1.0, kappa))


# ---------------------------------------------------------------- ridge

def ridge_solve(Z: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Minimiser of ||y - Zw||^2 + lam ||w||^2 through a Cholesky factorisation"""
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise DataError(f"ridge penalty must be nonnegative, got {lam}")
    gram = Z.T @ Z
    gram[np.diag_indices_from(gram)] += lam
    try:
        factor = linalg.cho_factor(gram, lower=True, check_finite=True)
    except linalg.LinAlgError as e:
        raise NumericalError(f"ridge system is singular (lam={lam}): {e}") from e
    except ValueError as e:
        raise NumericalError(f"ridge system has non-finite entries: {e}") from e
    return linalg.cho_solve(factor, Z.T @ y)


# ---------------------------------------------------------------- projected gradient

def simplex_ls_objective(H: np.ndarray, r: np.ndarray, x: np.ndarray) -> float:
    residual = r - H @ x
    return float(residual @ residual)


def simplex_ls_gradient(H: np.ndarray, r: np.ndarray, x: np.ndarray) -> np.ndarray:
    return -2.0 * H.T @ (r - H @ x)


def pgd_quadratic(
    Q: np.ndarray,
    c: np.ndarray,
    const: float,
    kappa: float,
    x0: np.ndarray,
    opts: Optional[PgdOptions] = None,
    n_blocks: int = 1,
) -> PgdResult:
    """Minimise x'Qx - 2c'x + const over a product of ``n_blocks`` kappa-simplices.

    x is split into ``n_blocks`` consecutive equal blocks, each projected
    independently (the exact projection onto the product set). Steps follow the
    Armijo rule along the projection arc, f(x+) <= f(x) + armijo * g'(x+ - x),
    shrinking the step by ``beta`` until it holds.
    """
    opts = opts or PgdOptions()
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    if x.size % n_blocks:
        raise DataError(f"{x.size} variables do not split into {n_blocks} blocks")
    size = x.size // n_blocks

    def project(z: np.ndarray) -> np.ndarray:
        if n_blocks == 1:
            return project_simplex(z, kappa)
        return np.concatenate([project_simplex(z[j * size:(j + 1) * size], kappa) for j in range(n_blocks)])

    def objective(z: np.ndarray) -> float:
        return float(z @ Q @ z - 2.0 * c @ z + const)

    if not all(on_simplex(x[j * size:(j + 1) * size], kappa) for j in range(n_blocks)):
        x = project(x)

    f = objective(x)
    if not np.isfinite(f):
        raise NumericalError("simplex least squares objective is not finite")

    step = opts.step_init
    for it in range(1, opts.max_iter + 1):
        grad = 2.0 * (Q @ x - c)
        if not np.any(grad):
            return PgdResult(x=x, objective=f, n_iter=it - 1, converged=True)

        for _ in range(MAX_BACKTRACKS):
            candidate = project(x - step * grad)
            move = candidate - x
            f_new = objective(candidate)
            if f_new <= f + opts.armijo * float(grad @ move):
                break
            step *= opts.beta
        else:
            # no admissible step: x is stationary up to rounding
            return PgdResult(x=x, objective=f, n_iter=it, converged=True)

        change = f - f_new
        x, f = candidate, f_new
        if not np.any(move) or abs(change) <= opts.tol * max(abs(f), np.finfo(float).tiny):
            return PgdResult(x=x, objective=f, n_iter=it, converged=True)

    logger.warning(f"Projected gradient stopped at max_iter={opts.max_iter} before converging")
    return PgdResult(x=x, objective=f, n_iter=opts.max_iter, converged=False)


def pgd_simplex_ls(
    H: np.ndarray,
    r: np.ndarray,
    kappa: float,
    x0: np.ndarray,
    opts: Optional[PgdOptions] = None,
) -> PgdResult:
    """Minimise ||r - Hx||^2 over the kappa-simplex by projected gradient descent"""
    H = np.asarray(H, dtype=float)
    r = np.asarray(r, dtype=float)
    return pgd_quadratic(H.T @ H, H.T @ r, float(r @ r), kappa, x0, opts)


# ---------------------------------------------------------------- lasso

def _start(w_init: Optional[np.ndarray], n_features: int) -> np.ndarray:
    if w_init is None:
        return np.zeros(n_features)
    w = np.array(w_init, dtype=float)
    if w.shape != (n_features,):
        raise DataError(f"w_init has shape {w.shape}, expected {(n_features,)}")
    return w


def soft_threshold(a, b):
    return np.sign(a) * np.fmax(np.abs(a) - b, 0)


def lasso_kkt_violation(X: np.ndarray, y: np.ndarray, w: np.ndarray, lam: float) -> float:
    """Largest violation of the lasso optimality conditions"""
    corr = X.T @ (y - X @ w)
    zero = w == 0
    violation = np.where(zero, np.fmax(np.abs(corr) - lam, 0.0), np.abs(corr - lam * np.sign(w)))
    return float(violation.max()) if violation.size else 0.0


def lasso_cd(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    max_iter: int = 10000,
    tol: float = 1e-8,
    w_init: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Cyclic coordinate descent for 1/2 ||y - Xw||^2 + lam ||w||_1, stopped on the KKT violation"""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise DataError(f"lasso penalty must be nonnegative, got {lam}")
    n_features = X.shape[1]
    col_sq = np.sum(X ** 2, axis=0)
    active = np.nonzero(col_sq > 0)[0]

    w = _start(w_init, n_features)
    w[col_sq == 0] = 0.0
    residual = y - X @ w
    for _ in range(max_iter):
        for j in active:
            old = w[j]
            rho = X[:, j] @ residual + col_sq[j] * old
            w[j] = soft_threshold(rho, lam) / col_sq[j]
            if w[j] != old:
                residual -= X[:, j] * (w[j] - old)
        if lasso_kkt_violation(X, y, w, lam) <= tol:
            break
    else:
        logger.warning(f"Lasso coordinate descent hit max_iter={max_iter}")
    return w


# ---------------------------------------------------------------- group lasso

def _as_groups(groups, n_features: int) -> List[np.ndarray]:
    """Accept either a list of index arrays or one label per column"""
    if len(groups) == n_features and np.ndim(groups[0]) == 0:
        labels = np.asarray(groups)
        index_sets = [np.nonzero(labels == g)[0] for g in np.unique(labels)]
    else:
        index_sets = [np.asarray(g, dtype=int) for g in groups]
    for g in index_sets:
        if g.size == 0:
            raise DataError("group lasso got an empty group")
    covered = np.sort(np.concatenate(index_sets))
    if not np.array_equal(covered, np.arange(n_features)):
        raise DataError("groups must partition the columns")
    return index_sets


def group_lasso_kkt_violation(X, y, w, lam, groups) -> float:
    """Largest violation of the block optimality conditions"""
    X = np.asarray(X, dtype=float)
    corr = X.T @ (np.asarray(y, dtype=float) - X @ w)
    worst = 0.0
    for g in _as_groups(groups, X.shape[1]):
        norm_w = np.linalg.norm(w[g])
        if norm_w == 0:
            worst = max(worst, np.linalg.norm(corr[g]) - lam)
        else:
            worst = max(worst, np.linalg.norm(corr[g] - lam * w[g] / norm_w))
    return float(worst)


def _block_solve(eigvals: np.ndarray, eigvecs: np.ndarray, s: np.ndarray, lam: float) -> np.ndarray:
    """Exact minimiser of 1/2 w'Cw - s'w + lam ||w|| given C = U diag(e) U'.

    Zero unless ||s|| > lam; otherwise w = U nu (e nu + lam)^-1 U's where the norm
    nu = ||w|| solves ||(e nu + lam)^-1 U's|| = 1. The left side falls from
    ||s||/lam > 1 at nu = 0, so [0, upper] always brackets the root. With an
    orthonormal block this is block soft-thresholding.
    """
    norm_s = np.linalg.norm(s)
    if norm_s <= lam:
        return np.zeros_like(s)
    s_rot = eigvecs.T @ s

    def gap(nu: float) -> float:
        return np.linalg.norm(s_rot / (eigvals * nu + lam)) - 1.0

    upper = max(norm_s, 1.0)
    for _ in range(200):
        if gap(upper) < 0:
            break
        upper *= 2.0
    else:
        raise NumericalError("group lasso block is unbounded below; the block Gram matrix is singular")
    nu = optimize.brentq(gap, 0.0, upper, xtol=np.finfo(float).tiny, rtol=4 * np.finfo(float).eps, maxiter=500)
    return eigvecs @ (s_rot * nu / (eigvals * nu + lam))


def group_lasso_bcd(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    groups: Sequence,
    max_iter: int = 10000,
    tol: float = 1e-8,
    w_init: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Block coordinate descent for 1/2 ||y - Xw||^2 + lam sum_g ||w_g||_2"""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam <= 0:
        raise DataError(f"group lasso penalty must be positive, got {lam}")
    index_sets = _as_groups(groups, X.shape[1])
    grams = [X[:, g].T @ X[:, g] for g in index_sets]
    spectra = [np.linalg.eigh(gram) for gram in grams]

    w = _start(w_init, X.shape[1])
    residual = y - X @ w
    for _ in range(max_iter):
        for g, gram, (eigvals, eigvecs) in zip(index_sets, grams, spectra):
            old = w[g].copy()
            s = X[:, g].T @ residual + gram @ old
            w[g] = _block_solve(np.clip(eigvals, 0.0, None), eigvecs, s, lam)
            if np.any(w[g] != old):
                residual -= X[:, g] @ (w[g] - old)
        if group_lasso_kkt_violation(X, y, w, lam, index_sets) <= tol:
            break
    else:
        logger.warning(f"Group lasso block coordinate descent hit max_iter={max_iter}")
    return w
