"""
Building blocks shared by the SingleCluster and MultiCluster fits.

Notation: for task (output series) k and input series b, the raw weights
v[b,k] are gated by the structural weight gamma[b,k], so the VAR block is
w[b,k] = gamma[b,k] * v[b,k]. Block products h[t,b,k] = <v[b,k], x[t,b]> turn
the structural step into a simplex-constrained least squares problem.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from clustervar.core.errors import DataError, NumericalError
from clustervar.models.panel import LagDesign
from clustervar.models.var import VarModel
from clustervar.services.solvers import ridge_solve

logger = logging.getLogger(__name__)


def gamma_from_alpha(alpha_bar: np.ndarray, tau: float = 1.0) -> np.ndarray:
    """Gamma with every off-diagonal column equal to alpha_bar and tau on the diagonal"""
    alpha_bar = np.asarray(alpha_bar, dtype=float)
    n_series = alpha_bar.shape[0]
    Gamma = np.tile(alpha_bar[:, None], (1, n_series))
    np.fill_diagonal(Gamma, tau)
    return Gamma


def gamma_from_a(A: np.ndarray) -> np.ndarray:
    """Gamma = A - diag(A) + I"""
    Gamma = np.array(A, dtype=float)
    np.fill_diagonal(Gamma, 1.0)
    return Gamma


def assemble_w(Gamma: np.ndarray, V: np.ndarray, p: int, names: Optional[Sequence[str]] = None) -> VarModel:
    """W with block (b, k) equal to gamma[b,k] times block (b, k) of V"""
    Gamma = np.asarray(Gamma, dtype=float)
    V = np.asarray(V, dtype=float)
    n_series = Gamma.shape[0]
    if Gamma.shape != (n_series, n_series) or V.shape != (n_series * p, n_series):
        raise DataError(f"Gamma {Gamma.shape} and V {V.shape} do not agree with p={p}")
    if names is None:
        names = [f"y{i + 1}" for i in range(n_series)]
    return VarModel(W=V * np.repeat(Gamma, p, axis=0), p=p, names=tuple(names))


def solve_v(design: LagDesign, Gamma: np.ndarray, lam: float) -> np.ndarray:
    """Ridge step: column k of V fits y[.,k] on the inputs reweighted by gamma[.,k].

    The loss is averaged over design rows, so the raw ridge penalty is lam * rows.
    """
    gates = np.repeat(np.asarray(Gamma, dtype=float), design.p, axis=0)
    V = np.empty((design.X.shape[1], design.n_series))
    for k in range(design.n_series):
        V[:, k] = ridge_solve(design.X * gates[:, k], design.Y[:, k], lam * design.n_rows)
    return V


def block_products(design: LagDesign, V: np.ndarray) -> np.ndarray:
    """h[t,b,k] = <v[b,k], x[t,b]>, shape (rows, K, K)"""
    blocks = design.blocks()
    V_blocks = np.asarray(V, dtype=float).reshape(design.n_series, design.p, design.n_series)
    return np.einsum("tbj,bjk->tbk", blocks, V_blocks)


def own_residuals(design: LagDesign, H: np.ndarray) -> np.ndarray:
    """r[t,k] = y[t,k] - h[t,k,k], what the cross-series terms have to explain"""
    return design.Y - np.einsum("tkk->tk", H)


def task_matrices(H: np.ndarray) -> np.ndarray:
    """H_k = H[:, :, k] with column k zeroed, stacked as (K, rows, K)"""
    H_tasks = np.ascontiguousarray(np.transpose(H, (2, 0, 1)))
    for k in range(H_tasks.shape[0]):
        H_tasks[k, :, k] = 0.0
    return H_tasks


def task_grams(H_tasks: np.ndarray, R: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-task H_k'H_k, H_k'r_k and r_k'r_k"""
    P = np.einsum("ktb,ktc->kbc", H_tasks, H_tasks)
    q = np.einsum("ktb,tk->kb", H_tasks, R)
    s = np.einsum("tk,tk->k", R, R)
    return P, q, s


def dictionary_quadratic(
    P: np.ndarray, q: np.ndarray, s: np.ndarray, G: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Gram form of sum_k ||r_k - H_k D g_k||^2 in vec(D) (columns stacked).

    Task k contributes the design kron(g_k', H_k), so
    Q = sum_k kron(g_k g_k', P_k) and c = sum_k kron(g_k, q_k).
    With G = 1' (one atom) this is the alpha_bar problem of the single-cluster fit.
    """
    G = np.asarray(G, dtype=float)
    rank, n_series = G.shape
    size = P.shape[1]
    Q = np.zeros((rank * size, rank * size))
    c = np.zeros(rank * size)
    for k in range(n_series):
        g = G[:, k]
        Q += np.kron(np.outer(g, g), P[k])
        c += np.kron(g, q[k])
    return Q, c, float(np.sum(s))


def hadamard_kronecker_design(H_tasks: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Explicit (G^ o H^) with G^ = G' kron 1_T 1_K' and H^ = 1_r' kron H.

    H is the vertical stack of the H_k. Materialises a (K*rows) x (K*r) matrix;
    the fits use ``dictionary_quadratic`` instead.
    """
    n_series, n_rows, _ = H_tasks.shape
    rank = np.asarray(G).shape[0]
    H = H_tasks.reshape(n_series * n_rows, n_series)
    G_hat = np.kron(np.asarray(G, dtype=float).T, np.ones((n_rows, n_series)))
    H_hat = np.kron(np.ones((1, rank)), H)
    return G_hat * H_hat


def structured_loss(design: LagDesign, Gamma: np.ndarray, V: np.ndarray) -> float:
    """sum_k sum_t (y[t,k] - sum_b gamma[b,k] h[t,b,k])^2 computed from (Gamma, V)"""
    H = block_products(design, V)
    fitted = np.einsum("tbk,bk->tk", H, np.asarray(Gamma, dtype=float))
    residual = design.Y - fitted
    return float(np.sum(residual ** 2))


def penalized_objective(design: LagDesign, Gamma: np.ndarray, V: np.ndarray, lam: float) -> float:
    """structured loss / rows + lam ||V||_F^2"""
    value = structured_loss(design, Gamma, V) / design.n_rows + lam * float(np.sum(np.asarray(V) ** 2))
    if not np.isfinite(value):
        raise NumericalError("penalized objective is not finite; check the scaling of the data")
    return value


def relative_change(previous: float, current: float) -> float:
    if previous == current:
        return 0.0
    return abs(previous - current) / max(abs(previous), np.finfo(float).tiny)
