"""
Synthetic scenarios and stationary VAR simulation
"""

import logging
from typing import List, Tuple

import numpy as np
from scipy import linalg, optimize

from clustervar.core.errors import DataError, NumericalError
from clustervar.models.evaluation import GrangerGraph
from clustervar.models.panel import TimeSeriesPanel
from clustervar.models.scenario import ScenarioSpec, SimulationConfig
from clustervar.models.var import VarModel

logger = logging.getLogger(__name__)

RADIUS_TOL = 1e-6
# weak clusters draw their leading-indicator blocks from the bottom of the range
WEAK_FRACTION = 0.25


def lag_coefficients(model: VarModel) -> List[np.ndarray]:
    """A_1..A_p with y_t = sum_j A_j y_{t-j}; A_j[k, b] is the lag-j weight of b in k"""
    blocks = np.asarray(model.W).reshape(model.n_series, model.p, model.n_series)
    return [blocks[:, j, :].T for j in range(model.p)]


def companion_matrix(model: VarModel) -> np.ndarray:
    K, p = model.n_series, model.p
    C = np.zeros((K * p, K * p))
    C[:K, :] = np.hstack(lag_coefficients(model))
    C[K:, :-K] = np.eye(K * (p - 1))
    return C


def companion_spectral_radius(model: VarModel) -> float:
    """Largest eigenvalue modulus of the pK x pK companion matrix; < 1 means stationary"""
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(model)))))


def _draw_block(rng: np.random.Generator, p: int, low: float, high: float) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=p) * rng.uniform(low, high, size=p)


def rescale_to_radius(model: VarModel, target: float) -> VarModel:
    """Scale W by the factor c for which the companion spectral radius of cW equals target"""
    if not 0 < target < 1:
        raise DataError(f"target spectral radius must lie in (0, 1), got {target}")
    W = np.asarray(model.W)
    if not np.any(W):
        raise DataError("cannot rescale an all-zero W")

    def gap(c: float) -> float:
        return companion_spectral_radius(VarModel(W=c * W, p=model.p, names=model.names)) - target

    upper = 1.0
    while gap(upper) < 0:
        upper *= 2.0
        if upper > 1e12:
            raise NumericalError("spectral radius does not grow with the scale of W")
    c = optimize.brentq(gap, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    rescaled = VarModel(W=c * W, p=model.p, names=model.names)

    radius = companion_spectral_radius(rescaled)
    if abs(radius - target) > RADIUS_TOL:
        raise NumericalError(f"rescaled spectral radius {radius:.8f} misses target {target}")
    return rescaled


def make_scenario(spec: ScenarioSpec) -> Tuple[VarModel, GrangerGraph]:
    """Ground-truth W and Granger graph of a scenario, deterministic given spec.seed.

    Every diagonal block and every (leading indicator -> cluster member) block gets
    p coefficients of random sign and magnitude in [coef_low, coef_high] before W is
    rescaled to the target spectral radius.
    """
    rng = np.random.default_rng(spec.seed)
    K, p = spec.K, spec.p
    names = tuple(f"y{i + 1}" for i in range(K))
    W = np.zeros((K * p, K))
    adjacency = np.zeros((K, K), dtype=bool)

    for k in range(K):
        W[k * p:(k + 1) * p, k] = _draw_block(rng, p, spec.coef_low, spec.coef_high)

    weak_high = spec.coef_low + WEAK_FRACTION * (spec.coef_high - spec.coef_low)
    for cluster in spec.clusters:
        high = weak_high if cluster.weak else spec.coef_high
        for k in cluster.members:
            for b in cluster.leading:
                if b == k:
                    continue
                W[b * p:(b + 1) * p, k] = _draw_block(rng, p, spec.coef_low, high)
                adjacency[b, k] = True

    model = rescale_to_radius(VarModel(W=W, p=p, names=names), spec.target_spectral_radius)
    logger.info(f"Scenario {spec.id.value}: K={K}, p={p}, {int(adjacency.sum())} cross edges, seed={spec.seed}")
    return model, GrangerGraph(adjacency=adjacency, names=names)


def simulate_var(model: VarModel, cfg: SimulationConfig) -> TimeSeriesPanel:
    """Iterate the VAR with seeded Gaussian noise and drop the first burn_in samples"""
    radius = companion_spectral_radius(model)
    if radius >= 1:
        raise DataError(f"W is not stationary (companion spectral radius {radius:.6f})")

    K, p = model.n_series, model.p
    rng = np.random.default_rng(cfg.seed)
    try:
        chol = np.linalg.cholesky(cfg.covariance(K))
    except ValueError as e:
        raise DataError(str(e)) from e

    n_total = cfg.burn_in + cfg.T
    noise = rng.standard_normal((n_total, K)) @ chol.T
    coefficients = lag_coefficients(model)

    y = np.zeros((n_total + p, K))
    for t in range(p, n_total + p):
        value = noise[t - p].copy()
        for j, A in enumerate(coefficients, start=1):
            value += A @ y[t - j]
        y[t] = value

    return TimeSeriesPanel(values=y[p + cfg.burn_in:], names=model.names)


def theoretical_autocovariance(model: VarModel, noise_cov: np.ndarray, max_lag: int) -> List[np.ndarray]:
    """Cov(y_t, y_{t-h}) for h = 0..max_lag from the discrete Lyapunov equation"""
    K = model.n_series
    C = companion_matrix(model)
    Q = np.zeros_like(C)
    Q[:K, :K] = np.asarray(noise_cov, dtype=float)
    S = linalg.solve_discrete_lyapunov(C, Q)

    covariances = []
    power = np.eye(C.shape[0])
    for _ in range(max_lag + 1):
        covariances.append((power @ S)[:K, :K])
        power = C @ power
    return covariances


def sample_autocovariance(panel: TimeSeriesPanel, lag: int) -> np.ndarray:
    """Sample Cov(y_t, y_{t-lag}) with the 1/T convention"""
    values = panel.values - panel.values.mean(axis=0)
    n_obs = values.shape[0]
    return values[lag:].T @ values[:n_obs - lag] / n_obs
