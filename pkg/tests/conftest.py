import numpy as np
import pytest

from clustervar.core.config import settings
from clustervar.models.panel import TimeSeriesPanel
from clustervar.services.mcvar import fit_mcvar
from clustervar.services.timeseries import build_lag_design


def simulate_driven_pair(n_obs: int = 2000, coefficient: float = 0.8, seed: int = 0) -> TimeSeriesPanel:
    """Series 2 driven by lag 1 of series 1, unit Gaussian noise"""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n_obs + 1, 2))
    y = np.zeros((n_obs + 1, 2))
    y[:, 0] = noise[:, 0]
    y[1:, 1] = coefficient * y[:-1, 0] + noise[1:, 1]
    return TimeSeriesPanel.from_array(y[1:], names=["y1", "y2"])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def driven_pair_design():
    return build_lag_design(simulate_driven_pair(), p=1)


@pytest.fixture
def small_design(rng):
    panel = TimeSeriesPanel.from_array(rng.standard_normal((60, 3)))
    return build_lag_design(panel, p=2)


@pytest.fixture
def runs_dir(tmp_path, monkeypatch):
    path = tmp_path / "runs"
    monkeypatch.setattr(settings, "RUNS_DIR", path)
    return path


@pytest.fixture
def known_cluster_fit():
    """Fit with one-hot cluster weights held fixed: one structural vector per known cluster"""

    def fit(design, labels, lam, kappa, **kwargs):
        labels = np.asarray(labels)
        clusters = np.unique(labels)
        G = (labels[None, :] == clusters[:, None]).astype(float)
        return fit_mcvar(design, lam, kappa, len(clusters), G_init=G, update_weights=False, **kwargs)

    return fit
