import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from clustervar.core.errors import DataError
from clustervar.models.panel import TimeSeriesPanel
from clustervar.models.var import BaselineKind, BaselineModel
from clustervar.services.baselines import fit_baseline, forecast_baseline
from clustervar.services.evaluate import granger_graph_from_w
from clustervar.services.solvers import group_lasso_bcd, lasso_cd
from clustervar.services.timeseries import build_lag_design


def test_mean_on_centred_data_predicts_zero(rng):
    values = rng.standard_normal((200, 2))
    values -= values.mean(axis=0)
    design = build_lag_design(TimeSeriesPanel.from_array(values), p=1)
    model = fit_baseline(BaselineKind.MEAN, design)
    assert_allclose(model.predict(design.X), 0.0, atol=0.2)


def test_random_walk_repeats_last_value(small_design):
    model = fit_baseline(BaselineKind.RW, small_design)
    assert_array_equal(model.predict(small_design.X), small_design.X[:, ::2])
    assert_array_equal(forecast_baseline(model, np.array([[0.0, 0, 0], [1, 2, 3]])), [1, 2, 3])


def test_mean_forecast_uses_stored_means():
    model = BaselineModel(kind=BaselineKind.MEAN, p=1, names=("a", "b"), means=[0.0, 0.0])
    assert_array_equal(forecast_baseline(model, np.empty((0, 2))), [0, 0])


def test_ar_forecast_is_a_dot_product():
    W = np.zeros((6, 2))
    W[0:3, 0] = [0.5, 0.0, 0.0]
    model = BaselineModel(kind=BaselineKind.AR, p=3, names=("a", "b"), W=W, hyperparameters={"lam": 1.0})
    context = np.array([[0.0, 0.0], [0.0, 0.0], [2.0, 0.0]])
    assert forecast_baseline(model, context)[0] == pytest.approx(1.0)


def test_ar_has_only_diagonal_blocks(small_design):
    model = fit_baseline(BaselineKind.AR, small_design, {"lam": 1.0})
    norms = model.as_var_model().block_norms()
    assert_array_equal(norms[~np.eye(3, dtype=bool)], 0.0)
    assert np.all(np.diag(norms) > 0)


def test_lasso_granger_full_shrinkage_has_no_edges(small_design):
    model = fit_baseline(BaselineKind.LG, small_design, {"lam": 1e6})
    assert_array_equal(model.W, 0.0)
    assert granger_graph_from_w(model.as_var_model()).n_edges == 0


def test_group_lasso_granger_zeroes_whole_blocks(small_design):
    model = fit_baseline(BaselineKind.GLG, small_design, {"lam": 0.2})
    blocks = model.W.reshape(3, 2, 3)
    for b in range(3):
        for k in range(3):
            block = blocks[b, :, k]
            assert np.all(block == 0) or np.all(block != 0)


def test_penalty_required(small_design):
    with pytest.raises(DataError):
        fit_baseline(BaselineKind.LG, small_design, {})


def test_short_context_rejected():
    model = BaselineModel(kind=BaselineKind.AR, p=2, names=("a",), W=np.zeros((2, 1)))
    with pytest.raises(DataError):
        forecast_baseline(model, np.zeros((1, 1)))


def test_models_agree_with_design_predictions(small_design):
    model = fit_baseline(BaselineKind.LG, small_design, {"lam": 0.05})
    # rows y[t-2], y[t-1] rebuilt from the last design row
    context = small_design.X[-1].reshape(3, 2)[:, ::-1].T
    assert_allclose(forecast_baseline(model, context), small_design.X[-1] @ model.W)


def test_ar_matches_lasso_granger_on_own_lags(small_design):
    ar = fit_baseline(BaselineKind.AR, small_design, {"lam": 1e-12})
    for k in range(small_design.n_series):
        own = small_design.block_index[k]
        columns = slice(own.start, own.stop)
        masked = np.zeros_like(small_design.X)
        masked[:, columns] = small_design.X[:, columns]
        w = lasso_cd(masked, small_design.Y[:, k], 1e-12)
        assert_array_equal(np.delete(w, np.arange(own.start, own.stop)), 0.0)
        assert_allclose(masked @ w, small_design.X @ ar.W[:, k], atol=1e-8)


def test_group_lasso_granger_with_one_lag_matches_lasso_granger(rng):
    values = rng.standard_normal((120, 3))
    design = build_lag_design(TimeSeriesPanel.from_array(values), p=1)
    lg = fit_baseline(BaselineKind.LG, design, {"lam": 0.02})
    glg = fit_baseline(BaselineKind.GLG, design, {"lam": 0.02})
    assert np.any(lg.W != 0)
    assert_allclose(glg.W, lg.W, atol=1e-8)


def test_singleton_groups_match_lasso_on_orthonormal_design(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(30, 5)))
    y = Q @ np.array([3.0, -0.5, 0.0, 1.2, -2.0]) + 0.1 * rng.normal(size=30)
    w_group = group_lasso_bcd(Q, y, 1.0, [[j] for j in range(5)])
    w_lasso = lasso_cd(Q, y, 1.0)
    assert_allclose(w_group, w_lasso, atol=1e-10)
    # orthonormal columns: both are soft-thresholded correlations
    corr = Q.T @ y
    assert_allclose(w_lasso, np.sign(corr) * np.fmax(np.abs(corr) - 1.0, 0.0), atol=1e-10)
