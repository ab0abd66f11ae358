import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from clustervar.core.errors import DataError
from clustervar.models.options import OuterOptions
from clustervar.models.panel import TimeSeriesPanel
from clustervar.models.var import McvarInit
from clustervar.services.alternating import (
    block_products,
    dictionary_quadratic,
    hadamard_kronecker_design,
    own_residuals,
    task_grams,
    task_matrices,
)
from clustervar.services.mcvar import (
    cluster_assignments,
    fit_mcvar,
    fit_mcvar_from,
    init_from_scvar,
    profile_init,
    uniform_init,
)
from clustervar.services.scvar import fit_scvar
from clustervar.services.timeseries import build_lag_design


class TestClusterAssignments:
    def test_clear_weights(self):
        assert_array_equal(cluster_assignments(np.array([[0.9, 0.1], [0.1, 0.9]])), [1, 2])

    def test_tie_goes_to_first_row(self):
        assert_array_equal(cluster_assignments(np.array([[0.5], [0.5]])), [1])

    def test_single_cluster(self):
        assert_array_equal(cluster_assignments(np.ones((1, 4))), [1, 1, 1, 1])


class TestDictionarySystem:
    @pytest.mark.parametrize("n_series,rank,n_rows", [(2, 1, 3), (3, 2, 5), (4, 3, 4)])
    def test_hadamard_kronecker_matches_task_sum(self, rng, n_series, rank, n_rows):
        H_tasks = rng.normal(size=(n_series, n_rows, n_series))
        for k in range(n_series):
            H_tasks[k, :, k] = 0.0
        R = rng.normal(size=(n_rows, n_series))
        D = rng.random((n_series, rank))
        G = rng.dirichlet(np.ones(rank), size=n_series).T

        direct = sum(np.sum((R[:, k] - H_tasks[k] @ D @ G[:, k]) ** 2) for k in range(n_series))
        design = hadamard_kronecker_design(H_tasks, G)
        residual = R.reshape(-1, order="F") - design @ D.reshape(-1, order="F")
        assert float(residual @ residual) == pytest.approx(direct, rel=1e-10)

        Q, c, const = dictionary_quadratic(*task_grams(H_tasks, R), G)
        x = D.reshape(-1, order="F")
        assert float(x @ Q @ x - 2 * c @ x + const) == pytest.approx(direct, rel=1e-10)

    def test_task_matrices_zero_own_column(self, small_design, rng):
        H = block_products(small_design, rng.normal(size=(6, 3)))
        H_tasks = task_matrices(H)
        for k in range(3):
            assert_array_equal(H_tasks[k, :, k], 0.0)
        assert_allclose(own_residuals(small_design, H)[:, 1], small_design.Y[:, 1] - H[:, 1, 1])


class TestInitialisations:
    def test_uniform(self):
        D, G = uniform_init(4, 2, 2.0)
        assert_allclose(D, 0.5)
        assert_allclose(G, 0.5)

    def test_from_scvar_reproduces_alpha(self):
        alpha = np.array([0.6, 0.3, 0.1, 0.0])
        D, G = init_from_scvar(alpha, 4, 2, spread=0.5)
        assert_allclose(D @ G, np.tile(alpha[:, None], (1, 4)))
        assert_allclose(G.sum(axis=0), 1.0)
        assert_array_equal(cluster_assignments(G), [1, 2, 1, 2])

    def test_profile_init_is_feasible(self, small_design):
        D, G = profile_init(small_design, 2, 1.5, 1.0)
        assert_allclose(D.sum(axis=0), 1.5)
        assert np.all(D >= 0)
        assert_allclose(G, 0.5)


class TestFitMcvar:
    def test_zero_targets(self):
        design = build_lag_design(TimeSeriesPanel.from_array(np.zeros((30, 3))), p=2)
        state, model = fit_mcvar(design, lam=1.0, kappa=1.5, r=2)
        assert_array_equal(state.V, 0.0)
        assert_allclose(state.D, 0.5)
        assert_allclose(state.G, 0.5)
        assert_array_equal(model.W, 0.0)

    def test_rank_one_matches_single_cluster_every_iteration(self, small_design):
        outer = OuterOptions(max_iter=15, tol=1e-12)
        scvar_path, mcvar_path = [], []
        scvar_state, _ = fit_scvar(small_design, 0.1, 1.0, outer=outer, callback=lambda it, W: scvar_path.append(W))
        mcvar_state, _ = fit_mcvar(small_design, 0.1, 1.0, 1, outer=outer, callback=lambda it, W: mcvar_path.append(W))
        assert len(scvar_path) == len(mcvar_path)
        for W_single, W_multi in zip(scvar_path, mcvar_path):
            assert np.max(np.abs(W_single - W_multi)) <= 1e-6
        assert_allclose(mcvar_state.D[:, 0], scvar_state.alpha_bar, atol=1e-10)
        assert_array_equal(mcvar_state.G, 1.0)

    @pytest.mark.parametrize("seed", range(10))
    def test_rank_one_matches_single_cluster_on_random_problems(self, seed):
        rng = np.random.default_rng(seed)
        n_series, n_obs, p = 2 + seed % 4, 40 + 6 * seed, 1 + seed % 2
        design = build_lag_design(TimeSeriesPanel.from_array(rng.standard_normal((n_obs, n_series))), p=p)
        lam, kappa = 10 ** rng.uniform(-1.3, 0), 10 ** rng.uniform(-0.5, 0.5)
        outer = OuterOptions(max_iter=10, tol=1e-12)
        scvar_path, mcvar_path = [], []
        fit_scvar(design, lam, kappa, outer=outer, callback=lambda it, W: scvar_path.append(W))
        fit_mcvar(design, lam, kappa, 1, outer=outer, callback=lambda it, W: mcvar_path.append(W))
        assert len(scvar_path) == len(mcvar_path)
        for W_single, W_multi in zip(scvar_path, mcvar_path):
            assert np.max(np.abs(W_single - W_multi)) <= 1e-6

    def test_objective_and_feasibility(self, small_design):
        state, _ = fit_mcvar_from(small_design, 0.1, 1.0, 2, init=McvarInit.PROFILE,
                                  outer=OuterOptions(max_iter=25, tol=1e-12))
        trace = state.objective_trace
        for before, after in zip(trace, trace[1:]):
            assert after <= before + 1e-8 * (1 + abs(before))
        assert_allclose(state.D.sum(axis=0), 1.0, atol=1e-8)
        assert_allclose(state.G.sum(axis=0), 1.0, atol=1e-8)
        assert np.all(state.A >= 0)
        assert_allclose(state.A.sum(axis=0), 1.0, atol=1e-8)
        assert_array_equal(np.diag(state.Gamma), 1.0)

    def test_warm_start_never_worse_than_single_cluster(self, small_design):
        scvar_state, _ = fit_scvar(small_design, 0.1, 1.0)
        state, _ = fit_mcvar_from(small_design, 0.1, 1.0, 2, init=McvarInit.SCVAR)
        assert state.objective_trace[-1] <= scvar_state.objective_trace[-1] + 1e-6

    def test_known_clusters_keep_weights(self, small_design, known_cluster_fit):
        state, _ = known_cluster_fit(small_design, [1, 1, 2], lam=0.1, kappa=1.0)
        assert_array_equal(state.G, [[1, 1, 0], [0, 0, 1]])
        assert_array_equal(cluster_assignments(state.G), [1, 1, 2])

    @pytest.mark.parametrize("r", [0, 4])
    def test_rank_out_of_range(self, small_design, r):
        with pytest.raises(DataError):
            fit_mcvar(small_design, 1.0, 1.0, r)

    def test_bad_initial_shape(self, small_design):
        with pytest.raises(DataError):
            fit_mcvar(small_design, 1.0, 1.0, 2, D_init=np.ones((3, 3)))
