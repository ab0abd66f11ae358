import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from clustervar.core.errors import DataError
from clustervar.models.scenario import ClusterSpec, ScenarioId, ScenarioSpec, SimulationConfig, default_scenario
from clustervar.models.var import VarModel
from clustervar.services.evaluate import granger_graph_from_w, graph_stats
from clustervar.services.simulate import (
    companion_spectral_radius,
    make_scenario,
    rescale_to_radius,
    sample_autocovariance,
    simulate_var,
    theoretical_autocovariance,
)


def scalar_model(value):
    return VarModel(W=[[value]], p=1, names=("y1",))


class TestSpectralRadius:
    @pytest.mark.parametrize("value", [0.5, 1.0])
    def test_scalar(self, value):
        assert companion_spectral_radius(scalar_model(value)) == pytest.approx(value)

    def test_diagonal(self):
        model = VarModel(W=np.diag([0.3, 0.8]), p=1, names=("a", "b"))
        assert companion_spectral_radius(model) == pytest.approx(0.8)

    def test_ar2_roots(self):
        # y_t = 1.0 y_{t-1} - 0.25 y_{t-2}: double root at 0.5
        model = VarModel(W=[[1.0], [-0.25]], p=2, names=("y1",))
        assert companion_spectral_radius(model) == pytest.approx(0.5, abs=1e-6)

    def test_rescale_hits_target(self, rng):
        model = VarModel(W=rng.normal(size=(6, 2)), p=3, names=("a", "b"))
        assert companion_spectral_radius(rescale_to_radius(model, 0.7)) == pytest.approx(0.7, abs=1e-6)

    def test_rescale_rejects_zero(self):
        with pytest.raises(DataError):
            rescale_to_radius(VarModel(W=np.zeros((2, 2)), p=1, names=("a", "b")), 0.9)


class TestScenarios:
    @pytest.mark.parametrize("scenario", list(ScenarioId))
    def test_radius_matches_target(self, scenario):
        model, _ = make_scenario(default_scenario(scenario, seed=3))
        assert abs(companion_spectral_radius(model) - 0.9) <= 1e-6

    def test_scenario_c_is_diagonal(self):
        model, truth = make_scenario(default_scenario(ScenarioId.C, seed=1))
        norms = model.block_norms()
        assert_array_equal(norms[~np.eye(10, dtype=bool)], 0.0)
        assert truth.n_edges == 0

    def test_scenario_d_is_fully_connected(self):
        model, truth = make_scenario(default_scenario(ScenarioId.D, seed=1))
        assert truth.n_edges == 90
        assert granger_graph_from_w(model).n_edges == 90

    def test_scenario_a_has_two_leading_indicators(self):
        _, truth = make_scenario(default_scenario(ScenarioId.A))
        stats = graph_stats(truth)
        assert stats.n_leading == 2
        assert stats.out_degree[1] == stats.out_degree[4] == 9

    def test_scenario_e_layout(self):
        spec = default_scenario(ScenarioId.E)
        assert spec.K == 30
        assert spec.n_clusters == 3
        assert_array_equal(np.bincount(spec.labels())[1:], [10, 10, 10])
        assert spec.clusters[2].weak

    def test_truth_matches_placed_blocks(self):
        model, truth = make_scenario(default_scenario(ScenarioId.B, seed=7))
        placed = model.block_norms() > 0
        np.fill_diagonal(placed, False)
        assert_array_equal(placed, truth.adjacency)

    def test_deterministic_given_seed(self):
        first, _ = make_scenario(default_scenario(ScenarioId.A, seed=5))
        second, _ = make_scenario(default_scenario(ScenarioId.A, seed=5))
        assert_array_equal(first.W, second.W)

    def test_clusters_must_partition(self):
        with pytest.raises(ValueError):
            ScenarioSpec(id=ScenarioId.A, K=3, clusters=[ClusterSpec(members=[0, 1])])


class TestSimulateVar:
    def test_white_noise_variance(self):
        model = VarModel(W=np.zeros((2, 2)), p=1, names=("a", "b"))
        cov = np.diag([1.0, 2.0])
        panel = simulate_var(model, SimulationConfig(T=10000, noise_cov=cov, seed=2))
        assert_allclose(panel.values.var(axis=0), np.diag(cov), rtol=0.1)

    @pytest.mark.parametrize("cov", [[[1.0, 0.3], [0.3, 2.0]], [[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0]]])
    def test_noise_covariance_must_be_positive_diagonal(self, cov):
        with pytest.raises(ValueError):
            SimulationConfig(T=10, noise_cov=cov)

    def test_same_seed_same_panel(self):
        model, _ = make_scenario(default_scenario(ScenarioId.A, seed=0))
        cfg = SimulationConfig(T=200, seed=11)
        assert_array_equal(simulate_var(model, cfg).values, simulate_var(model, cfg).values)

    def test_ar1_autocorrelation(self):
        panel = simulate_var(scalar_model(0.9), SimulationConfig(T=50000, seed=4))
        acov = sample_autocovariance(panel, 1)[0, 0] / sample_autocovariance(panel, 0)[0, 0]
        assert acov == pytest.approx(0.9, abs=0.02)

    def test_autocovariance_matches_lyapunov(self):
        model = VarModel(W=[[0.5, 0.2], [0.0, 0.3]], p=1, names=("a", "b"))
        panel = simulate_var(model, SimulationConfig(T=100000, seed=8))
        theory = theoretical_autocovariance(model, np.eye(2), 1)
        assert_allclose(sample_autocovariance(panel, 0), theory[0], atol=0.05)
        assert_allclose(sample_autocovariance(panel, 1), theory[1], atol=0.05)

    def test_unit_root_rejected(self):
        with pytest.raises(DataError):
            simulate_var(scalar_model(1.0), SimulationConfig(T=10))

    def test_burn_in_floor(self):
        with pytest.raises(ValueError):
            SimulationConfig(T=10, burn_in=50)
