import json

import numpy as np
import pandas as pd
import pytest

from clustervar.cli import build_parser
from clustervar.cli.replay import replay_argv
from clustervar.core.errors import ConfigurationError
from main import main


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)
    return path


@pytest.fixture
def simulated(tmp_path, runs_dir):
    out = tmp_path / "sim"
    code = main(["simulate", "--scenario", "A", "--seed", "0", "--t-train", "120", "--t-holdout", "60", "--out", str(out)])
    assert code == 0
    return out


@pytest.fixture
def random_walk_csv(tmp_path):
    rng = np.random.default_rng(3)
    values = np.cumsum(rng.normal(size=(80, 2)), axis=0) + 50
    frame = pd.DataFrame({
        "date": pd.date_range("2020-01-01", periods=80, freq="D").strftime("%Y-%m-%d"),
        "a": values[:, 0],
        "b": values[:, 1],
    })
    path = tmp_path / "walk.csv"
    frame.to_csv(path, index=False)
    return path


class TestSimulate:
    def test_scenario_c_outputs(self, tmp_path, runs_dir):
        out = tmp_path / "simC"
        code = main(["simulate", "--scenario", "C", "--seed", "1", "--t-train", "100", "--t-holdout", "500", "--out", str(out)])
        assert code == 0
        for name in ("train.csv", "holdout.csv", "true_W.csv", "truth_graph.json", "truth_graph.dot", "manifest.json"):
            assert (out / name).exists()
        assert read_json(out / "truth_graph.json")["edges"] == []
        assert len(pd.read_csv(out / "train.csv")) == 100
        assert len(pd.read_csv(out / "holdout.csv")) == 500

    def test_manifest_and_run_history(self, simulated, runs_dir):
        manifest = read_json(simulated / "manifest.json")
        assert manifest["command"] == "simulate"
        assert manifest["seeds"] == [0]
        assert "numpy" in manifest["versions"]
        assert "edge_rule" in manifest["decisions"]
        history = read_json(runs_dir / "runs.json")
        assert [run["status"] for run in history] == ["completed"]

    def test_scenario_metadata(self, simulated):
        scenario = read_json(simulated / "scenario.json")
        assert scenario["spectral_radius"] == pytest.approx(0.9, abs=1e-6)
        assert scenario["labels"] == [1] * 10

    def test_missing_scenario_is_a_usage_error(self, tmp_path, runs_dir):
        assert main(["simulate", "--out", str(tmp_path / "x")]) == 1
        assert not (tmp_path / "x").exists()


class TestFitAndEvaluate:
    def test_scvar_against_truth(self, tmp_path, simulated):
        fit_dir, eval_dir = tmp_path / "fit", tmp_path / "eval"
        code = main([
            "fit", "--method", "scvar", "--data", str(simulated / "train.csv"), "--no-date",
            "--lam", "0.1", "--kappa", "1", "--out", str(fit_dir),
        ])
        assert code == 0
        for name in ("model.json", "W.csv", "state.json", "objective_trace.csv", "train_tail.csv"):
            assert (fit_dir / name).exists()

        code = main([
            "evaluate", "--model", str(fit_dir), "--holdout", str(simulated / "holdout.csv"),
            "--truth", str(simulated), "--out", str(eval_dir),
        ])
        assert code == 0
        report = read_json(eval_dir / "report.json")
        assert 0.0 <= report["granger_accuracy"] <= 1.0
        assert report["n_holdout"] == 60
        assert report["relative_mse"] > 0
        assert (eval_dir / "graph.dot").exists()

    def test_mcvar_records_clusters(self, tmp_path, simulated):
        fit_dir = tmp_path / "fit"
        code = main([
            "fit", "--method", "mcvar", "--data", str(simulated / "train.csv"), "--no-date",
            "--lam", "0.1", "--kappa", "1", "--r", "2", "--out", str(fit_dir),
        ])
        assert code == 0
        clusters = read_json(fit_dir / "model.json")["clusters"]
        assert len(clusters) == 10
        assert set(clusters) <= {1, 2}

    def test_transforms_replayed_on_raw_holdout(self, tmp_path, runs_dir, random_walk_csv):
        config = write_json(tmp_path / "fit.json", {
            "method": "ar",
            "p": 2,
            "n_holdout": 20,
            "data": {"path": str(random_walk_csv), "transforms": [{"kind": "difference"}, {"kind": "zscore"}]},
            "hyperparameters": {"lam": 1.0},
        })
        fit_dir, eval_dir = tmp_path / "fit", tmp_path / "eval"
        assert main(["fit", "--config", str(config), "--out", str(fit_dir)]) == 0
        record = read_json(fit_dir / "model.json")
        assert [step["kind"] for step in record["transform_log"]] == ["difference", "zscore"]
        assert (fit_dir / "raw_context.csv").exists()

        code = main([
            "evaluate", "--model", str(fit_dir), "--holdout", str(fit_dir / "holdout_raw.csv"), "--out", str(eval_dir),
        ])
        assert code == 0
        report = read_json(eval_dir / "report.json")
        assert report["n_holdout"] == 20
        assert report["granger_accuracy"] is None
        assert report["relative_mse"] > 0

    def test_missing_data_file(self, tmp_path, runs_dir):
        out = tmp_path / "fit"
        code = main([
            "fit", "--method", "ar", "--data", str(tmp_path / "absent.csv"), "--lam", "1", "--out", str(out),
        ])
        assert code == 2
        assert not out.exists()
        assert read_json(runs_dir / "runs.json")[-1]["status"] == "failed"

    def test_missing_hyperparameter(self, tmp_path, simulated):
        code = main(["fit", "--method", "scvar", "--data", str(simulated / "train.csv"), "--no-date",
                     "--lam", "1", "--out", str(tmp_path / "fit")])
        assert code == 2


class TestCvFit:
    def test_selects_from_grid(self, tmp_path, simulated):
        config = write_json(tmp_path / "cv.json", {
            "method": "scvar",
            "data": {"path": str(simulated / "train.csv"), "csv": {"date_column": None}},
            "grid": {"lambda_values": [0.01, 0.1], "kappa_values": [1.0]},
            "outer": {"max_iter": 20},
        })
        out = tmp_path / "cvfit"
        assert main(["cv-fit", "--config", str(config), "--folds", "2", "--out", str(out)]) == 0
        table = pd.read_csv(out / "cv_table.csv")
        assert len(table) == 2
        assert {"lam", "kappa", "mean_mse", "fold1", "fold2"} <= set(table.columns)
        best = read_json(out / "manifest.json")["cv"]["best"]
        assert best["lam"] in (0.01, 0.1)
        assert read_json(out / "model.json")["hyperparameters"] == best


class TestInitConfigAndReplay:
    def test_init_config_templates(self, tmp_path):
        out = tmp_path / "sweep.json"
        assert main(["init-config", "--kind", "sweep", "--out", str(out)]) == 0
        assert read_json(out)["scenario"] == "A"
        assert main(["init-config", "--kind", "sweep", "--out", str(out)]) == 1
        assert main(["init-config", "--kind", "fit", "--out", str(out), "--force"]) == 0
        assert read_json(out)["method"] == "scvar"

    def test_replay_reproduces_fit(self, tmp_path, simulated):
        fit_dir, replay_dir = tmp_path / "fit", tmp_path / "again"
        argv = ["fit", "--method", "ar", "--data", str(simulated / "train.csv"), "--no-date",
                "--lam", "2", "--out", str(fit_dir)]
        assert main(argv) == 0
        assert main(["replay", "--manifest", str(fit_dir), "--out", str(replay_dir)]) == 0
        original = pd.read_csv(fit_dir / "W.csv", index_col=0)
        replayed = pd.read_csv(replay_dir / "W.csv", index_col=0)
        pd.testing.assert_frame_equal(original, replayed)

    def test_replay_by_run_id(self, tmp_path, simulated, runs_dir):
        fit_dir, replay_dir = tmp_path / "fit", tmp_path / "again"
        argv = ["fit", "--method", "ar", "--data", str(simulated / "train.csv"), "--no-date",
                "--lam", "0.5", "--out", str(fit_dir)]
        assert main(argv) == 0
        run_id = read_json(fit_dir / "manifest.json")["run_id"]
        assert main(["replay", "--run", run_id, "--out", str(replay_dir)]) == 0
        pd.testing.assert_frame_equal(
            pd.read_csv(fit_dir / "W.csv", index_col=0), pd.read_csv(replay_dir / "W.csv", index_col=0)
        )

    def test_replay_unknown_or_failed_run(self, tmp_path, runs_dir):
        assert main(["replay", "--run", "no-such-run", "--out", str(tmp_path / "x")]) == 2
        assert main(["fit", "--method", "ar", "--data", str(tmp_path / "absent.csv"), "--lam", "1",
                     "--out", str(tmp_path / "fit")]) == 2
        failed_id = read_json(runs_dir / "runs.json")[-1]["id"]
        assert main(["replay", "--run", failed_id, "--out", str(tmp_path / "y")]) == 2

    def test_replay_needs_one_source(self, tmp_path, runs_dir):
        assert main(["replay", "--out", str(tmp_path / "x")]) == 1
        assert main(["replay", "--manifest", "m.json", "--run", "abc", "--out", str(tmp_path / "x")]) == 1

    def test_replay_argv_swaps_config(self, tmp_path):
        manifest = {"command": "sweep", "argv": ["sweep", "--config", "old.json", "--out", "old"], "config": {"seeds": [1]}}
        argv = replay_argv(manifest, tmp_path / "new")
        assert argv[argv.index("--out") + 1] == str(tmp_path / "new")
        config_path = argv[argv.index("--config") + 1]
        assert read_json(config_path) == {"seeds": [1]}

    def test_replay_missing_manifest(self, tmp_path):
        assert main(["replay", "--manifest", str(tmp_path / "nothing"), "--out", str(tmp_path / "x")]) == 2


class TestSweep:
    def test_small_sweep_tables(self, tmp_path, runs_dir):
        config = write_json(tmp_path / "sweep.json", {
            "scenario": "C",
            "seeds": [0],
            "sizes": [40, 60],
            "t_holdout": 40,
            "methods": ["mean", "rw", "ar", "scvar"],
            "grid": {"lambda_values": [0.01, 0.1], "kappa_values": [1.0]},
            "folds": 2,
            "outer": {"max_iter": 10},
        })
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(config), "--out", str(out)]) == 0

        relative = pd.read_csv(out / "relative_mse.csv", index_col="size")
        assert list(relative.index) == [40, 60]
        assert list(relative.columns) == ["mean", "rw", "ar", "scvar"]
        assert (relative.to_numpy() > 0).all()

        table = pd.read_csv(out / "table.csv")
        assert len(table) == 8
        significance = pd.read_csv(out / "significance.csv", index_col="size", dtype=str)
        assert significance.loc["40", "scvar"].strip("+-=") == ""
        assert len(significance.loc["40", "scvar"]) == 3


class TestUsageErrors:
    @pytest.mark.parametrize("argv", [[], ["bogus"], ["fit", "--bogus"], ["simulate", "--scenario", "Z", "--out", "x"]])
    def test_exit_code_one(self, argv, runs_dir):
        assert main(argv) == 1

    def test_parser_raises_configuration_error(self):
        with pytest.raises(ConfigurationError):
            build_parser().parse_args(["evaluate"])
