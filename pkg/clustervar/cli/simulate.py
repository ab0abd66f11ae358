"""
simulate: draw a scenario VAR and write train/holdout panels with the ground truth
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List

from clustervar.cli.common import build_config, execute, load_config, panel_frame
from clustervar.models.experiment import SimulateConfig
from clustervar.models.scenario import ScenarioId, ScenarioSpec, SimulationConfig, default_scenario
from clustervar.services.evaluate import w_frame
from clustervar.services.run_manager import RunWriter
from clustervar.services.simulate import companion_spectral_radius, make_scenario, simulate_var
from clustervar.services.timeseries import split_holdout

logger = logging.getLogger(__name__)


def simulate_config_from_args(args: argparse.Namespace) -> SimulateConfig:
    overrides = {
        "scenario": args.scenario,
        "seed": args.seed,
        "t_train": args.t_train,
        "t_holdout": args.t_holdout,
        "p": args.p,
        "burn_in": args.burn_in,
    }
    if args.config is not None:
        return load_config(args.config, SimulateConfig, overrides)
    return build_config(SimulateConfig, {}, overrides)


def scenario_spec(config: SimulateConfig) -> ScenarioSpec:
    spec = default_scenario(config.scenario, seed=config.seed, p=config.p)
    return ScenarioSpec.model_validate(
        {**spec.model_dump(), "target_spectral_radius": config.target_spectral_radius}
    )


def run(args: argparse.Namespace, argv: List[str]) -> int:
    def body(writer: RunWriter) -> Dict[str, Any]:
        config = simulate_config_from_args(args)
        spec = scenario_spec(config)
        model, truth = make_scenario(spec)
        panel = simulate_var(
            model,
            SimulationConfig(T=config.t_train + config.t_holdout, burn_in=config.burn_in, seed=config.seed),
        )
        train, holdout = split_holdout(panel, config.t_holdout)

        writer.write_csv("train.csv", panel_frame(train), index=False)
        writer.write_csv("holdout.csv", panel_frame(holdout), index=False)
        writer.write_csv("panel.csv", panel_frame(panel), index=False)
        writer.write_csv("true_W.csv", w_frame(model))
        writer.write_json("truth_graph.json", truth.to_json_dict())
        writer.write_text("truth_graph.dot", truth.to_dot("truth"))
        writer.write_json(
            "scenario.json",
            {
                **spec.model_dump(mode="json"),
                "labels": spec.labels().tolist(),
                "spectral_radius": companion_spectral_radius(model),
            },
        )
        writer.write_json("config.json", config.model_dump(mode="json"))
        return {"config": config.model_dump(mode="json"), "seeds": [config.seed]}

    return execute("simulate", argv, args.out, body)


def register(subparsers):
    parser = subparsers.add_parser("simulate", help="simulate a scenario panel")
    parser.add_argument("--config", type=Path, help="SimulateConfig JSON file")
    parser.add_argument("--scenario", choices=[s.value for s in ScenarioId])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--t-train", type=int, help="training length")
    parser.add_argument("--t-holdout", type=int, help="holdout length")
    parser.add_argument("--p", type=int, help="lag order")
    parser.add_argument("--burn-in", type=int)
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.set_defaults(handler=run)
