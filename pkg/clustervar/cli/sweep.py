"""
sweep: every method over a list of training sizes, written as comparison tables
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd

from clustervar.cli.common import execute, load_config
from clustervar.models.experiment import SweepConfig
from clustervar.services.run_manager import RunWriter
from clustervar.services.sweep import SweepResult, run_sweep

logger = logging.getLogger(__name__)

TABLES = ("relative_mse", "granger_accuracy", "n_edges", "n_leading", "significance")


def combined_table(result: SweepResult) -> pd.DataFrame:
    """Long table: one row per (size, method) with every metric and the significance string"""
    combined = None
    for name in TABLES:
        long = getattr(result, name)().reset_index().melt(id_vars="size", var_name="method", value_name=name)
        combined = long if combined is None else combined.merge(long, on=["size", "method"])
    return combined


def run(args: argparse.Namespace, argv: List[str]) -> int:
    def body(writer: RunWriter) -> Dict[str, Any]:
        config = load_config(args.config, SweepConfig, {"n_jobs": args.n_jobs})
        result = run_sweep(config)

        for name in TABLES:
            writer.write_csv(f"{name}.csv", getattr(result, name)())
        writer.write_csv("cells.csv", result.cells_frame(), index=False)
        writer.write_csv("table.csv", combined_table(result), index=False)
        writer.write_json("config.json", config.model_dump(mode="json"))

        return {
            "config": config.model_dump(mode="json"),
            "seeds": config.seeds,
            "grid": config.grid.model_dump(mode="json"),
            "reference": config.reference,
        }

    return execute("sweep", argv, args.out, body)


def register(subparsers):
    parser = subparsers.add_parser("sweep", help="compare methods across training sizes")
    parser.add_argument("--config", type=Path, required=True, help="SweepConfig JSON file")
    parser.add_argument("--n-jobs", type=int, help="worker processes")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.set_defaults(handler=run)
