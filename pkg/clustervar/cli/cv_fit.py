"""
cv-fit: choose hyperparameters by blocked cross-validation, then refit on the full training window
"""

import argparse
import logging
from typing import Any, Dict, List

import pandas as pd

from clustervar.cli.common import execute
from clustervar.cli.fit import add_fit_arguments, fit_and_save, fit_config_from_args, prepare_training
from clustervar.services.cv import grid_search_cv
from clustervar.services.run_manager import RunWriter
from clustervar.services.timeseries import build_lag_design

logger = logging.getLogger(__name__)


def run(args: argparse.Namespace, argv: List[str]) -> int:
    def body(writer: RunWriter) -> Dict[str, Any]:
        config = fit_config_from_args(args)
        if args.folds is not None:
            config = config.model_copy(update={"folds": args.folds})
        train, raw_train, raw_holdout = prepare_training(config)

        result = grid_search_cv(
            build_lag_design(train, config.p),
            config.method,
            config.grid,
            config.folds,
            config.pgd,
            config.outer,
            config.mcvar_init,
        )
        table = pd.DataFrame.from_records(
            [{**row.point(), "mean_mse": row.mean_mse, **{f"fold{i + 1}": v for i, v in enumerate(row.fold_mse)}}
             for row in result.table]
        )
        writer.write_csv("cv_table.csv", table, index=False)
        writer.write_json("cv.json", result.model_dump(mode="json"))

        details = fit_and_save(writer, config, train, raw_train, raw_holdout, result.best)
        details["cv"] = {"folds": result.folds, "best": result.best, "grid": config.grid.model_dump(mode="json")}
        return details

    return execute("cv-fit", argv, args.out, body)


def register(subparsers):
    parser = subparsers.add_parser("cv-fit", help="tune hyperparameters by blocked CV, then fit")
    add_fit_arguments(parser)
    parser.add_argument("--folds", type=int, help="number of CV folds")
    parser.set_defaults(handler=run)
