"""
fit: train one method at a fixed hyperparameter point
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from clustervar.cli.common import (
    RAW_CONTEXT_FILE,
    TRAIN_TAIL_FILE,
    build_config,
    execute,
    load_config,
    panel_frame,
    save_fitted,
)
from clustervar.core.errors import DataError
from clustervar.models.experiment import FitConfig, MethodName
from clustervar.models.panel import TimeSeriesPanel
from clustervar.services.ingest import load_source, run_pipeline, source_plan, transform_split
from clustervar.services.mcvar import cluster_assignments
from clustervar.services.methods import fit_method
from clustervar.services.run_manager import RunWriter
from clustervar.services.timeseries import build_lag_design, split_holdout

logger = logging.getLogger(__name__)


def add_fit_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="FitConfig JSON file")
    parser.add_argument("--method", choices=[m.value for m in MethodName])
    parser.add_argument("--data", type=Path, help="input CSV (overrides data.path)")
    parser.add_argument("--date-column", help="name of the date column")
    parser.add_argument("--no-date", action="store_true", help="the CSV has no date column")
    parser.add_argument("--p", type=int, help="lag order")
    parser.add_argument("--n-holdout", type=int, help="keep the last N raw points out of training")
    parser.add_argument("--lam", type=float)
    parser.add_argument("--kappa", type=float)
    parser.add_argument("--r", type=int)
    parser.add_argument("--out", type=Path, required=True, help="output directory")


def fit_config_from_args(args: argparse.Namespace) -> FitConfig:
    csv: Dict[str, Any] = {}
    if args.no_date:
        csv["date_column"] = None
    elif args.date_column:
        csv["date_column"] = args.date_column
    data: Dict[str, Any] = {"path": str(args.data) if args.data else None}
    overrides = {
        "method": args.method,
        "p": args.p,
        "n_holdout": args.n_holdout,
        "hyperparameters": {"lam": args.lam, "kappa": args.kappa, "r": args.r},
    }
    if args.config is not None:
        config = load_config(args.config, FitConfig, overrides)
        if data["path"] or csv:
            merged = config.data.model_dump(mode="json")
            merged["path"] = data["path"] or merged["path"]
            merged["csv"] = {**merged["csv"], **csv}
            config = build_config(FitConfig, config.model_dump(mode="json"), {"data": merged})
        return config
    if data["path"] is None:
        raise DataError("fit needs --config or --data")
    if csv:
        data["csv"] = csv
    return build_config(FitConfig, {"data": data}, overrides)


def prepare_training(config: FitConfig) -> Tuple[TimeSeriesPanel, TimeSeriesPanel, Optional[TimeSeriesPanel]]:
    """Processed training panel, raw training panel and the raw holdout (if any)"""
    raw = load_source(config.data)
    plan = source_plan(config.data)
    if config.n_holdout is None:
        return run_pipeline(raw, plan), raw, None
    raw_train, raw_holdout = split_holdout(raw, config.n_holdout)
    train, _ = transform_split(raw, plan, config.n_holdout)
    return train, raw_train, raw_holdout


def fit_and_save(
    writer: RunWriter, config: FitConfig, train: TimeSeriesPanel, raw_train: TimeSeriesPanel,
    raw_holdout: Optional[TimeSeriesPanel], point: Dict[str, Any],
) -> Dict[str, Any]:
    design = build_lag_design(train, config.p)
    fitted = fit_method(config.method, design, point, config.pgd, config.outer, config.mcvar_init)

    extra: Dict[str, Any] = {"transform_log": [spec.model_dump(mode="json") for spec in train.transform_log]}
    if config.method == MethodName.MCVAR:
        extra["clusters"] = cluster_assignments(fitted.state.G).tolist()
    writer.write_json("config.json", config.model_dump(mode="json"))
    save_fitted(writer, fitted, list(train.names), config.p, extra)

    writer.write_csv(TRAIN_TAIL_FILE, panel_frame(train.rows(train.n_obs - config.p, None)), index=False)
    if train.transform_log:
        writer.write_csv(RAW_CONTEXT_FILE, panel_frame(raw_train), index=False)
    if raw_holdout is not None:
        writer.write_csv("holdout_raw.csv", panel_frame(raw_holdout), index=False)

    return {"config": config.model_dump(mode="json"), "hyperparameters": fitted.hyperparameters}


def run(args: argparse.Namespace, argv: List[str]) -> int:
    def body(writer: RunWriter) -> Dict[str, Any]:
        config = fit_config_from_args(args)
        train, raw_train, raw_holdout = prepare_training(config)
        point = config.hyperparameters.model_dump(exclude_none=True)
        return fit_and_save(writer, config, train, raw_train, raw_holdout, point)

    return execute("fit", argv, args.out, body)


def register(subparsers):
    parser = subparsers.add_parser("fit", help="fit one method at fixed hyperparameters")
    add_fit_arguments(parser)
    parser.set_defaults(handler=run)
