"""
Helpers shared by the subcommands: config loading, model persistence and the run wrapper
"""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from clustervar.core.config import settings
from clustervar.core.errors import ClusterVarError, ConfigurationError, DataError
from clustervar.models.experiment import CsvSchema, MethodName
from clustervar.models.panel import TimeSeriesPanel, TransformSpec
from clustervar.models.var import BaselineKind, BaselineModel
from clustervar.services.evaluate import w_frame, w_from_frame
from clustervar.services.ingest import load_csv_panel
from clustervar.services.methods import FittedModel
from clustervar.services.run_manager import RunManager, RunWriter

logger = logging.getLogger(__name__)

ConfigT = TypeVar("ConfigT", bound=BaseModel)

MODEL_FILE = "model.json"
W_FILE = "W.csv"
TRAIN_TAIL_FILE = "train_tail.csv"
RAW_CONTEXT_FILE = "raw_context.csv"

# Recorded in every manifest
DECISIONS = {
    "cv_folds": "contiguous chronological blocks of design rows",
    "cv_tie_break": "larger lambda, then smaller kappa, then smaller r",
    "edge_rule": "block norm > threshold * (1 + ||W||_F) / K",
    "holdout_context": "last p training rows prepended",
    "zscore_stats": "training window only",
    "significance_pairing": "per holdout point, squared error averaged across series, pooled over seeds",
}


class CliParser(argparse.ArgumentParser):
    """argparse parser whose usage errors map to exit code 1"""

    def error(self, message: str):
        raise ConfigurationError(message)


def load_config(path: Path, model: Type[ConfigT], overrides: Optional[Dict[str, Any]] = None) -> ConfigT:
    """Parse a JSON config file; flags in ``overrides`` win over file values"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise ConfigurationError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return build_config(model, raw, overrides)


def build_config(model: Type[ConfigT], raw: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> ConfigT:
    merged = dict(raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, dict):
            merged[key] = {**merged.get(key, {}), **{k: v for k, v in value.items() if v is not None}}
        else:
            merged[key] = value
    try:
        return model.model_validate(merged)
    except ValidationError as e:
        raise ConfigurationError(f"invalid {model.__name__}: {e}") from e


def panel_frame(panel: TimeSeriesPanel) -> pd.DataFrame:
    return pd.DataFrame(np.asarray(panel.values), columns=list(panel.names))


def read_panel_csv(path: Path, names: Optional[List[str]] = None) -> TimeSeriesPanel:
    """Headered numeric CSV; extra columns (e.g. a date) are ignored when ``names`` is given"""
    return load_csv_panel(path, CsvSchema(date_column=None, series=names))


def save_fitted(writer: RunWriter, fitted: FittedModel, names: List[str], p: int, extra: Optional[Dict[str, Any]] = None):
    """model.json, W.csv, the structural state and the objective trace"""
    record: Dict[str, Any] = {
        "method": fitted.method.value,
        "p": p,
        "names": list(names),
        "hyperparameters": fitted.hyperparameters,
        **(extra or {}),
    }
    model = fitted.model
    if isinstance(model, BaselineModel) and model.means is not None:
        record["means"] = model.means.tolist()
    if fitted.var_model is not None:
        writer.write_csv(W_FILE, w_frame(fitted.var_model))

    if fitted.state is not None:
        state = fitted.state.model_dump(mode="json")
        trace = state.pop("objective_trace")
        writer.write_json("state.json", state)
        writer.write_csv(
            "objective_trace.csv",
            pd.DataFrame({"iteration": np.arange(1, len(trace) + 1), "objective": trace}),
            index=False,
        )
    writer.write_json(MODEL_FILE, record)


def load_fitted(model_dir: Path):
    """Forecaster saved by ``save_fitted``"""
    model_dir = Path(model_dir)
    try:
        with open(model_dir / MODEL_FILE, "r", encoding="utf-8") as f:
            record = json.load(f)
    except FileNotFoundError as e:
        raise DataError(f"no fitted model in {model_dir}") from e

    method = MethodName(record["method"])
    names, p = tuple(record["names"]), int(record["p"])
    if method in (MethodName.MEAN, MethodName.RW):
        return BaselineModel(kind=BaselineKind(method.value), p=p, names=names, means=record.get("means")), record

    var_model = w_from_frame(pd.read_csv(model_dir / W_FILE, index_col=0), p)
    if method in (MethodName.SCVAR, MethodName.MCVAR):
        return var_model, record
    return BaselineModel(
        kind=BaselineKind(method.value), p=p, names=names, W=var_model.W, hyperparameters=record["hyperparameters"]
    ), record


def transform_log(record: Dict[str, Any]) -> List[TransformSpec]:
    return [TransformSpec.model_validate(spec) for spec in record.get("transform_log", [])]


def execute(
    command: str,
    argv: List[str],
    out_dir: Path,
    body: Callable[[RunWriter], Dict[str, Any]],
    runs_dir: Optional[Path] = None,
) -> int:
    """Run ``body`` against a fresh writer, then write the manifest.

    On failure everything the run wrote is removed and the mapped exit code returned.
    """
    manager = RunManager(runs_dir or settings.RUNS_DIR)
    run_id = manager.create_run(command, argv, out_dir)
    writer = RunWriter(out_dir)
    try:
        details = body(writer) or {}
        manager.write_manifest(writer, run_id, command, argv, {"decisions": DECISIONS, **details})
    except ClusterVarError as e:
        return _fail(manager, run_id, writer, e, e.exit_code)
    except ValidationError as e:
        return _fail(manager, run_id, writer, e, DataError.exit_code)
    except OSError as e:
        return _fail(manager, run_id, writer, e, DataError.exit_code)

    manager.update_run_status(run_id, "completed")
    logger.info(f"{command} finished; outputs in {writer.out_dir}")
    return 0


def _fail(manager: RunManager, run_id: str, writer: RunWriter, error: Exception, code: int) -> int:
    logger.error(f"{type(error).__name__}: {error}")
    writer.discard()
    manager.update_run_status(run_id, "failed", str(error))
    return code
