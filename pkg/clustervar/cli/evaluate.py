"""
evaluate: score a fitted model on a holdout CSV
"""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from clustervar.cli.common import (
    RAW_CONTEXT_FILE,
    TRAIN_TAIL_FILE,
    execute,
    load_fitted,
    read_panel_csv,
    transform_log,
)
from clustervar.core.config import settings
from clustervar.core.errors import DataError
from clustervar.models.evaluation import GrangerGraph
from clustervar.models.panel import TimeSeriesPanel
from clustervar.models.var import BaselineKind, BaselineModel, VarModel
from clustervar.services.evaluate import evaluate_model, granger_graph_from_w, w_from_frame
from clustervar.services.ingest import transform_holdout
from clustervar.services.run_manager import RunWriter
from clustervar.services.timeseries import build_holdout_design

logger = logging.getLogger(__name__)


def load_truth(truth_dir: Path) -> Tuple[VarModel, GrangerGraph]:
    """True W and graph written by ``simulate``"""
    truth_dir = Path(truth_dir)
    try:
        frame = pd.read_csv(truth_dir / "true_W.csv", index_col=0)
        with open(truth_dir / "truth_graph.json", "r", encoding="utf-8") as f:
            graph = json.load(f)
    except FileNotFoundError as e:
        raise DataError(f"no simulation ground truth in {truth_dir}") from e

    n_series = frame.shape[1]
    if frame.shape[0] % n_series:
        raise DataError(f"true_W.csv in {truth_dir} is not Kp x K")
    model = w_from_frame(frame, frame.shape[0] // n_series)
    return model, GrangerGraph(adjacency=graph["adjacency"], names=tuple(graph["nodes"]))


def holdout_panel(model_dir: Path, holdout_path: Path, record: Dict[str, Any]) -> Tuple[TimeSeriesPanel, TimeSeriesPanel]:
    """Processed training tail and processed holdout; raw holdouts pass through the recorded transforms"""
    names = list(record["names"])
    tail = read_panel_csv(Path(model_dir) / TRAIN_TAIL_FILE, names)
    holdout = read_panel_csv(holdout_path, names)
    log = transform_log(record)
    if log:
        raw_context = read_panel_csv(Path(model_dir) / RAW_CONTEXT_FILE, names)
        holdout = transform_holdout(raw_context, holdout, log)
    return tail, holdout


def run(args: argparse.Namespace, argv: List[str]) -> int:
    def body(writer: RunWriter) -> Dict[str, Any]:
        model, record = load_fitted(args.model)
        tail, holdout = holdout_panel(args.model, args.holdout, record)
        p = int(record["p"])
        design = build_holdout_design(tail, holdout, p)

        truth: Optional[GrangerGraph] = None
        if args.truth is not None:
            reference, truth = load_truth(args.truth)
            if tuple(truth.names) != tuple(design.names):
                raise DataError("ground-truth series do not match the model's series")
            if reference.p != p:
                raise DataError(f"ground truth has p={reference.p}, the model p={p}")
        else:
            reference = BaselineModel(kind=BaselineKind.RW, p=p, names=design.names)

        threshold = args.threshold if args.threshold is not None else settings.EDGE_THRESHOLD
        report = evaluate_model(record["method"], model, design, reference, truth, threshold)
        writer.write_json("report.json", report.model_dump(mode="json"))

        var_model = model.as_var_model() if isinstance(model, BaselineModel) else model
        if var_model is not None:
            graph = granger_graph_from_w(var_model, threshold)
            writer.write_json("graph.json", graph.to_json_dict())
            writer.write_text("graph.dot", graph.to_dot(record["method"]))

        return {
            "model_dir": str(args.model),
            "holdout": str(args.holdout),
            "truth": str(args.truth) if args.truth is not None else None,
            "reference": "true" if args.truth is not None else "rw",
            "threshold": threshold,
        }

    return execute("evaluate", argv, args.out, body)


def register(subparsers):
    parser = subparsers.add_parser("evaluate", help="score a fitted model on a holdout CSV")
    parser.add_argument("--model", type=Path, required=True, help="output directory of fit or cv-fit")
    parser.add_argument("--holdout", type=Path, required=True, help="holdout CSV, raw scale")
    parser.add_argument("--truth", type=Path, help="output directory of simulate")
    parser.add_argument("--threshold", type=float, help="edge threshold")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.set_defaults(handler=run)
