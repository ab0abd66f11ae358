"""
init-config: write a template config with every default filled in
"""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List

from clustervar.core.errors import ConfigurationError
from clustervar.models.experiment import FitConfig, SimulateConfig, SweepConfig

logger = logging.getLogger(__name__)


def template(kind: str) -> Dict[str, Any]:
    if kind == "fit":
        config = FitConfig.model_validate({
            "method": "scvar",
            "data": {"path": "data.csv"},
            "hyperparameters": {"lam": 0.1, "kappa": 1.0},
        })
    elif kind == "sweep":
        config = SweepConfig.model_validate({"scenario": "A", "seeds": [0, 1, 2]})
    elif kind == "simulate":
        config = SimulateConfig.model_validate({"scenario": "A"})
    else:
        raise ConfigurationError(f"unknown config kind '{kind}'")
    return config.model_dump(mode="json")


def run(args: argparse.Namespace, argv: List[str]) -> int:
    out = Path(args.out)
    if out.exists() and not args.force:
        raise ConfigurationError(f"{out} exists; pass --force to overwrite")
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(template(args.kind), f, indent=2)
    logger.info(f"Wrote {args.kind} config template to {out}")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("init-config", help="write a template config file")
    parser.add_argument("--kind", choices=["fit", "sweep", "simulate"], required=True)
    parser.add_argument("--out", type=Path, required=True, help="config file to write")
    parser.add_argument("--force", action="store_true", help="overwrite an existing file")
    parser.set_defaults(handler=run)
