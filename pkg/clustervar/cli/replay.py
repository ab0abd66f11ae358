"""
replay: re-run a recorded command from its manifest into a new output directory
"""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List

import clustervar.cli as cli
from clustervar.core.errors import ConfigurationError, DataError
from clustervar.services.run_manager import RunManager, load_manifest

logger = logging.getLogger(__name__)

REPLAY_CONFIG = "replay_config.json"


def _set_flag(argv: List[str], flag: str, value: str) -> List[str]:
    argv = list(argv)
    if flag in argv:
        index = argv.index(flag)
        if index + 1 >= len(argv):
            raise ConfigurationError(f"recorded argv has no value after {flag}")
        argv[index + 1] = value
    else:
        argv.extend([flag, value])
    return argv


def replay_argv(manifest: Dict[str, Any], out: Path) -> List[str]:
    """Recorded argv pointed at ``out``; a recorded --config is replaced by the stored effective config"""
    argv = list(manifest.get("argv") or [])
    if manifest.get("command") not in argv:
        raise DataError("manifest does not record the command line")
    if manifest["command"] == "replay":
        raise ConfigurationError("cannot replay a replay")

    argv = _set_flag(argv, "--out", str(out))
    if "--config" in argv and manifest.get("config") is not None:
        out.mkdir(parents=True, exist_ok=True)
        config_path = out / REPLAY_CONFIG
        with open(config_path, "w", encoding="utf-8") as f:
            json.dump(manifest["config"], f, indent=2)
        argv = _set_flag(argv, "--config", str(config_path))
    return argv


def _recorded_manifest(args: argparse.Namespace) -> Dict[str, Any]:
    """Manifest named directly, or found through the run history by run id"""
    path = args.manifest
    if args.run is not None:
        record = RunManager().get_run(args.run)
        if record is None:
            raise DataError(f"no run {args.run} in the run history")
        if record.get("status") != "completed":
            raise DataError(f"run {args.run} is {record.get('status')}, only completed runs can be replayed")
        path = Path(record["out_dir"])
    try:
        return load_manifest(path)
    except FileNotFoundError as e:
        raise DataError(f"manifest not found: {path}") from e
    except json.JSONDecodeError as e:
        raise DataError(f"manifest {path} is not valid JSON: {e}") from e


def run(args: argparse.Namespace, argv: List[str]) -> int:
    manifest = _recorded_manifest(args)
    new_argv = replay_argv(manifest, Path(args.out))
    logger.info(f"Replaying run {manifest.get('run_id')}: {' '.join(new_argv)}")
    return cli.dispatch(new_argv)


def register(subparsers):
    parser = subparsers.add_parser("replay", help="re-run a command from its manifest")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--manifest", type=Path, help="manifest.json or its run directory")
    source.add_argument("--run", help="run id from the run history")
    parser.add_argument("--out", type=Path, required=True, help="new output directory")
    parser.set_defaults(handler=run)
