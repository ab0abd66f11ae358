"""
Run Manager Service
Tracks command runs, writes their output files and manifests, and cleans up failed runs
"""

import json
import logging
import platform
import shutil
import uuid
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import pydantic
import scipy
import sklearn

import clustervar
from clustervar.core.config import settings

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"


def library_versions() -> Dict[str, str]:
    return {
        "clustervar": clustervar.__version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
        "scikit-learn": sklearn.__version__,
    }


def _json_default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, pydantic.BaseModel):
        return value.model_dump(mode="json")
    return str(value)


class RunWriter:
    """Output files of one run; remembers what it wrote so a failed run can be undone"""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self._created_dir = not self.out_dir.exists()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.written: List[Path] = []

    def path(self, filename: str) -> Path:
        target = self.out_dir / filename
        target.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(target)
        return target

    def write_json(self, filename: str, data: Any) -> Path:
        target = self.path(filename)
        with open(target, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, ensure_ascii=False, default=_json_default)
        return target

    def write_csv(self, filename: str, frame: pd.DataFrame, index: bool = True) -> Path:
        target = self.path(filename)
        frame.to_csv(target, index=index, float_format="%.17g")
        return target

    def write_text(self, filename: str, text: str) -> Path:
        target = self.path(filename)
        with open(target, "w", encoding="utf-8") as f:
            f.write(text)
        return target

    def discard(self):
        """Remove everything this run wrote"""
        for target in reversed(self.written):
            if target.exists():
                target.unlink()
        if self._created_dir and self.out_dir.exists():
            shutil.rmtree(self.out_dir, ignore_errors=True)
        self.written = []


class RunManager:
    """Keeps the history of command runs in ``runs.json`` under the runs directory"""

    def __init__(self, base_path: Optional[str] = None):
        self.base_path = Path(base_path or settings.RUNS_DIR)
        self.base_path.mkdir(parents=True, exist_ok=True)
        self.runs_file = self.base_path / "runs.json"
        self._load_runs()

    def _load_runs(self):
        """Load runs from storage"""
        if self.runs_file.exists():
            with open(self.runs_file, "r", encoding="utf-8") as f:
                self.runs = json.load(f)
        else:
            self.runs = []

    def _save_runs(self):
        """Save runs to storage"""
        with open(self.runs_file, "w", encoding="utf-8") as f:
            json.dump(self.runs, f, indent=2, ensure_ascii=False)

    def create_run(self, command: str, argv: List[str], out_dir: Path) -> str:
        """Register a new run"""
        run_id = str(uuid.uuid4())
        self._load_runs()
        self.runs.append({
            "id": run_id,
            "command": command,
            "argv": list(argv),
            "out_dir": str(Path(out_dir).resolve()),
            "created_at": datetime.now().isoformat(),
            "status": "running",
        })
        self._save_runs()
        return run_id

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        """Get run by ID"""
        self._load_runs()
        for run in self.runs:
            if run["id"] == run_id:
                return run
        return None

    def update_run_status(self, run_id: str, status: str, message: Optional[str] = None):
        """Update run status"""
        self._load_runs()
        for run in self.runs:
            if run["id"] == run_id:
                run["status"] = status
                run["finished_at"] = datetime.now().isoformat()
                if message:
                    run["message"] = message
                self._save_runs()
                break

    def write_manifest(
        self,
        writer: RunWriter,
        run_id: str,
        command: str,
        argv: List[str],
        details: Dict[str, Any],
    ) -> Path:
        """Everything needed to re-run the command: argv, config, seeds, grids, decisions, versions"""
        manifest = {
            "run_id": run_id,
            "command": command,
            "argv": list(argv),
            "created_at": datetime.now().isoformat(),
            "versions": library_versions(),
            "outputs": sorted(str(p.relative_to(writer.out_dir)) for p in writer.written),
            **details,
        }
        return writer.write_json(MANIFEST_FILE, manifest)


def load_manifest(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_FILE
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
