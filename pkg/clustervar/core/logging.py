"""
Logging configuration
"""

import logging
import sys
from pathlib import Path
from typing import Optional

from clustervar.core.config import settings


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None):
    """Setup application logging"""

    level_name = (level or settings.LOG_LEVEL).upper()
    handlers = [logging.StreamHandler(sys.stdout)]

    log_file = log_file if log_file is not None else settings.LOG_FILE
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_path))

    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )
