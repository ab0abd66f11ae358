"""
Application configuration settings
"""

from pathlib import Path

try:
    from config import (
        PGD_STEP_INIT,
        PGD_BETA,
        PGD_ARMIJO,
        PGD_MAX_ITER,
        PGD_TOL,
        OUTER_MAX_ITER,
        OUTER_TOL,
        EDGE_THRESHOLD,
        SIGNIFICANCE_ALPHA,
        CV_FOLDS,
        CV_OUTER_TOL,
        BURN_IN,
        TARGET_SPECTRAL_RADIUS,
        LOG_LEVEL,
        LOG_FILE,
        RUNS_DIR,
    )
except ImportError:
    # Fallback values if config.py is not on the path
    PGD_STEP_INIT = 1.0
    PGD_BETA = 0.5
    PGD_ARMIJO = 1e-4
    PGD_MAX_ITER = 500
    PGD_TOL = 1e-8
    OUTER_MAX_ITER = 200
    OUTER_TOL = 1e-6
    EDGE_THRESHOLD = 1e-6
    SIGNIFICANCE_ALPHA = 0.05
    CV_FOLDS = 5
    CV_OUTER_TOL = 1e-4
    BURN_IN = 500
    TARGET_SPECTRAL_RADIUS = 0.9
    LOG_LEVEL = "INFO"
    LOG_FILE = ""
    RUNS_DIR = Path("./data/runs")


class Settings:
    """Application settings"""

    # Projected gradient
    PGD_STEP_INIT: float = PGD_STEP_INIT
    PGD_BETA: float = PGD_BETA
    PGD_ARMIJO: float = PGD_ARMIJO
    PGD_MAX_ITER: int = PGD_MAX_ITER
    PGD_TOL: float = PGD_TOL

    # Alternating minimisation
    OUTER_MAX_ITER: int = OUTER_MAX_ITER
    OUTER_TOL: float = OUTER_TOL

    # Evaluation
    EDGE_THRESHOLD: float = EDGE_THRESHOLD
    SIGNIFICANCE_ALPHA: float = SIGNIFICANCE_ALPHA
    CV_FOLDS: int = CV_FOLDS
    CV_OUTER_TOL: float = CV_OUTER_TOL

    # Simulation
    BURN_IN: int = BURN_IN
    TARGET_SPECTRAL_RADIUS: float = TARGET_SPECTRAL_RADIUS

    # Logging
    LOG_LEVEL: str = LOG_LEVEL
    LOG_FILE: str = LOG_FILE

    # Run storage
    RUNS_DIR: Path = Path(RUNS_DIR)


settings = Settings()
