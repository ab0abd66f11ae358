"""
Configuration settings for ClusterVAR
"""
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Projected gradient (simplex-constrained least squares)
PGD_STEP_INIT = float(os.getenv("CLUSTERVAR_PGD_STEP_INIT", "1.0"))
PGD_BETA = float(os.getenv("CLUSTERVAR_PGD_BETA", "0.5"))
PGD_ARMIJO = float(os.getenv("CLUSTERVAR_PGD_ARMIJO", "1e-4"))
PGD_MAX_ITER = int(os.getenv("CLUSTERVAR_PGD_MAX_ITER", "500"))
PGD_TOL = float(os.getenv("CLUSTERVAR_PGD_TOL", "1e-8"))

# Alternating outer loop (SCVAR / MCVAR)
OUTER_MAX_ITER = int(os.getenv("CLUSTERVAR_OUTER_MAX_ITER", "200"))
OUTER_TOL = float(os.getenv("CLUSTERVAR_OUTER_TOL", "1e-6"))

# Evaluation
EDGE_THRESHOLD = float(os.getenv("CLUSTERVAR_EDGE_THRESHOLD", "1e-6"))
SIGNIFICANCE_ALPHA = float(os.getenv("CLUSTERVAR_SIGNIFICANCE_ALPHA", "0.05"))
CV_FOLDS = int(os.getenv("CLUSTERVAR_CV_FOLDS", "5"))
# Outer tolerance of the fits that only score a grid point; the selected point is refit at OUTER_TOL
CV_OUTER_TOL = float(os.getenv("CLUSTERVAR_CV_OUTER_TOL", "1e-4"))

# Simulation
BURN_IN = int(os.getenv("CLUSTERVAR_BURN_IN", "500"))
TARGET_SPECTRAL_RADIUS = float(os.getenv("CLUSTERVAR_TARGET_SPECTRAL_RADIUS", "0.9"))

# Logging
LOG_LEVEL = os.getenv("CLUSTERVAR_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("CLUSTERVAR_LOG_FILE", "")

# Paths
BACKEND_ROOT = Path(__file__).parent
RUNS_DIR = Path(os.getenv("CLUSTERVAR_RUNS_DIR", str(BACKEND_ROOT / "data" / "runs")))


# Validation
def validate_config():
    """Validate numeric configuration ranges"""
    errors = []

    if PGD_STEP_INIT <= 0:
        errors.append("CLUSTERVAR_PGD_STEP_INIT must be positive")

    if not 0 < PGD_BETA < 1:
        errors.append("CLUSTERVAR_PGD_BETA must lie in (0, 1)")

    if not 0 < PGD_ARMIJO < 1:
        errors.append("CLUSTERVAR_PGD_ARMIJO must lie in (0, 1)")

    if PGD_MAX_ITER < 1 or OUTER_MAX_ITER < 1:
        errors.append("iteration budgets must be positive")

    if PGD_TOL <= 0 or OUTER_TOL <= 0 or CV_OUTER_TOL <= 0:
        errors.append("tolerances must be positive")

    if EDGE_THRESHOLD < 0:
        errors.append("CLUSTERVAR_EDGE_THRESHOLD must be nonnegative")

    if not 0 < SIGNIFICANCE_ALPHA < 1:
        errors.append("CLUSTERVAR_SIGNIFICANCE_ALPHA must lie in (0, 1)")

    if CV_FOLDS < 2:
        errors.append("CLUSTERVAR_CV_FOLDS must be at least 2")

    if BURN_IN < 100:
        errors.append("CLUSTERVAR_BURN_IN must be at least 100")

    if not 0 < TARGET_SPECTRAL_RADIUS < 1:
        errors.append("CLUSTERVAR_TARGET_SPECTRAL_RADIUS must lie in (0, 1)")

    if errors:
        raise ValueError(f"Configuration errors: {', '.join(errors)}")

    return True
