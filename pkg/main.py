"""
ClusterVAR - command-line entry point

Usage:
  python main.py simulate --scenario A --seed 0 --t-train 100 --t-holdout 500 --out runs/simA
  python main.py fit --method scvar --data runs/simA/train.csv --no-date --lam 10 --kappa 1 --out runs/fitA
  python main.py evaluate --model runs/fitA --holdout runs/simA/holdout.csv --truth runs/simA --out runs/evalA
  python main.py sweep --config sweep.json --out runs/sweepA --n-jobs 4
"""

import sys
from typing import List, Optional

from config import validate_config
from clustervar.cli import dispatch
from clustervar.core.errors import ConfigurationError
from clustervar.core.logging import setup_logging


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging()
    try:
        validate_config()
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return ConfigurationError.exit_code
    argv = list(sys.argv[1:] if argv is None else argv)
    return dispatch(argv)


if __name__ == "__main__":
    raise SystemExit(main())
