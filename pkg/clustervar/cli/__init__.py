"""
Command-line interface: one module per subcommand, each exposing ``register``
"""

import logging
from typing import List

from pydantic import ValidationError

from clustervar.cli.common import CliParser
from clustervar.cli import cv_fit, evaluate, fit, init_config, replay, simulate, sweep
from clustervar.core.errors import ClusterVarError, DataError

logger = logging.getLogger(__name__)

SUBCOMMANDS = (simulate, fit, cv_fit, evaluate, sweep, init_config, replay)


def build_parser() -> CliParser:
    parser = CliParser(prog="clustervar", description="Clustered sparse VAR forecasting")
    parser.add_argument("--log-level", type=str.upper, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)
    for module in SUBCOMMANDS:
        module.register(subparsers)
    return parser


def dispatch(argv: List[str]) -> int:
    """Parse ``argv`` and run the chosen subcommand; returns the process exit code"""
    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            logging.getLogger().setLevel(args.log_level)
        return args.handler(args, list(argv))
    except ClusterVarError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Invalid input: {e}")
        return DataError.exit_code
