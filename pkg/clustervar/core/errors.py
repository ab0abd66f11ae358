"""
Error types shared by services and the command line.

Each error carries the process exit code the CLI reports for it.
"""


class ClusterVarError(Exception):
    """Base class for all ClusterVAR failures"""

    exit_code = 1


class ConfigurationError(ClusterVarError):
    """Invalid command, flag or config file"""

    exit_code = 1


class DataError(ClusterVarError, ValueError):
    """Input data violates a precondition (shape, positivity, ordering...)"""

    exit_code = 2


class NumericalError(ClusterVarError, ArithmeticError):
    """A solver produced a singular system or a non-finite objective"""

    exit_code = 3
