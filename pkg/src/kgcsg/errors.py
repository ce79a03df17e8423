"""Exception hierarchy shared by the library and the CLI.

The CLI maps each class to a fixed process exit code, so library code
should always raise one of these for anticipated failure modes.
"""


class KgcsgError(Exception):
    """Base class for all anticipated failures."""

    exit_code = 1


class ConfigError(KgcsgError):
    """Invalid parameters or flag combinations (exit code 1)."""

    exit_code = 1


class DataError(KgcsgError):
    """Malformed or inconsistent input data (exit code 2)."""

    exit_code = 2


class NumericError(KgcsgError):
    """Numerical failure, e.g. eigensolver breakdown (exit code 3)."""

    exit_code = 3
