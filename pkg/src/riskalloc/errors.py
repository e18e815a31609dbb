"""Exception hierarchy shared by the library and the command line.

Every error carries a short ``code`` slug and the process exit status the
CLI maps it to (1 usage/config, 2 data, 3 numeric/degenerate).
"""


class RiskAllocError(Exception):
    exit_code = 1
    kind = "error"

    def __init__(self, message: str, code: str = "error"):
        super().__init__(message)
        self.code = code

    def one_line(self) -> str:
        msg = " ".join(str(self).split())
        return f"{self.kind}/{self.code}: {msg}"


class ConfigError(RiskAllocError, ValueError):
    """Bad arguments, bad config documents, invalid parameter combinations."""

    exit_code = 1
    kind = "usage"


class DataError(RiskAllocError, ValueError):
    """Malformed, missing or inconsistent market data."""

    exit_code = 2
    kind = "data"


class NumericError(RiskAllocError, ArithmeticError):
    """A statistic is undefined for the given input (zero variance etc.)."""

    exit_code = 3
    kind = "numeric"
