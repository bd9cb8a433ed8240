"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes, so raising the right class
matters: ConfigError -> 2, DataError/FormatError -> 3, AmbiguityError -> 4,
BudgetExceededError -> 5. Anything else is a plain failure (1).
"""


class WorkbenchError(Exception):
    """Base class for all package errors."""


class ConfigError(WorkbenchError):
    """Invalid or mutually inconsistent configuration."""


class DataError(WorkbenchError):
    """Malformed dataset input or loader failure."""


class FormatError(WorkbenchError):
    """Corrupt or mismatched binary artifact (model/key file)."""


class DimensionMismatchError(WorkbenchError):
    """Operands of an element-wise operation disagree on dimension."""


class InvalidDimensionError(WorkbenchError):
    """A dimension parameter is zero or otherwise unusable."""


class DegenerateVectorError(WorkbenchError):
    """Vector with zero norm fed to a similarity that needs one."""


class KeyValidationError(WorkbenchError):
    """Lock key inconsistent with its base pool."""


class TrainingError(WorkbenchError):
    """Training preconditions violated (e.g. an empty class)."""


class AmbiguityError(WorkbenchError):
    """An attack decision had no clear winner.

    Carries the tied candidates so callers can report them.
    """

    def __init__(self, message, candidates=None):
        super().__init__(message)
        self.candidates = candidates if candidates is not None else []


class BudgetExceededError(WorkbenchError):
    """A guess sweep would exceed the configured budget cap."""
