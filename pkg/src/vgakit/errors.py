"""Exception hierarchy with stable CLI exit codes.

Every command maps a failure to one of four error classes so scripts can
branch on the exit status: parse (3), schema (4), infeasible (5), numeric (6).
"""


class VgakitError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(VgakitError):
    """Malformed input text: bad CSV cell, bad grid file, bad config line."""

    exit_code = 3


class SchemaError(VgakitError):
    """Structurally wrong input: missing/extra columns, unknown label or attribute."""

    exit_code = 4


class InfeasibleError(VgakitError):
    """Request that cannot be satisfied: invalid layout spec, k > instance count."""

    exit_code = 5


class NumericError(VgakitError):
    """Undefined or degenerate numeric operation: mean depth of a single node."""

    exit_code = 6


class TrainingError(VgakitError):
    """Learner failure during cross-validation; carries the failing fold index."""

    exit_code = 1

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"training failed on fold {fold}: {cause}")
        self.fold = fold
