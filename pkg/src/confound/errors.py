"""Exception types shared across the toolkit.

The CLI maps these onto exit codes (input/usage -> 2, data -> 3,
infeasible bounds -> 4) and the HTTP service onto status codes
(400 for parse errors, 422 for data/bounds errors).
"""


class ConfoundError(Exception):
    """Base class for all toolkit errors."""


class InputError(ConfoundError):
    """Malformed user input: missing/non-numeric columns, bad flags."""


class DegenerateDataError(ConfoundError):
    """Data cannot support the analysis (too few rows, zero residual variance)."""


class CollinearityError(DegenerateDataError):
    """Treatment/covariate columns are linearly dependent."""


class InfeasibleBoundsError(ConfoundError):
    """User bounds fall below the measured coefficients of determination."""


class InfeasiblePointError(ConfoundError):
    """An adjustment point is not realizable by any confounder geometry."""


class SingularityError(ConfoundError):
    """Adjusted-slope formula is singular (treatment residual fully explained)."""


class OracleFailureError(ConfoundError):
    """Sampling oracle found no feasible points (should never happen in the box)."""
