"""Confounding intervals: partial identification of regression slopes
under unmeasured confounding.

Given study data (outcome, treatment, covariates) or its sufficient
statistics, and user bounds on how much of the treatment and outcome a
confounder could jointly determine, the toolkit computes the interval of
values the adjusted slope can take, full sensitivity surfaces over the
bounds, practical-significance regions, and explicit confounder columns
that attain the interval endpoints.
"""

from .errors import (
    CollinearityError,
    ConfoundError,
    DegenerateDataError,
    InfeasibleBoundsError,
    InfeasiblePointError,
    InputError,
    OracleFailureError,
    SingularityError,
)
from .estimator import ConfoundingSensitivity
from .identify import (
    AdjustmentPoint,
    BoundsSpec,
    ConfoundingInterval,
    SearchConfig,
    TransformedBounds,
    Witness,
    beta_adjusted,
    confounding_interval,
    construct_witness,
    interval_by_sampling_oracle,
    is_feasible,
    transform_bounds,
)
from .regression import (
    Dataset,
    IqrRule,
    OlsFit,
    PrepareReport,
    SufficientStats,
    fit_ols,
    partial_determination,
    prepare_dataset,
    residualize,
    sufficient_stats,
)
from .surface import (
    SurfaceGrid,
    ThresholdRegion,
    compute_surface,
    export_surface,
    import_surface,
    threshold_region,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustmentPoint",
    "BoundsSpec",
    "CollinearityError",
    "ConfoundError",
    "ConfoundingInterval",
    "ConfoundingSensitivity",
    "Dataset",
    "DegenerateDataError",
    "InfeasibleBoundsError",
    "InfeasiblePointError",
    "InputError",
    "IqrRule",
    "OlsFit",
    "OracleFailureError",
    "PrepareReport",
    "SearchConfig",
    "SingularityError",
    "SufficientStats",
    "SurfaceGrid",
    "ThresholdRegion",
    "TransformedBounds",
    "Witness",
    "beta_adjusted",
    "compute_surface",
    "confounding_interval",
    "construct_witness",
    "export_surface",
    "fit_ols",
    "import_surface",
    "interval_by_sampling_oracle",
    "is_feasible",
    "partial_determination",
    "prepare_dataset",
    "residualize",
    "sufficient_stats",
    "threshold_region",
    "transform_bounds",
    "__version__",
]
