"""Scikit-learn style front door for the toolkit.

ConfoundingSensitivity is a fit/query estimator: fit() ingests raw study
data (first feature column = treatment, remaining columns = covariates),
computes the sufficient statistics, and the query methods answer interval,
surface, region and witness questions.  It follows the sklearn estimator
contract (params stored verbatim in __init__, fitted attributes carry a
trailing underscore, get_params/set_params/clone work), so it composes with
the wider ecosystem.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .identify import (
    BoundsSpec,
    ConfoundingInterval,
    SearchConfig,
    Witness,
    confounding_interval,
    construct_witness,
)
from .regression import (
    Dataset,
    IqrRule,
    SufficientStats,
    prepare_dataset,
    sufficient_stats,
)
from .surface import SurfaceGrid, ThresholdRegion, compute_surface, threshold_region


class ConfoundingSensitivity(BaseEstimator):
    """Partial identification of a regression slope under unmeasured confounding.

    Parameters
    ----------
    outlier_multiplier : float or None
        If set, drop rows whose raw treatment exceeds Q3 + multiplier * IQR
        before fitting (two-sided if outlier_two_sided).
    outlier_two_sided : bool
        Also drop rows below Q1 - multiplier * IQR.
    rho_f_bounds : (float, float)
        Bounds on the correlation of the fitted confounder directions.
    grid_points, refine_iters : int
        Search resolution of the interval optimizer.
    realizability : bool
        Restrict the optimizer to geometries realizable by actual confounder
        columns (default).  False reproduces the conservative box relaxation.

    Attributes
    ----------
    stats_ : SufficientStats
    dataset_ : Dataset
    prepare_report_ : PrepareReport
    n_features_in_ : int

    Examples
    --------
    >>> est = ConfoundingSensitivity().fit(X, y)   # X[:, 0] is the treatment
    >>> est.interval(bx=0.6, by=0.45)
    """

    def __init__(
        self,
        *,
        outlier_multiplier: float | None = None,
        outlier_two_sided: bool = False,
        rho_f_bounds: tuple[float, float] = (-1.0, 1.0),
        grid_points: int = 201,
        refine_iters: int = 40,
        realizability: bool = True,
    ):
        self.outlier_multiplier = outlier_multiplier
        self.outlier_two_sided = outlier_two_sided
        self.rho_f_bounds = rho_f_bounds
        self.grid_points = grid_points
        self.refine_iters = refine_iters
        self.realizability = realizability

    # ------------------------------------------------------------------
    def fit(self, X, y):
        """Compute sufficient statistics from outcome y and features X.

        X has the treatment in column 0 and covariates in the remaining
        columns; a pandas DataFrame contributes its column names as labels.
        """
        columns = None
        if hasattr(X, "columns"):
            columns = [str(c) for c in X.columns]
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y have different numbers of rows")
        names = columns or ["x"] + [f"w{j}" for j in range(1, X.shape[1])]
        raw = {"y": y}
        raw.update({names[j]: X[:, j] for j in range(X.shape[1])})
        rule = (
            IqrRule(self.outlier_multiplier, self.outlier_two_sided)
            if self.outlier_multiplier is not None
            else None
        )
        dataset, report = prepare_dataset(
            raw,
            roles={"y": "y", "x": names[0], "w": names[1:]},
            outlier_rule=rule,
        )
        self.dataset_: Dataset = dataset
        self.prepare_report_ = report
        self.stats_: SufficientStats = sufficient_stats(dataset)
        self.n_features_in_ = X.shape[1]
        if columns is not None:
            self.feature_names_in_ = np.asarray(columns, dtype=object)
        return self

    @classmethod
    def from_stats(cls, stats: SufficientStats, **params) -> "ConfoundingSensitivity":
        """Fitted estimator straight from sufficient statistics (no raw data)."""
        stats.validate()
        est = cls(**params)
        est.stats_ = stats
        est.n_features_in_ = 0
        return est

    # ------------------------------------------------------------------
    def _search(self) -> SearchConfig:
        return SearchConfig(
            grid_points=self.grid_points,
            refine_iters=self.refine_iters,
            realizability=self.realizability,
        )

    def interval(self, bx: float, by: float) -> ConfoundingInterval:
        """Confounding interval [L, U] for bounds (bx, by)."""
        check_is_fitted(self, "stats_")
        return confounding_interval(
            self.stats_,
            BoundsSpec(bx, by),
            rho_f_bounds=self.rho_f_bounds,
            search=self._search(),
        )

    def surface(self, resolution: int = 101) -> SurfaceGrid:
        """L/U sensitivity surfaces over a bounds grid."""
        check_is_fitted(self, "stats_")
        return compute_surface(
            self.stats_, resolution, rho_f_bounds=self.rho_f_bounds
        )

    def region(
        self, beta_star: float, direction: str = "below", resolution: int = 101
    ) -> ThresholdRegion:
        """Bound pairs guaranteeing the interval clears beta_star."""
        return threshold_region(self.surface(resolution), beta_star, direction)

    def witness(self, bx: float, by: float, side: str = "upper", n: int | None = None) -> Witness:
        """Explicit confounder columns attaining an interval endpoint."""
        check_is_fitted(self, "stats_")
        ci = self.interval(bx, by)
        point = ci.upper_witness if side == "upper" else ci.lower_witness
        rows = n or self.stats_.n or 60
        return construct_witness(self.stats_, point, rows)
