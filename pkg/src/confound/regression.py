"""Least-squares machinery: centering, OLS, residualization, sufficient statistics.

All fits go through a QR/SVD-based solver (never raw normal equations) so that
moderately ill-conditioned covariate blocks with indicator columns stay stable.
Intercepts are handled solely by centering; no constant column ever enters a fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CollinearityError, DegenerateDataError, InputError

# Relative singular-value cutoff below which a column set is declared dependent.
COLLINEARITY_RTOL = 1e-10


@dataclass(frozen=True)
class OlsFit:
    """Result of a least-squares fit of a centered response on centered regressors."""

    coefficients: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    r_squared: float


@dataclass(frozen=True)
class Dataset:
    """Centered study data: outcome y, treatment x, covariate matrix w (n x p).

    Columns are mean zero; x and the w columns are linearly independent.
    Interaction covariates, if wanted, are supplied as precomputed w columns.
    """

    y: np.ndarray
    x: np.ndarray
    w: np.ndarray
    labels: dict = field(default_factory=dict)
    units: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.w.shape[1]

    def validate(self) -> None:
        n, p = self.n, self.p
        if self.x.shape != (n,) or self.w.shape != (n, p):
            raise InputError("y, x and w must have matching row counts")
        if n < p + 3:
            raise DegenerateDataError(
                f"need at least p + 3 = {p + 3} rows after filtering, got {n}"
            )
        for name, col in (("y", self.y), ("x", self.x)):
            _check_centered(col, name)
        for j in range(p):
            _check_centered(self.w[:, j], self.w_label(j))
        _check_independent(self.x, self.w, self.labels)

    def w_label(self, j: int) -> str:
        names = self.labels.get("w", [])
        return names[j] if j < len(names) else f"w{j + 1}"


@dataclass(frozen=True)
class SufficientStats:
    """The four numbers that drive interval computation, plus the fitted slope.

    sd_ratio is the ratio of residual standard deviations (y-units per x-unit),
    rho_xy the correlation of the two residual vectors, and r2_wx / r2_wy the
    coefficients of determination of treatment and outcome on the covariates.
    """

    sd_ratio: float
    rho_xy: float
    r2_wx: float
    r2_wy: float
    beta_xy_given_w: float = None  # type: ignore[assignment]
    n: int | None = None

    def __post_init__(self):
        if self.beta_xy_given_w is None:
            object.__setattr__(self, "beta_xy_given_w", self.sd_ratio * self.rho_xy)

    def validate(self) -> None:
        if not self.sd_ratio > 0:
            raise InputError(f"sd_ratio must be positive, got {self.sd_ratio}")
        if not -1.0 <= self.rho_xy <= 1.0:
            raise InputError(f"rho_xy must be in [-1, 1], got {self.rho_xy}")
        for name, r2 in (("r2_wx", self.r2_wx), ("r2_wy", self.r2_wy)):
            if not 0.0 <= r2 < 1.0:
                raise InputError(f"{name} must be in [0, 1), got {r2}")
        if abs(self.beta_xy_given_w - self.sd_ratio * self.rho_xy) > 1e-9 * max(
            1.0, abs(self.beta_xy_given_w)
        ):
            raise InputError("beta_xy_given_w inconsistent with sd_ratio * rho_xy")


@dataclass(frozen=True)
class IqrRule:
    """Quartile-based outlier filter on the raw treatment column.

    Rows with treatment above Q3 + multiplier * IQR are dropped; with
    two_sided=True rows below Q1 - multiplier * IQR are dropped as well.
    Quartiles use linear interpolation between order statistics (the numpy
    default); this convention is fixed and part of the contract.
    """

    multiplier: float = 1.5
    two_sided: bool = False


@dataclass(frozen=True)
class PrepareReport:
    rows_in: int
    rows_missing_dropped: int
    rows_filter_dropped: int
    rows_outlier_dropped: int
    rows_out: int


def _check_centered(col: np.ndarray, name: str) -> None:
    sd = float(np.std(col))
    if sd == 0.0:
        raise DegenerateDataError(f"column '{name}' is constant")
    if abs(float(np.mean(col))) > 1e-10 * sd:
        raise InputError(f"column '{name}' is not centered")


def _check_independent(x: np.ndarray, w: np.ndarray, labels: dict) -> None:
    m = np.column_stack([x] + [w[:, j] for j in range(w.shape[1])])
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] <= COLLINEARITY_RTOL * sv[0]:
        raise CollinearityError(
            f"column '{_dependent_column(x, w, labels)}' is collinear with the "
            "other regressors"
        )


def _dependent_column(x: np.ndarray, w: np.ndarray, labels: dict) -> str:
    # Greedy scan: first column (x, then each w) lying in the span of its
    # predecessors names the offender.
    x_name = labels.get("x", "x")
    names = [x_name] + [
        labels.get("w", [f"w{j + 1}" for j in range(w.shape[1])])[j]
        for j in range(w.shape[1])
    ]
    cols = [x] + [w[:, j] for j in range(w.shape[1])]
    basis: list[np.ndarray] = []
    for name, col in zip(names, cols):
        resid = col.astype(float).copy()
        for b in basis:
            resid -= (resid @ b) * b
        norm = np.linalg.norm(resid)
        if norm <= COLLINEARITY_RTOL * max(np.linalg.norm(col), 1e-300):
            return name
        basis.append(resid / norm)
    return names[-1]


def fit_ols(response: np.ndarray, regressors: np.ndarray) -> OlsFit:
    """Least-squares fit of a centered response on centered regressor columns.

    With an empty regressor matrix the fit is the zero function: no
    coefficients, fitted values all zero, residuals equal to the response.
    """
    response = np.asarray(response, dtype=float)
    regressors = np.asarray(regressors, dtype=float)
    if regressors.ndim == 1:
        regressors = regressors[:, None]
    n = response.shape[0]
    if regressors.shape[0] != n and regressors.size > 0:
        raise InputError("response and regressors must have matching row counts")
    if regressors.size == 0:
        return OlsFit(
            coefficients=np.zeros(0),
            fitted=np.zeros(n),
            residuals=response.copy(),
            r_squared=0.0,
        )
    sv = np.linalg.svd(regressors, compute_uv=False)
    if sv[-1] <= COLLINEARITY_RTOL * sv[0]:
        raise CollinearityError("regressor columns are rank deficient")
    coef, _, _, _ = np.linalg.lstsq(regressors, response, rcond=None)
    fitted = regressors @ coef
    residuals = response - fitted
    denom = float(response @ response)
    r2 = float(fitted @ fitted) / denom if denom > 0 else 0.0
    return OlsFit(
        coefficients=coef,
        fitted=fitted,
        residuals=residuals,
        r_squared=min(max(r2, 0.0), 1.0),
    )


def residualize(column: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Remove the least-squares projection of a centered column onto span(w)."""
    return fit_ols(column, w).residuals


def sufficient_stats(data: Dataset) -> SufficientStats:
    """Summarize a dataset into the sufficient statistics for interval computation."""
    fit_x = fit_ols(data.x, data.w)
    fit_y = fit_ols(data.y, data.w)
    rx, ry = fit_x.residuals, fit_y.residuals
    norm_rx = float(np.linalg.norm(rx))
    norm_ry = float(np.linalg.norm(ry))
    if norm_rx <= 1e-12 * float(np.linalg.norm(data.x)):
        raise DegenerateDataError("treatment is fully determined by the covariates")
    if norm_ry <= 1e-12 * float(np.linalg.norm(data.y)):
        raise DegenerateDataError("outcome is fully determined by the covariates")
    rho = float(rx @ ry) / (norm_rx * norm_ry)
    rho = min(max(rho, -1.0), 1.0)
    return SufficientStats(
        sd_ratio=norm_ry / norm_rx,
        rho_xy=rho,
        r2_wx=fit_x.r_squared,
        r2_wy=fit_y.r_squared,
        n=data.n,
    )


def partial_determination(r2_wu: float, r2_w: float) -> float:
    """Coefficient of partial determination (r2_wu - r2_w) / (1 - r2_w)."""
    if r2_w < 0.0 or r2_wu < 0.0:
        raise InputError("coefficients of determination must be nonnegative")
    if r2_w >= 1.0 or r2_wu >= 1.0:
        raise InputError("coefficients of determination must be below 1")
    if r2_wu < r2_w:
        raise InputError(
            f"joint determination {r2_wu} cannot be below the measured {r2_w}"
        )
    return (r2_wu - r2_w) / (1.0 - r2_w)


def prepare_dataset(
    raw_columns: dict,
    roles: dict,
    outlier_rule: IqrRule | None = None,
    range_filters: dict | None = None,
) -> tuple[Dataset, PrepareReport]:
    """Assemble a centered Dataset from named raw columns.

    roles maps 'y' and 'x' to column names and 'w' to a list of names.
    Rows with missing values are dropped first, then optional per-column
    range filters (analyst-supplied inclusion intervals), then the IQR
    outlier rule on the raw treatment column, and finally every surviving
    column is centered.
    """
    for key in ("y", "x"):
        if key not in roles:
            raise InputError(f"roles must name an '{key}' column")
    w_names = list(roles.get("w", []))
    names = [roles["y"], roles["x"], *w_names]
    if len(set(names)) != len(names):
        raise InputError("roles must name distinct columns")
    cols = {}
    for name in names:
        if name not in raw_columns:
            raise InputError(f"column '{name}' not found in input")
        try:
            col = np.asarray(raw_columns[name], dtype=float)
        except (TypeError, ValueError):
            raise InputError(f"column '{name}' is not numeric") from None
        cols[name] = col
    lengths = {c.shape[0] for c in cols.values()}
    if len(lengths) != 1:
        raise InputError("columns have unequal lengths")

    rows_in = lengths.pop()
    keep = np.ones(rows_in, dtype=bool)
    for name in names:
        keep &= np.isfinite(cols[name])
    rows_missing = rows_in - int(keep.sum())

    rows_filter = 0
    if range_filters:
        for name, (lo, hi) in range_filters.items():
            if name in cols:
                col = cols[name]
            elif name in raw_columns:
                try:
                    col = np.asarray(raw_columns[name], dtype=float)
                except (TypeError, ValueError):
                    raise InputError(
                        f"range filter column '{name}' is not numeric"
                    ) from None
            else:
                raise InputError(f"range filter names unknown column '{name}'")
            before = int(keep.sum())
            if lo is not None:
                keep &= np.isfinite(col) & (col >= lo)
            if hi is not None:
                keep &= np.isfinite(col) & (col <= hi)
            rows_filter += before - int(keep.sum())

    rows_outlier = 0
    if outlier_rule is not None:
        x_kept = cols[roles["x"]][keep]
        if x_kept.size == 0:
            raise DegenerateDataError("no rows left before outlier filtering")
        q1, q3 = np.percentile(x_kept, [25.0, 75.0])
        iqr = q3 - q1
        upper = q3 + outlier_rule.multiplier * iqr
        before = int(keep.sum())
        keep &= ~np.isfinite(cols[roles["x"]]) | (cols[roles["x"]] <= upper)
        if outlier_rule.two_sided:
            lower = q1 - outlier_rule.multiplier * iqr
            keep &= ~np.isfinite(cols[roles["x"]]) | (cols[roles["x"]] >= lower)
        rows_outlier = before - int(keep.sum())

    y = cols[roles["y"]][keep]
    x = cols[roles["x"]][keep]
    w = (
        np.column_stack([cols[name][keep] for name in w_names])
        if w_names
        else np.zeros((y.shape[0], 0))
    )
    y = y - y.mean()
    x = x - x.mean()
    if w.shape[1]:
        w = w - w.mean(axis=0)
    data = Dataset(
        y=y,
        x=x,
        w=w,
        labels={"y": roles["y"], "x": roles["x"], "w": w_names},
        units=dict(roles.get("units", {})),
    )
    data.validate()
    report = PrepareReport(
        rows_in=rows_in,
        rows_missing_dropped=rows_missing,
        rows_filter_dropped=rows_filter,
        rows_outlier_dropped=rows_outlier,
        rows_out=data.n,
    )
    return data, report
