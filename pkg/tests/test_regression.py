import numpy as np
import pytest

from confound.errors import (
    CollinearityError,
    DegenerateDataError,
    InputError,
)
from confound.regression import (
    Dataset,
    IqrRule,
    SufficientStats,
    fit_ols,
    partial_determination,
    prepare_dataset,
    residualize,
    sufficient_stats,
)

from conftest import centered, random_dataset_arrays


# ---------------------------------------------------------------------------
# prepare_dataset
# ---------------------------------------------------------------------------


def test_iqr_rule_drops_hand_computed_outlier():
    # treatment (1,2,3,4,100): Q1=2, Q3=4 under linear interpolation,
    # IQR=2, threshold 4 + 1.5*2 = 7 -> the row with 100 is dropped.
    raw = {
        "t": np.array([1.0, 2.0, 3.0, 4.0, 100.0]),
        "o": np.array([1.0, 2.0, 1.5, 3.0, 9.0]),
    }
    data, report = prepare_dataset(
        raw, roles={"y": "o", "x": "t"}, outlier_rule=IqrRule(1.5)
    )
    assert report.rows_outlier_dropped == 1
    assert data.n == 4
    # centering happened on the surviving rows
    assert abs(data.x.mean()) < 1e-12


def test_centering_is_idempotent():
    rng = np.random.default_rng(1)
    raw = {
        "y": centered(rng, 40),
        "x": centered(rng, 40),
        "a": centered(rng, 40),
    }
    data, report = prepare_dataset(raw, roles={"y": "y", "x": "x", "w": ["a"]})
    assert report.rows_out == 40
    np.testing.assert_allclose(data.y, raw["y"], atol=1e-12)
    np.testing.assert_allclose(data.x, raw["x"], atol=1e-12)
    np.testing.assert_allclose(data.w[:, 0], raw["a"], atol=1e-12)


def test_missing_rows_dropped_before_centering():
    raw = {
        "y": np.array([1.0, 2.0, np.nan, 4.0, 5.0, 6.0]),
        "x": np.array([2.0, 1.0, 3.0, 5.0, 4.0, 6.0]),
    }
    data, report = prepare_dataset(raw, roles={"y": "y", "x": "x"})
    assert report.rows_missing_dropped == 1
    assert data.n == 5


def test_range_filter():
    raw = {
        "y": np.arange(10.0),
        "x": np.arange(10.0) ** 1.5,
        "z": np.arange(10.0),
    }
    data, report = prepare_dataset(
        raw, roles={"y": "y", "x": "x"}, range_filters={"z": (2.0, 8.0)}
    )
    assert report.rows_filter_dropped == 3
    assert data.n == 7


def test_non_numeric_column_named():
    raw = {"y": np.arange(6.0), "x": ["a"] * 6}
    with pytest.raises(InputError, match="'x'"):
        prepare_dataset(raw, roles={"y": "y", "x": "x"})


def test_collinear_column_named():
    rng = np.random.default_rng(2)
    a = centered(rng, 30)
    raw = {
        "y": centered(rng, 30),
        "x": centered(rng, 30),
        "a": a,
        "b": 2.0 * a,
    }
    with pytest.raises(CollinearityError, match="'b'"):
        prepare_dataset(raw, roles={"y": "y", "x": "x", "w": ["a", "b"]})


def test_too_few_rows_is_degenerate():
    raw = {"y": np.arange(4.0), "x": np.array([2.0, 1.0, 4.0, 3.0]),
           "a": np.array([1.0, 3.0, 2.0, 5.0]), "b": np.array([0.0, 2.0, 5.0, 1.0])}
    with pytest.raises(DegenerateDataError):
        prepare_dataset(raw, roles={"y": "y", "x": "x", "w": ["a", "b"]})


# ---------------------------------------------------------------------------
# fit_ols / residualize
# ---------------------------------------------------------------------------


def test_exact_linear_fit():
    rng = np.random.default_rng(3)
    x = centered(rng, 25)
    fit = fit_ols(2.0 * x, x[:, None])
    assert fit.coefficients == pytest.approx([2.0], abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(fit.residuals)) < 1e-12


def test_orthogonal_response_gives_zero_fit():
    rng = np.random.default_rng(4)
    x = centered(rng, 25)
    y = centered(rng, 25)
    y -= (y @ x) / (x @ x) * x  # orthogonalize
    fit = fit_ols(y, x[:, None])
    assert abs(fit.coefficients[0]) < 1e-12
    assert fit.r_squared == pytest.approx(0.0, abs=1e-12)


def test_empty_regressors():
    rng = np.random.default_rng(5)
    y = centered(rng, 25)
    fit = fit_ols(y, np.zeros((25, 0)))
    assert fit.coefficients.size == 0
    assert np.all(fit.fitted == 0)
    np.testing.assert_array_equal(fit.residuals, y)
    assert fit.r_squared == 0.0


def test_matches_normal_equations_oracle():
    # Independent oracle: solve (M'M) b = M'r directly.
    rng = np.random.default_rng(6)
    m = np.column_stack([centered(rng, 50) for _ in range(3)])
    r = centered(rng, 50)
    oracle = np.linalg.solve(m.T @ m, m.T @ r)
    fit = fit_ols(r, m)
    np.testing.assert_allclose(fit.coefficients, oracle, rtol=1e-8)


def test_fit_invariants_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        y, x, w = random_dataset_arrays(rng, n=40, p=3)
        m = np.column_stack([x, w])
        fit = fit_ols(y, m)
        # reconstruction
        np.testing.assert_allclose(fit.fitted + fit.residuals, y, rtol=0, atol=1e-9 * np.linalg.norm(y))
        # residual orthogonality to every regressor
        for j in range(m.shape[1]):
            num = abs(fit.residuals @ m[:, j])
            den = np.linalg.norm(fit.residuals) * np.linalg.norm(m[:, j])
            assert num < 1e-9 * max(den, 1e-300)
        # r_squared is the fitted share of the squared norm
        assert fit.r_squared == pytest.approx(
            (fit.fitted @ fit.fitted) / (y @ y), abs=1e-12
        )


def test_rank_deficient_regressors_raise():
    rng = np.random.default_rng(8)
    a = centered(rng, 30)
    with pytest.raises(CollinearityError):
        fit_ols(centered(rng, 30), np.column_stack([a, 3.0 * a]))


def test_residualize_identities():
    rng = np.random.default_rng(9)
    w = np.column_stack([centered(rng, 40) for _ in range(2)])
    # column in span(w) -> zero
    combo = w @ np.array([1.5, -2.0])
    assert np.max(np.abs(residualize(combo, w))) < 1e-10
    # column orthogonal to span(w) -> unchanged
    v = centered(rng, 40)
    v = residualize(v, w)
    np.testing.assert_allclose(residualize(v, w), v, atol=1e-10)


def test_residualize_idempotent_and_linear():
    rng = np.random.default_rng(10)
    w = np.column_stack([centered(rng, 50) for _ in range(3)])
    v = centered(rng, 50)
    z = centered(rng, 50)
    once = residualize(v, w)
    np.testing.assert_allclose(residualize(once, w), once, atol=1e-10)
    lhs = residualize(2.5 * v - 0.75 * z, w)
    rhs = 2.5 * residualize(v, w) - 0.75 * residualize(z, w)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * max(1.0, np.linalg.norm(rhs)))


# ---------------------------------------------------------------------------
# sufficient_stats
# ---------------------------------------------------------------------------


def _dataset(y, x, w):
    d = Dataset(y=y, x=x, w=w)
    d.validate()
    return d


def test_stats_with_no_covariates():
    rng = np.random.default_rng(11)
    y, x, w = random_dataset_arrays(rng, n=50, p=0)
    stats = sufficient_stats(_dataset(y, x, w))
    assert stats.r2_wx == 0.0 and stats.r2_wy == 0.0
    assert stats.sd_ratio == pytest.approx(np.std(y) / np.std(x), rel=1e-12)
    rho = (x @ y) / (np.linalg.norm(x) * np.linalg.norm(y))
    assert stats.rho_xy == pytest.approx(rho, abs=1e-12)


def test_constructed_correlation_is_exact():
    # y = x + 0.75*|x|*e_unit with e orthogonal to x gives rho = 0.8 exactly.
    rng = np.random.default_rng(12)
    x = centered(rng, 80)
    e = centered(rng, 80)
    e -= (e @ x) / (x @ x) * x
    e /= np.linalg.norm(e)
    y = x + 0.75 * np.linalg.norm(x) * e
    stats = sufficient_stats(_dataset(y - y.mean(), x, np.zeros((80, 0))))
    assert stats.rho_xy == pytest.approx(0.8, abs=1e-9)


def test_slope_is_product_and_matches_multiple_regression():
    rng = np.random.default_rng(13)
    y, x, w = random_dataset_arrays(rng, n=60, p=3)
    stats = sufficient_stats(_dataset(y, x, w))
    assert stats.beta_xy_given_w == pytest.approx(
        stats.sd_ratio * stats.rho_xy, rel=1e-9
    )
    # Partialling out w leaves the multiple-regression slope on x unchanged.
    coef = fit_ols(y, np.column_stack([x, w])).coefficients[0]
    assert stats.beta_xy_given_w == pytest.approx(coef, rel=1e-9)


def test_stats_degenerate_when_treatment_in_span():
    rng = np.random.default_rng(14)
    w = np.column_stack([centered(rng, 30) for _ in range(2)])
    x = w @ np.array([1.0, 2.0])
    y = centered(rng, 30)
    with pytest.raises((DegenerateDataError, CollinearityError)):
        data = Dataset(y=y, x=x, w=w)
        data.validate()
        sufficient_stats(data)


def test_stats_invariant_to_shift_and_w_reparametrization():
    rng = np.random.default_rng(15)
    raw_y = rng.standard_normal(70) + 5.0
    raw_x = rng.standard_normal(70) - 3.0
    raw_w = rng.standard_normal((70, 2)) * 2.0

    def stats_of(y, x, w):
        raw = {"y": y, "x": x, "w1": w[:, 0], "w2": w[:, 1]}
        data, _ = prepare_dataset(raw, roles={"y": "y", "x": "x", "w": ["w1", "w2"]})
        return sufficient_stats(data)

    base = stats_of(raw_y, raw_x, raw_w)
    shifted = stats_of(raw_y + 11.0, raw_x - 7.0, raw_w + 3.0)
    # invertible linear reparametrization of the covariate block
    t = np.array([[2.0, 1.0], [-1.0, 0.5]])
    remixed = stats_of(raw_y, raw_x, raw_w @ t)
    for other in (shifted, remixed):
        assert other.sd_ratio == pytest.approx(base.sd_ratio, rel=1e-8)
        assert other.rho_xy == pytest.approx(base.rho_xy, abs=1e-8)
        assert other.r2_wx == pytest.approx(base.r2_wx, abs=1e-8)
        assert other.r2_wy == pytest.approx(base.r2_wy, abs=1e-8)


# ---------------------------------------------------------------------------
# decomposition identities behind the bound transformation
# ---------------------------------------------------------------------------


def test_sum_of_squares_identity():
    rng = np.random.default_rng(16)
    y, x, w = random_dataset_arrays(rng, n=60, p=2)
    fit = fit_ols(y, w)
    lhs = y @ y
    rhs = fit.residuals @ fit.residuals + fit.fitted @ fit.fitted
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_span_identity_residualized_u():
    # Fitting on [w, r(u;w)] equals fitting on [w, u].
    rng = np.random.default_rng(17)
    n, p, q = 60, 2, 2
    y, _, w = random_dataset_arrays(rng, n=n, p=p)
    u = np.column_stack([centered(rng, n) for _ in range(q)])
    ru = np.column_stack([residualize(u[:, k], w) for k in range(q)])
    f1 = fit_ols(y, np.column_stack([w, ru])).fitted
    f2 = fit_ols(y, np.column_stack([w, u])).fitted
    np.testing.assert_allclose(f1, f2, atol=1e-8 * max(1.0, np.linalg.norm(f2)))


def test_partial_determination_identity_on_random_data():
    # Directly computed R2 of r(y;w) on r(u;w) equals
    # (R2_{w,u;y} - R2_{w;y}) / (1 - R2_{w;y}).
    rng = np.random.default_rng(18)
    for _ in range(25):
        n, p, q = 60, 2, 2
        y, _, w = random_dataset_arrays(rng, n=n, p=p)
        u = np.column_stack([centered(rng, n) for _ in range(q)])
        ry = residualize(y, w)
        ru = np.column_stack([residualize(u[:, k], w) for k in range(q)])
        direct = fit_ols(ry, ru).r_squared
        r2_wy = fit_ols(y, w).r_squared
        r2_wuy = fit_ols(y, np.column_stack([w, u])).r_squared
        assert direct == pytest.approx(
            partial_determination(r2_wuy, r2_wy), abs=1e-8
        )


# ---------------------------------------------------------------------------
# partial_determination
# ---------------------------------------------------------------------------


def test_partial_determination_values():
    assert partial_determination(0.4, 0.03) == pytest.approx(0.38, abs=5e-3)
    assert partial_determination(0.4, 0.05) == pytest.approx(0.37, abs=5e-3)
    assert round(partial_determination(0.4, 0.03), 2) == 0.38
    assert round(partial_determination(0.4, 0.05), 2) == 0.37
    for r in (0.0, 0.2, 0.99):
        assert partial_determination(r, r) == 0.0


def test_partial_determination_errors():
    with pytest.raises(InputError):
        partial_determination(0.1, 0.2)
    with pytest.raises(InputError):
        partial_determination(1.0, 0.5)
    with pytest.raises(InputError):
        partial_determination(0.5, 1.0)


def test_sufficient_stats_validation():
    with pytest.raises(InputError):
        SufficientStats(sd_ratio=-1.0, rho_xy=0.0, r2_wx=0.0, r2_wy=0.0).validate()
    with pytest.raises(InputError):
        SufficientStats(sd_ratio=1.0, rho_xy=2.0, r2_wx=0.0, r2_wy=0.0).validate()
    with pytest.raises(InputError):
        SufficientStats(sd_ratio=1.0, rho_xy=0.0, r2_wx=1.0, r2_wy=0.0).validate()
