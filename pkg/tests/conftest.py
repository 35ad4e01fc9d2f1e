import numpy as np
import pytest

from confound.regression import SufficientStats


@pytest.fixture
def wind_stats():
    # Winter wind / air-quality study: printed sufficient statistics.
    return SufficientStats(sd_ratio=1.62, rho_xy=-0.48, r2_wx=0.14, r2_wy=0.28)


@pytest.fixture
def smoking_stats():
    # Maternal smoking / birth-weight study: printed sufficient statistics.
    return SufficientStats(sd_ratio=92.75, rho_xy=-0.07, r2_wx=0.05, r2_wy=0.03)


def centered(rng, n):
    col = rng.standard_normal(n)
    return col - col.mean()


def random_dataset_arrays(rng, n=60, p=2):
    w = np.column_stack([centered(rng, n) for _ in range(p)]) if p else np.zeros((n, 0))
    x = centered(rng, n)
    y = centered(rng, n)
    return y, x, w


def random_stats(rng, rho_cap=0.95, r2_cap=0.5):
    sd_ratio = float(np.exp(rng.uniform(-1.5, 2.5)))
    rho = float(rng.uniform(-rho_cap, rho_cap))
    r2_wx = float(rng.uniform(0.0, r2_cap))
    r2_wy = float(rng.uniform(0.0, r2_cap))
    return SufficientStats(sd_ratio=sd_ratio, rho_xy=rho, r2_wx=r2_wx, r2_wy=r2_wy)


def random_bounds(rng, stats, tb_cap=0.9):
    # Bounds drawn so the transformed values stay within tb_cap.
    bx = stats.r2_wx + rng.uniform(0.0, tb_cap) * (1.0 - stats.r2_wx)
    by = stats.r2_wy + rng.uniform(0.0, tb_cap) * (1.0 - stats.r2_wy)
    return float(bx), float(by)
