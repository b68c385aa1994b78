import numpy as np
import pytest

from tailgap.errors import RegressionError
from tailgap.kernelreg import (conditional_growth_curve, nw_regress,
                               returns_on_assets, silverman_bandwidth)
from tailgap.dataset import FirmRecord, Snapshot

from conftest import make_snapshot


def test_roa_points():
    snap = make_snapshot([100.0, 50.0], profits=[5.0, 0.0])
    sample = returns_on_assets(snap)
    assert sample.y == pytest.approx([0.05, 0.0])
    assert sample.x == pytest.approx(np.log([100.0, 50.0]))
    assert sample.n_dropped == 0


def test_roa_drops_missing_profits():
    snap = Snapshot(2013, (
        FirmRecord("A", "Banking", 100.0, profits=5.0),
        FirmRecord("B", "Banking", 50.0, profits=None),
    ))
    sample = returns_on_assets(snap)
    assert sample.x.size == 1
    assert sample.n_dropped == 1


def test_roa_all_missing_is_error():
    snap = Snapshot(2013, (FirmRecord("A", "Banking", 100.0),))
    with pytest.raises(RegressionError, match="empty result"):
        returns_on_assets(snap)


def test_constant_y_reproduced_exactly():
    rng = np.random.default_rng(1)
    x = rng.uniform(0.0, 10.0, 200)
    y = np.full(200, 0.05)
    curve = nw_regress(x, y, bandwidth=1.0)
    assert np.all(curve.estimate == pytest.approx(0.05, abs=1e-15))
    assert np.all(curve.band_low == pytest.approx(0.05, abs=1e-12))
    assert np.all(curve.band_high == pytest.approx(0.05, abs=1e-12))


def test_linear_function_tracked_with_small_bandwidth():
    rng = np.random.default_rng(2)
    x = np.sort(rng.uniform(0.0, 1.0, 4000))
    y = x.copy()
    bw = 0.01 * (x.max() - x.min())
    curve = nw_regress(x, y, bandwidth=bw)
    # boundary bias pulls the ends inward; interior must track tightly
    err = np.abs(curve.estimate - curve.grid)
    assert err.max() < 0.05 * (y.max() - y.min())


def test_invariant_under_reordering():
    rng = np.random.default_rng(3)
    x = rng.uniform(0.0, 5.0, 100)
    y = np.sin(x)
    curve1 = nw_regress(x, y, bandwidth=0.5)
    perm = rng.permutation(100)
    curve2 = nw_regress(x[perm], y[perm], bandwidth=0.5)
    assert np.allclose(curve1.estimate, curve2.estimate, atol=1e-12)


def test_estimate_within_data_range():
    rng = np.random.default_rng(4)
    x = rng.uniform(0.0, 5.0, 300)
    y = rng.normal(0.0, 1.0, 300)
    curve = nw_regress(x, y, bandwidth="auto")
    assert curve.estimate.min() >= y.min()
    assert curve.estimate.max() <= y.max()
    assert np.all(curve.band_low <= curve.estimate)
    assert np.all(curve.estimate <= curve.band_high)


def test_translation_equivariance():
    rng = np.random.default_rng(5)
    x = rng.uniform(0.0, 5.0, 150)
    y = rng.normal(0.0, 0.5, 150)
    a = nw_regress(x, y, bandwidth=0.7)
    b = nw_regress(x, y + 3.0, bandwidth=0.7)
    assert np.allclose(b.estimate, a.estimate + 3.0, atol=1e-12)


def test_flat_relationship_with_noise_stays_in_band():
    rng = np.random.default_rng(6)
    x = rng.uniform(0.0, 6.0, 500)
    y = 0.05 + rng.normal(0.0, 0.02, 500)
    curve = nw_regress(x, y, bandwidth="auto")
    covered = np.mean((curve.band_low <= 0.05) & (0.05 <= curve.band_high))
    assert covered >= 0.95


def test_preconditions():
    with pytest.raises(RegressionError, match=">= 10"):
        nw_regress([1.0] * 9, [1.0] * 9)
    x = np.linspace(0, 1, 20)
    with pytest.raises(RegressionError, match="positive"):
        nw_regress(x, x, bandwidth=0.0)
    with pytest.raises(RegressionError, match="zero range"):
        nw_regress(np.ones(20), np.ones(20))


def test_silverman_positive():
    rng = np.random.default_rng(7)
    assert silverman_bandwidth(rng.normal(size=100)) > 0


def test_grid_strictly_increasing():
    rng = np.random.default_rng(8)
    x = rng.uniform(0.0, 3.0, 60)
    curve = nw_regress(x, np.cos(x), bandwidth=0.4, grid_size=50)
    assert np.all(np.diff(curve.grid) > 0)
    assert curve.grid.size == 50


def test_conditional_growth_curve_linear_for_proportional_growth():
    # every firm doubles: E[log next | log prev] = log prev + log 2
    prev_sizes = np.exp(np.linspace(0.0, 5.0, 80))
    prev = make_snapshot(prev_sizes, list_year=2012)
    nxt = make_snapshot(prev_sizes * 2.0, list_year=2013)
    curve = conditional_growth_curve(prev, nxt, bandwidth=0.3)
    interior = slice(10, -10)
    assert np.allclose(curve.estimate[interior],
                       curve.grid[interior] + np.log(2.0), atol=0.05)


def test_conditional_growth_needs_matches():
    prev = make_snapshot([1.0, 2.0], prefix="P")
    nxt = make_snapshot([1.0, 2.0], prefix="N")
    with pytest.raises(RegressionError, match="matched"):
        conditional_growth_curve(prev, nxt)


def test_nw_regress_accepts_sample_and_pairs():
    snap = make_snapshot([100.0] * 20, profits=[5.0] * 20)
    sample = returns_on_assets(snap)
    rng = np.random.default_rng(9)
    x = rng.uniform(0.0, 4.0, 30)
    pairs = np.column_stack([x, 2.0 * x])
    from_pairs = nw_regress(pairs, bandwidth=0.5)
    from_arrays = nw_regress(x, 2.0 * x, bandwidth=0.5)
    assert np.allclose(from_pairs.estimate, from_arrays.estimate)
    with pytest.raises(RegressionError, match="zero range"):
        nw_regress(sample)  # constant x from identical assets
