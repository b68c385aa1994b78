"""Gaussian-kernel regression of return on assets against log assets.

Under proportional random growth the return on assets (profits/assets) is
independent of size; a flat regression curve is the empirical signature of
that constant-returns regime.  The estimator is the locally weighted mean

    est(g) = sum_i w_i(g) y_i / sum_i w_i(g),   w_i = phi((g - x_i)/bw)

evaluated on an equispaced grid over the x-range, with pointwise bands
est +/- 1.96 * SE built from the kernel-weighted residual variance scaled
by the local effective sample size.  Bands are pointwise, not
simultaneous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Snapshot
from .errors import RegressionError


@dataclass(frozen=True)
class RegressionCurve:
    grid: np.ndarray
    estimate: np.ndarray
    band_low: np.ndarray
    band_high: np.ndarray
    bandwidth: float


@dataclass(frozen=True)
class RoaSample:
    """Per-firm (log assets, profits/assets) points; firms with missing
    profits are dropped and counted."""

    x: np.ndarray
    y: np.ndarray
    n_dropped: int


def returns_on_assets(snapshot: Snapshot) -> RoaSample:
    """One (log assets, return-on-assets) point per firm with known profits."""
    xs, ys = [], []
    n_dropped = 0
    for f in snapshot.firms:
        if f.profits is None:
            n_dropped += 1
            continue
        xs.append(math.log(f.assets))
        ys.append(f.profits / f.assets)
    if not xs:
        raise RegressionError("returns_on_assets: empty result (no firm has profits)")
    return RoaSample(np.asarray(xs), np.asarray(ys), n_dropped)


def silverman_bandwidth(x: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * n^(-1/5)."""
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    scale = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * scale * x.size ** (-0.2)


def nw_regress(x, y=None, bandwidth: float | str = "auto",
               grid_size: int = 100) -> RegressionCurve:
    """Locally weighted mean of y given x on an equispaced grid.

    Accepts either two arrays, an object with ``.x``/``.y`` (e.g. a
    :class:`RoaSample`), or one (n, 2) array of points.
    ``bandwidth="auto"`` applies the Silverman rule to x.

    Raises
    ------
    RegressionError
        Fewer than 10 points, non-positive bandwidth, or degenerate
        (constant) x.
    """
    if y is None:
        if hasattr(x, "x") and hasattr(x, "y"):
            x, y = x.x, x.y
        else:
            pts = np.asarray(x, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2:
                raise RegressionError("expected (x, y) arrays or (n, 2) points")
            x, y = pts[:, 0], pts[:, 1]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise RegressionError("x and y must have equal length")
    if x.size < 10:
        raise RegressionError(f"nw_regress needs >= 10 points, got {x.size}")
    if x.min() == x.max():
        raise RegressionError("nw_regress: x has zero range")
    if bandwidth == "auto":
        bw = silverman_bandwidth(x)
    else:
        bw = float(bandwidth)
    if not bw > 0:
        raise RegressionError(f"bandwidth must be positive, got {bw}")

    grid = np.linspace(x.min(), x.max(), grid_size)
    est = np.empty(grid_size)
    se = np.empty(grid_size)
    for j, g in enumerate(grid):
        w = np.exp(-0.5 * ((g - x) / bw) ** 2)
        sw = w.sum()
        est[j] = float(w @ y) / sw
        resid2 = (y - est[j]) ** 2
        local_var = float(w @ resid2) / sw
        # effective-sample-size scaling: Var(est) ~ local_var * sum w^2 / (sum w)^2
        se[j] = math.sqrt(local_var * float(w @ w)) / sw
    return RegressionCurve(grid=grid, estimate=est,
                           band_low=est - 1.96 * se, band_high=est + 1.96 * se,
                           bandwidth=bw)


def conditional_growth_curve(prev: Snapshot, next_: Snapshot,
                             bandwidth: float | str = "auto",
                             grid_size: int = 100) -> RegressionCurve:
    """Expected next-year log assets conditioned on prior-year log assets.

    A fixed-bandwidth substitute for an adaptive conditional-density view:
    it shows only the conditional mean, so it is a simplified diagnostic,
    not an equivalent estimator.  Proportional growth makes this curve
    linear with unit slope; a bend at the top signals sub-proportional
    growth of the largest firms.
    """
    prev_assets = {f.name: f.assets for f in prev.firms}
    pairs = [(math.log(prev_assets[f.name]), math.log(f.assets))
             for f in next_.firms if f.name in prev_assets]
    if len(pairs) < 10:
        raise RegressionError(
            f"conditional_growth_curve: only {len(pairs)} matched firms, need >= 10")
    x, y = (np.asarray(v) for v in zip(*pairs))
    return nw_regress(x, y, bandwidth=bandwidth, grid_size=grid_size)


def write_curve_csv(curve: RegressionCurve, path) -> None:
    """Curve CSV export (`x,estimate,low,high`), 12 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,estimate,low,high\n")
        for g, e, lo, hi in zip(curve.grid, curve.estimate,
                                curve.band_low, curve.band_high):
            fh.write(f"{g:.12g},{e:.12g},{lo:.12g},{hi:.12g}\n")
