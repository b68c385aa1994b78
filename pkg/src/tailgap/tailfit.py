"""Empirical CCDF statistics and log-log least-squares tail estimation.

The survival function of firm sizes is Paretian in an intermediate range,
``P(S >= x) ~ c * x**(-gamma)``.  ``gamma`` is estimated by ordinary least
squares of log-CCDF on log-size restricted to an explicit window
``[s_minus, s_plus]``.  All logs are natural.

Caveat on standard errors: CCDF points are serially correlated by
construction, so the reported OLS standard errors understate the true
sampling uncertainty.  They are reported as-is because they are the
conventional companion of this estimator; treat them as lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import FitError

#: Natural-log spacing of the candidate endpoint grid used by suggest_range.
RANGE_GRID_STEP = 0.1


class CcdfPoint(NamedTuple):
    size: float
    ccdf: float
    rank: int


@dataclass(frozen=True)
class ParetoFit:
    """OLS fit of ``log ccdf = log_c_hat - gamma_hat * log size``.

    ``m_total`` is the number of firms behind the CCDF (all of them, not
    just the in-range ones); it anchors rank k to the CCDF level k/M when
    the fit is extrapolated back to sizes.
    """

    gamma_hat: float
    log_c_hat: float
    s_minus: float
    s_plus: float
    se_gamma: float
    se_log_c: float
    n_points: int
    m_total: int

    def __post_init__(self):
        if not self.gamma_hat > 0:
            raise FitError(f"fitted exponent must be positive, got {self.gamma_hat:.4g}")
        if not self.s_minus < self.s_plus:
            raise FitError("fit range must satisfy s_minus < s_plus")
        if self.n_points < 3:
            raise FitError("fit needs at least 3 in-range points")

    @property
    def c_hat(self) -> float:
        return math.exp(self.log_c_hat)

    def to_dict(self) -> dict:
        return {
            "gamma_hat": self.gamma_hat,
            "log_c_hat": self.log_c_hat,
            "s_minus": self.s_minus,
            "s_plus": self.s_plus,
            "se_gamma": self.se_gamma,
            "se_log_c": self.se_log_c,
            "n_points": self.n_points,
            "m_total": self.m_total,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParetoFit":
        return cls(**{k: d[k] for k in (
            "gamma_hat", "log_c_hat", "s_minus", "s_plus",
            "se_gamma", "se_log_c", "n_points", "m_total")})


def empirical_ccdf(sizes: Sequence[float]) -> list[CcdfPoint]:
    """Rank-based survival points: the k-th largest of M sizes gets ccdf k/M.

    Ties keep distinct ranks (the ordering among equal sizes follows the
    sort, which is deterministic for equal values).
    """
    s = np.asarray(sizes, dtype=float)
    if s.size == 0:
        raise FitError("empirical_ccdf: empty input")
    if not np.all(s > 0):
        raise FitError("empirical_ccdf: sizes must be positive")
    s = np.sort(s)[::-1]
    m = s.size
    return [CcdfPoint(float(s[k]), (k + 1) / m, k + 1) for k in range(m)]


def _point_arrays(points: Sequence[CcdfPoint]):
    size = np.array([p.size for p in points], dtype=float)
    ccdf = np.array([p.ccdf for p in points], dtype=float)
    return size, ccdf


def _m_total(points: Sequence[CcdfPoint]) -> int:
    # ccdf = rank/M for every point, so any point recovers M.
    p = points[0]
    return round(p.rank / p.ccdf)


def _ols_loglog(log_x: np.ndarray, log_y: np.ndarray):
    """Slope/intercept with their standard errors; returns (slope, intercept,
    se_slope, se_intercept, rss)."""
    n = log_x.size
    xbar = log_x.mean()
    ybar = log_y.mean()
    dx = log_x - xbar
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise FitError("zero variance of log(size) in fit range")
    slope = float(dx @ (log_y - ybar)) / sxx
    intercept = ybar - slope * xbar
    resid = log_y - (intercept + slope * log_x)
    rss = max(float(resid @ resid), 0.0)
    if n > 2:
        s2 = rss / (n - 2)
    else:
        s2 = 0.0
    se_slope = math.sqrt(s2 / sxx)
    se_intercept = math.sqrt(s2 * (1.0 / n + xbar * xbar / sxx))
    return slope, intercept, se_slope, se_intercept, rss


def fit_pareto(points: Sequence[CcdfPoint], s_minus: float, s_plus: float) -> ParetoFit:
    """OLS of log(ccdf) on log(size) over sizes in [s_minus, s_plus], inclusive.

    Raises
    ------
    FitError
        Fewer than 3 in-range points, degenerate sizes, or a non-positive
        fitted exponent.
    """
    if not points:
        raise FitError("fit_pareto: no points")
    size, ccdf = _point_arrays(points)
    mask = (size >= s_minus) & (size <= s_plus)
    n_in = int(mask.sum())
    if n_in < 3:
        raise FitError(f"fit_pareto: only {n_in} points in [{s_minus}, {s_plus}], need >= 3")
    log_x = np.log(size[mask])
    log_y = np.log(ccdf[mask])
    slope, intercept, se_slope, se_intercept, _ = _ols_loglog(log_x, log_y)
    return ParetoFit(
        gamma_hat=-slope,
        log_c_hat=intercept,
        s_minus=float(s_minus),
        s_plus=float(s_plus),
        se_gamma=se_slope,
        se_log_c=se_intercept,
        n_points=n_in,
        m_total=_m_total(points),
    )


def suggest_range(points: Sequence[CcdfPoint],
                  rms_threshold: float = 0.05) -> tuple[float, float]:
    """Heuristic fit window: endpoints scanned on the e^{0.1 j} grid.

    Among candidate pairs whose in-range OLS residual RMS (in log space)
    stays below ``rms_threshold``, picks the pair covering the most points;
    ties prefer lower RMS, then the smaller left endpoint.  This is a
    convenience only; reported fits should pass their window explicitly.
    """
    if len(points) < 30:
        raise FitError(f"suggest_range needs >= 30 points, got {len(points)}")
    size, ccdf = _point_arrays(points)
    order = np.argsort(size)
    log_s = np.log(size[order])
    log_p = np.log(ccdf[order])
    n = log_s.size

    j_lo = math.floor(log_s[0] / RANGE_GRID_STEP)
    j_hi = math.ceil(log_s[-1] / RANGE_GRID_STEP)

    # Prefix sums make the per-pair OLS O(1).
    cx = np.concatenate([[0.0], np.cumsum(log_s)])
    cy = np.concatenate([[0.0], np.cumsum(log_p)])
    cxx = np.concatenate([[0.0], np.cumsum(log_s * log_s)])
    cxy = np.concatenate([[0.0], np.cumsum(log_s * log_p)])
    cyy = np.concatenate([[0.0], np.cumsum(log_p * log_p)])

    grid_logs = [j * RANGE_GRID_STEP for j in range(j_lo, j_hi + 1)]
    # Inclusive membership on both endpoints (1e-12 absorbs exp/log rounding).
    idx_left = np.searchsorted(log_s, np.array(grid_logs) - 1e-12, side="left")
    idx_right = np.searchsorted(log_s, np.array(grid_logs) + 1e-12, side="right")

    best = None  # (-count, rms, s_minus_log)
    best_pair = None
    for a in range(len(grid_logs)):
        i0 = int(idx_left[a])
        for b in range(a + 1, len(grid_logs)):
            i1 = int(idx_right[b])
            m = i1 - i0
            if m < 3:
                continue
            sx = cx[i1] - cx[i0]
            sy = cy[i1] - cy[i0]
            sxx = cxx[i1] - cxx[i0]
            sxy = cxy[i1] - cxy[i0]
            syy = cyy[i1] - cyy[i0]
            vxx = sxx - sx * sx / m
            if vxx <= 0:
                continue
            vxy = sxy - sx * sy / m
            vyy = syy - sy * sy / m
            rss = max(vyy - vxy * vxy / vxx, 0.0)
            rms = math.sqrt(rss / m)
            if rms > rms_threshold:
                continue
            key = (-m, rms, grid_logs[a])
            if best is None or key < best:
                best = key
                best_pair = (math.exp(grid_logs[a]), math.exp(grid_logs[b]))
    if best_pair is None:
        raise FitError(
            f"suggest_range: no endpoint pair meets rms_threshold={rms_threshold}")
    return best_pair


def write_ccdf_csv(points: Sequence[CcdfPoint], path) -> None:
    """CSV export with the `size,ccdf,rank` schema (12 significant digits)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("size,ccdf,rank\n")
        for p in points:
            fh.write(f"{p.size:.12g},{p.ccdf:.12g},{p.rank}\n")
