"""Missing top-tail mass relative to a fitted power law.

Where the fitted line extrapolates the k-th largest size to
``S_hat_[k] = (c_hat * M / k)**(1/gamma_hat)`` (the size solving
``k/M = c_hat * s**(-gamma_hat)``), the index sums the signed gaps between
extrapolated and observed sizes over the top N ranks:

    index = sum_{k=1..N} (S_hat_[k] - S_[k])

Inside the fit window the extrapolation tracks the data, so the sum is
dominated by whatever the top of the distribution fails to deliver.  Units
follow the input sizes (billions of USD for snapshot data).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import Snapshot
from .errors import IndexError_
from .tailfit import ParetoFit


class RankGap(NamedTuple):
    rank: int
    observed: float
    theoretical: float

    @property
    def gap(self) -> float:
        return self.theoretical - self.observed


@dataclass(frozen=True)
class SbIndexResult:
    """Index value with per-rank gaps and a +/-2 SE corner band."""

    i_sb: float
    n_top: int
    per_rank_gap: tuple[RankGap, ...]
    band_low: float
    band_high: float

    def to_dict(self) -> dict:
        return {
            "i_sb": self.i_sb,
            "n_top": self.n_top,
            "band_low": self.band_low,
            "band_high": self.band_high,
        }


def theoretical_sizes(fit: ParetoFit, n_top: int) -> np.ndarray:
    """Extrapolated sizes of ranks 1..n_top under the fitted power law."""
    if fit.gamma_hat <= 0:
        raise IndexError_("theoretical_sizes: gamma_hat must be positive")
    if n_top > fit.m_total:
        raise IndexError_(
            f"theoretical_sizes: n_top={n_top} exceeds fitted sample M={fit.m_total}")
    if n_top < 1:
        raise IndexError_("theoretical_sizes: n_top must be >= 1")
    k = np.arange(1, n_top + 1, dtype=float)
    # S_hat solves k/M = c * s^{-gamma}; evaluated in log space for stability.
    return np.exp((fit.log_c_hat + np.log(fit.m_total / k)) / fit.gamma_hat)


def _observed_sizes(s: Snapshot | Sequence[float]) -> np.ndarray:
    if isinstance(s, Snapshot):
        sizes = np.asarray(s.sizes(), dtype=float)
    else:
        sizes = np.sort(np.asarray(s, dtype=float))[::-1]
    if sizes.size == 0 or not np.all(sizes > 0):
        raise IndexError_("observed sizes must be positive and non-empty")
    return sizes


def _index_value(observed: np.ndarray, fit: ParetoFit, n_top: int) -> float:
    theo = theoretical_sizes(fit, n_top)
    return float(np.sum(theo - observed[:n_top]))


def confidence_band(s: Snapshot | Sequence[float], fit: ParetoFit,
                    n_top: int = 1000) -> tuple[float, float]:
    """Corner band: the index recomputed at gamma_hat +/- 2*se_gamma crossed
    with log_c_hat +/- 2*se_log_c; returns (min, max) over the four corners
    and the central value."""
    observed = _observed_sizes(s)
    if n_top > observed.size:
        raise IndexError_(f"n_top={n_top} exceeds snapshot size {observed.size}")
    values = [_index_value(observed, fit, n_top)]
    if fit.gamma_hat - 2.0 * fit.se_gamma <= 0:
        raise IndexError_(
            "confidence_band: gamma_hat - 2*se_gamma is non-positive, band undefined")
    for dg in (-2.0 * fit.se_gamma, 2.0 * fit.se_gamma):
        for dc in (-2.0 * fit.se_log_c, 2.0 * fit.se_log_c):
            corner = ParetoFit(
                gamma_hat=fit.gamma_hat + dg,
                log_c_hat=fit.log_c_hat + dc,
                s_minus=fit.s_minus,
                s_plus=fit.s_plus,
                se_gamma=fit.se_gamma,
                se_log_c=fit.se_log_c,
                n_points=fit.n_points,
                m_total=fit.m_total,
            )
            values.append(_index_value(observed, corner, n_top))
    return min(values), max(values)


def compute_index(s: Snapshot | Sequence[float], fit: ParetoFit,
                  n_top: int = 1000) -> SbIndexResult:
    """Signed gap sum over the top ``n_top`` ranks, with per-rank detail.

    Accepts a Snapshot or a bare size collection (sorted internally).
    Negative gaps (observed above the line) are kept with sign.
    """
    observed = _observed_sizes(s)
    if n_top > observed.size:
        raise IndexError_(f"n_top={n_top} exceeds snapshot size {observed.size}")
    theo = theoretical_sizes(fit, n_top)
    gaps = tuple(
        RankGap(k + 1, float(observed[k]), float(theo[k])) for k in range(n_top))
    i_sb = float(np.sum(theo - observed[:n_top]))
    band_low, band_high = confidence_band(observed, fit, n_top)
    return SbIndexResult(i_sb=i_sb, n_top=n_top, per_rank_gap=gaps,
                         band_low=band_low, band_high=band_high)


def write_rank_gaps_csv(result: SbIndexResult, path) -> None:
    """Per-rank CSV (`rank,observed,theoretical,gap`), 12 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("rank,observed,theoretical,gap\n")
        for g in result.per_rank_gap:
            fh.write(f"{g.rank},{g.observed:.12g},{g.theoretical:.12g},{g.gap:.12g}\n")
