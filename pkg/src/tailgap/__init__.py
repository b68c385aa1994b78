"""tailgap: interrupted Pareto tails in firm-size data.

Fits power-law tail exponents from yearly firm snapshots, measures the
mass missing from the top of the distribution relative to the fitted law,
and simulates/calibrates a proportional-random-growth model in which the
largest firm intermittently sheds a fraction of its observed assets.
"""

__version__ = "0.1.0"

from .calibrate import (CalibrationResult, FluxPoint, ZkObjective,
                        calibrate_lambda, flux_scan, zk_objective)
from .dataset import (FINANCIAL_INDUSTRIES, FirmRecord, SectorClassifier,
                      SectorSummary, Snapshot, load_classifier, load_snapshot,
                      sector_summary, write_snapshot)
from .errors import (CalibrationError, DataError, FitError, IndexError_,
                     RegressionError, SimulationError, TailgapError)
from .kernelreg import (RegressionCurve, RoaSample, conditional_growth_curve,
                        nw_regress, returns_on_assets)
from .prgsim import (BurnInWarning, DriftVolEstimate, PrgParams, SimConfig,
                     SimResult, available_backends, compiled_kernel_available,
                     estimate_drift_vol, gamma_from_params, h_from_gamma,
                     replica_config, simulate)
from .sbindex import (RankGap, SbIndexResult, compute_index, confidence_band,
                      theoretical_sizes)
from .tailfit import (CcdfPoint, ParetoFit, empirical_ccdf, fit_pareto,
                      suggest_range)

__all__ = [
    "__version__",
    # dataset
    "FINANCIAL_INDUSTRIES", "FirmRecord", "Snapshot", "SectorClassifier",
    "SectorSummary", "load_snapshot", "write_snapshot", "load_classifier",
    "sector_summary",
    # tailfit
    "CcdfPoint", "ParetoFit", "empirical_ccdf", "fit_pareto", "suggest_range",
    # sbindex
    "RankGap", "SbIndexResult", "theoretical_sizes", "compute_index",
    "confidence_band",
    # prgsim
    "PrgParams", "SimConfig", "SimResult", "DriftVolEstimate", "BurnInWarning",
    "gamma_from_params", "h_from_gamma", "estimate_drift_vol", "simulate",
    "replica_config", "available_backends", "compiled_kernel_available",
    # calibrate
    "ZkObjective", "CalibrationResult", "FluxPoint", "zk_objective",
    "calibrate_lambda", "flux_scan",
    # kernelreg
    "RegressionCurve", "RoaSample", "returns_on_assets", "nw_regress",
    "conditional_growth_curve",
    # errors
    "TailgapError", "DataError", "FitError", "IndexError_", "SimulationError",
    "CalibrationError", "RegressionError",
]
