"""Exception hierarchy.

Every error raised by the library derives from :class:`TailgapError` and
carries the name of the module it originated in, so the CLI can surface
failures as machine-readable records.
"""


class TailgapError(Exception):
    """Base class for all library errors."""

    module = "tailgap"


class DataError(TailgapError):
    """Snapshot loading / validation failure."""

    module = "dataset"


class FitError(TailgapError):
    """Tail-fit precondition or degeneracy failure."""

    module = "tailfit"


class IndexError_(TailgapError):
    """Missing-mass index failure (named to avoid shadowing the builtin)."""

    module = "sbindex"


class SimulationError(TailgapError):
    """Growth-model simulation failure."""

    module = "prgsim"


class CalibrationError(TailgapError):
    """Calibration failure; identifies the offending candidate when raised
    inside a grid scan."""

    module = "calibrate"


class RegressionError(TailgapError):
    """Kernel-regression precondition failure."""

    module = "kernelreg"
