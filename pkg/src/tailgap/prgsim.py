"""Proportional random growth with exit, entry and largest-firm shedding.

Firms grow geometrically (drift ``mu``, volatility ``sigma``), exit at rate
``h``, enter at rate ``nu`` with unit size, and — the interruption
mechanism — at rate ``lam`` the currently largest firm's observed size
drops by the fraction ``epsilon``.  The stationary tail exponent of the
base model (``lam = 0``) is

    gamma = 0.5 * (a + sqrt(a**2 + 8*h/sigma**2)),   a = 1 - 2*mu/sigma**2

which this module evaluates forward and inverse.

Time is discretized with Euler-Maruyama on log sizes plus Bernoulli
thinning of all Poisson events, sub-step order fixed as growth, exits,
entries, shedding.  Runs are deterministic given the seed; the compiled
and numpy kernels share one bit-stream discipline so the backend choice
does not change results.

Drift convention: ``mu`` is read as the geometric drift (E[dS/S] = mu dt),
so log increments use mu - sigma^2/2.  Set ``drift_convention="log"`` on
the parameters to treat mu as the log drift instead; the panel estimator
mirrors the same switch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import _sim_numpy
from .dataset import Snapshot
from .errors import SimulationError

try:
    from . import _sim_core
except ImportError:  # extension not built; numpy fallback only
    _sim_core = None

DRIFT_CONVENTIONS = ("geometric", "log")


class BurnInWarning(UserWarning):
    """Burn-in shorter than the ~50/h relaxation heuristic."""


def compiled_kernel_available() -> bool:
    return _sim_core is not None


def available_backends() -> tuple[str, ...]:
    return ("cython", "numpy") if _sim_core is not None else ("numpy",)


def _kernel(backend: str):
    if backend == "auto":
        return _sim_core.run_kernel if _sim_core is not None else _sim_numpy.run_kernel
    if backend == "cython":
        if _sim_core is None:
            raise SimulationError("compiled kernel requested but not built")
        return _sim_core.run_kernel
    if backend == "numpy":
        return _sim_numpy.run_kernel
    raise SimulationError(f"unknown backend {backend!r} (use auto|cython|numpy)")


# ---------------------------------------------------------------------------
# parameters and configuration


@dataclass(frozen=True)
class PrgParams:
    """Model parameters, all rates per year.

    ``lam`` is the shedding rate (events/year) and ``epsilon`` the shed
    fraction; ``entry_size = 1`` unless deliberately overridden.
    """

    mu: float
    sigma: float
    h: float
    nu: float
    lam: float = 0.0
    epsilon: float = 0.1
    entry_size: float = 1.0
    drift_convention: str = "geometric"

    def __post_init__(self):
        if not self.sigma > 0:
            raise SimulationError(f"sigma must be positive, got {self.sigma}")
        if self.h < 0 or self.nu < 0 or self.lam < 0:
            raise SimulationError("rates h, nu, lam must be non-negative")
        if not 0 < self.epsilon < 1:
            raise SimulationError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if not self.entry_size > 0:
            raise SimulationError("entry_size must be positive")
        if self.drift_convention not in DRIFT_CONVENTIONS:
            raise SimulationError(
                f"drift_convention must be one of {DRIFT_CONVENTIONS}")

    @property
    def log_drift(self) -> float:
        """Drift of log size implied by the convention."""
        if self.drift_convention == "geometric":
            return self.mu - 0.5 * self.sigma**2
        return self.mu

    def to_dict(self) -> dict:
        return {
            "mu": self.mu, "sigma": self.sigma, "h": self.h, "nu": self.nu,
            "lambda": self.lam, "epsilon": self.epsilon,
            "entry_size": self.entry_size,
            "drift_convention": self.drift_convention,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrgParams":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass(frozen=True)
class SimConfig:
    """Run configuration.

    ``init="ones"`` starts every firm at the entry size; ``init="steady"``
    samples initial log sizes from the analytic stationary distribution of
    the base model (requires h > 0), which lets short burn-ins reach
    equilibrium.  ``seed`` may be an int or a tuple of ints (the tuple form
    is how calibration derives per-replica streams).
    """

    seed: int | tuple[int, ...]
    n_firms_init: int = 20000
    dt: float = 0.01
    burn_in: float = 200.0
    horizon: float = 1.0
    keep_top: int = 2000
    init: str = "ones"

    def __post_init__(self):
        if self.n_firms_init < 1:
            raise SimulationError("n_firms_init must be >= 1")
        if not 0 < self.dt <= 0.1:
            raise SimulationError(f"dt must lie in (0, 0.1], got {self.dt}")
        if not self.burn_in > 0:
            raise SimulationError("burn_in must be positive")
        if not self.horizon > 0:
            raise SimulationError("horizon must be positive")
        if self.keep_top < 1:
            raise SimulationError("keep_top must be >= 1")
        if self.init not in ("ones", "steady"):
            raise SimulationError('init must be "ones" or "steady"')

    def to_dict(self) -> dict:
        seed = list(self.seed) if isinstance(self.seed, tuple) else self.seed
        return {
            "seed": seed, "n_firms_init": self.n_firms_init, "dt": self.dt,
            "burn_in": self.burn_in, "horizon": self.horizon,
            "keep_top": self.keep_top, "init": self.init,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if isinstance(d.get("seed"), list):
            d["seed"] = tuple(d["seed"])
        return cls(**d)


class EventCounts(NamedTuple):
    entries: int
    exits: int
    sheddings: int


@dataclass(frozen=True)
class SimResult:
    """Top-of-distribution outcome of one run.

    ``sizes_top`` holds the ``keep_top`` largest sizes at the horizon in
    descending order (fewer if the population is smaller); ``shed_total``
    accumulates the exact observed size drop of every shedding event.
    """

    sizes_top: np.ndarray
    shed_total: float
    n_entries: int
    n_exits: int
    n_sheds: int
    n_final: int

    @property
    def n_events(self) -> EventCounts:
        return EventCounts(self.n_entries, self.n_exits, self.n_sheds)


# ---------------------------------------------------------------------------
# the exponent formula, forward and inverse


def gamma_from_params(mu: float, sigma: float, h: float) -> float:
    """Stationary tail exponent of the base model."""
    if sigma == 0:
        raise ValueError("sigma must be non-zero")
    if h < 0:
        raise ValueError("h must be non-negative")
    a = 1.0 - 2.0 * mu / sigma**2
    return 0.5 * (a + math.sqrt(a * a + 8.0 * h / sigma**2))


def h_from_gamma(gamma: float, mu: float, sigma: float) -> float:
    """Exit rate implied by a target tail exponent (inverse of
    :func:`gamma_from_params`; round-trips to ~1e-15)."""
    if sigma == 0:
        raise ValueError("sigma must be non-zero")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    a = 1.0 - 2.0 * mu / sigma**2
    h = 0.5 * sigma**2 * gamma * (gamma - a)
    if h < 0:
        raise ValueError(
            f"gamma={gamma} with mu={mu}, sigma={sigma} implies negative h={h:.4g}")
    return h


def _log_space_exponents(params: PrgParams) -> tuple[float, float]:
    """Decay rates of the stationary log-size density above/below entry."""
    m = params.log_drift
    s2 = params.sigma**2
    disc = math.sqrt(m * m + 2.0 * s2 * params.h)
    gamma_above = (disc - m) / s2
    gamma_below = (disc + m) / s2
    return gamma_above, gamma_below


# ---------------------------------------------------------------------------
# panel estimation of (mu, sigma)


class DriftVolEstimate(NamedTuple):
    mu_hat: float
    sigma_hat: float
    n_matched: int


def estimate_drift_vol(prev: Snapshot, next_: Snapshot,
                       drift_convention: str = "geometric",
                       min_matched: int = 30) -> DriftVolEstimate:
    """Annual drift and volatility from log size changes of firms present
    in both snapshots (exact-name match; ambiguous duplicate names dropped).

    Under the geometric convention the drift adds back sigma_hat^2/2 to the
    mean log change; under "log" it is the mean log change itself.
    """
    if drift_convention not in DRIFT_CONVENTIONS:
        raise SimulationError(f"drift_convention must be one of {DRIFT_CONVENTIONS}")

    def unique_assets(snap: Snapshot) -> dict[str, float]:
        seen: dict[str, float] = {}
        dups: set[str] = set()
        for f in snap.firms:
            if f.name in seen:
                dups.add(f.name)
            seen[f.name] = f.assets
        for name in dups:
            del seen[name]
        return seen

    a_prev = unique_assets(prev)
    a_next = unique_assets(next_)
    names = sorted(set(a_prev) & set(a_next))
    if len(names) < min_matched:
        raise SimulationError(
            f"estimate_drift_vol: only {len(names)} matched firms, need >= {min_matched}")
    r = np.log([a_next[n] / a_prev[n] for n in names])
    sigma_hat = float(np.std(r, ddof=1))
    mu_hat = float(np.mean(r))
    if drift_convention == "geometric":
        mu_hat += 0.5 * sigma_hat**2
    return DriftVolEstimate(mu_hat, sigma_hat, len(names))


# ---------------------------------------------------------------------------
# simulation


def _initial_log_sizes(params: PrgParams, config: SimConfig,
                       rng: np.random.Generator) -> np.ndarray:
    log_entry = math.log(params.entry_size)
    n0 = config.n_firms_init
    if config.init == "ones":
        return np.full(n0, log_entry)
    # "steady": two-sided exponential in log size around the entry point,
    # the stationary density of the base model.
    if params.h <= 0:
        raise SimulationError('init="steady" requires h > 0')
    gamma_above, gamma_below = _log_space_exponents(params)
    u = rng.random(n0)
    e = rng.standard_exponential(n0)
    p_above = gamma_below / (gamma_above + gamma_below)
    x = np.where(u < p_above, e / gamma_above, -e / gamma_below)
    return log_entry + x


def simulate(params: PrgParams, config: SimConfig,
             backend: str = "auto") -> SimResult:
    """Run the model for ``burn_in + horizon`` years and report the top of
    the final size distribution.

    Deterministic given (params, config, seed): the same inputs produce a
    bit-identical result on every backend.

    Raises
    ------
    SimulationError
        A per-step event probability above 0.5 (time step too coarse for
        the Bernoulli thinning), or population extinction before the
        horizon.
    """
    if params.h * config.dt > 0.5 or params.lam * config.dt > 0.5:
        raise SimulationError(
            f"time step too coarse: h*dt={params.h * config.dt:.3g}, "
            f"lam*dt={params.lam * config.dt:.3g} must not exceed 0.5")
    if params.h > 0:
        recommended = 50.0 * max(1.0 / params.h, 1.0)
        if config.burn_in < recommended:
            warnings.warn(
                f"burn_in={config.burn_in:g}y is below the ~{recommended:g}y "
                "relaxation heuristic (50*max(1/h,1)); the measured "
                "distribution may not be stationary",
                BurnInWarning, stacklevel=2)

    rng = np.random.default_rng(config.seed)
    log_s0 = _initial_log_sizes(params, config, rng)
    n_steps = max(1, round((config.burn_in + config.horizon) / config.dt))

    kernel = _kernel(backend)
    log_s, shed_total, n_entries, n_exits, n_sheds, extinct_step = kernel(
        rng, log_s0, n_steps,
        params.log_drift * config.dt,
        params.sigma * math.sqrt(config.dt),
        params.h * config.dt,
        params.nu * config.dt,
        params.lam * config.dt,
        params.epsilon,
        math.log(params.entry_size),
    )
    if extinct_step >= 0:
        raise SimulationError(
            f"population extinct at t={(extinct_step + 1) * config.dt:.2f}y "
            f"(step {extinct_step + 1} of {n_steps})")

    top = np.sort(log_s)[::-1][:config.keep_top]
    return SimResult(
        sizes_top=np.exp(top),
        shed_total=float(shed_total),
        n_entries=int(n_entries),
        n_exits=int(n_exits),
        n_sheds=int(n_sheds),
        n_final=int(log_s.size),
    )


def replica_config(config: SimConfig, replica: int) -> SimConfig:
    """Derive the configuration of one Monte Carlo replica.

    The replica stream is seeded by the entropy pair (base seed, replica
    index), so streams are reproducible, collision-free across replicas,
    and identical across candidate parameter values (common random
    numbers).
    """
    base = config.seed if isinstance(config.seed, tuple) else (config.seed,)
    return replace(config, seed=base + (replica,))


def write_sizes_csv(result: SimResult, path) -> None:
    """Size-rank CSV export (`rank,size`), 12 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("rank,size\n")
        for k, s in enumerate(result.sizes_top, start=1):
            fh.write(f"{k},{s:.12g}\n")
