import math

import numpy as np
import pytest

from tailgap.calibrate import (CalibrationResult, calibrate_lambda, flux_scan,
                               zk_objective)
from tailgap.errors import CalibrationError
from tailgap.prgsim import PrgParams, SimConfig, simulate


def test_zk_perfect_match():
    obs = np.array([100.0, 50.0, 10.0])
    obj = zk_objective([obs.copy(), obs.copy()], obs)
    assert np.all(obj.z_k == 0.0)
    assert obj.mse == 0.0
    assert obj.n_replicas == 2


def test_zk_scale_invariance_trivial():
    obs = np.array([100.0, 50.0, 10.0, 5.0])
    obj = zk_objective([10.0 * obs, 10.0 * obs], obs)
    assert np.allclose(obj.z_k, math.log(10.0))
    assert obj.mse < 1e-24


def test_zk_arithmetic_example():
    e = math.e
    obj = zk_objective([np.array([e * e, e])], np.array([e, e]))
    assert obj.z_k == pytest.approx([1.0, 0.0])
    assert obj.z_bar == pytest.approx(0.5)
    assert obj.mse == pytest.approx(0.25)


def test_zk_scale_invariance_property():
    rng = np.random.default_rng(0)
    obs = np.sort(rng.pareto(1.2, 400) + 1.0)[::-1]
    reps = [np.sort(rng.pareto(1.2, 400) + 1.0)[::-1] for _ in range(5)]
    base = zk_objective(reps, obs).mse
    scaled = zk_objective([10.0 * r for r in reps], obs).mse
    assert abs(scaled - base) <= 1e-12


def test_zk_errors():
    obs = np.array([10.0, 5.0])
    with pytest.raises(CalibrationError, match="replica"):
        zk_objective([np.array([10.0])], obs)
    with pytest.raises(CalibrationError, match="non-positive"):
        zk_objective([np.array([10.0, -5.0])], obs)
    with pytest.raises(CalibrationError, match="no simulated"):
        zk_objective([], obs)


def tiny_setup(lam_star, seed=50):
    from conftest import averaged_rank_profile
    n0 = 800
    params = PrgParams(mu=0.09, sigma=0.17, h=0.08, nu=0.08 * n0,
                       lam=lam_star, epsilon=0.1)
    obs_cfg = SimConfig(seed=(seed,), n_firms_init=n0, dt=1 / 40, burn_in=25.0,
                        horizon=1.0, keep_top=200, init="steady")
    observed = averaged_rank_profile(params, obs_cfg, obs_seed=seed, n_avg=8)
    base = PrgParams(mu=0.09, sigma=0.17, h=0.08, nu=0.08 * n0,
                     lam=0.0, epsilon=0.1)
    cand_cfg = SimConfig(seed=(seed + 1,), n_firms_init=n0, dt=1 / 40,
                         burn_in=25.0, horizon=1.0, keep_top=200, init="steady")
    return base, cand_cfg, observed


def test_calibrate_recovers_lambda_coarsely():
    base, cfg, observed = tiny_setup(lam_star=12.0)
    result = calibrate_lambda(base, cfg, observed, grid=[0, 6, 12, 18],
                              n_replicas=8, n_top=200)
    assert result.lambda_hat == 12.0


def test_calibrate_reproducible_and_parallel_equal():
    base, cfg, observed = tiny_setup(lam_star=6.0, seed=60)
    kw = dict(grid=[0, 6, 12], n_replicas=6, n_top=200)
    seq = calibrate_lambda(base, cfg, observed, **kw)
    par = calibrate_lambda(base, cfg, observed, n_jobs=2, **kw)
    again = calibrate_lambda(base, cfg, observed, **kw)
    assert seq.objective_curve == par.objective_curve == again.objective_curve
    assert seq.lambda_hat == par.lambda_hat


def test_calibrate_grid_validation():
    base, cfg, observed = tiny_setup(lam_star=0.0, seed=70)
    with pytest.raises(CalibrationError, match="empty"):
        calibrate_lambda(base, cfg, observed, grid=[], n_top=200)
    with pytest.raises(CalibrationError, match="non-negative"):
        calibrate_lambda(base, cfg, observed, grid=[-1.0], n_top=200)
    with pytest.raises(CalibrationError, match="need >= n_top"):
        calibrate_lambda(base, cfg, observed, grid=[0.0], n_top=500)


def test_calibrate_propagates_simulation_failure():
    base, cfg, observed = tiny_setup(lam_star=0.0, seed=80)
    with pytest.raises(CalibrationError, match="lambda=40"):
        # lam*dt = 40/40 > 0.5: candidate identified in the error
        calibrate_lambda(base, cfg, observed, grid=[0.0, 40.0],
                         n_replicas=2, n_top=200)


def test_calibration_result_flux():
    base, cfg, observed = tiny_setup(lam_star=0.0, seed=90)
    result = calibrate_lambda(base, cfg, observed, grid=[0.0, 3.0],
                              n_replicas=4, n_top=200)
    assert result.flux == result.epsilon * result.lambda_hat
    d = result.to_dict()
    assert set(d) >= {"lambda_hat", "epsilon", "flux", "objective_curve"}


def test_flux_scan_single_epsilon_reduces_to_calibrate():
    base, cfg, observed = tiny_setup(lam_star=0.0, seed=95)
    single = calibrate_lambda(base, cfg, observed, grid=[0, 2, 4],
                              n_replicas=4, n_top=200)
    scan = flux_scan(base, cfg, observed, epsilons=[base.epsilon],
                     grid=[0, 2, 4], n_replicas=4, n_top=200)
    assert len(scan) == 1
    assert scan[0].lambda_hat == single.lambda_hat
    assert scan[0].flux == single.flux


def test_flux_scan_per_epsilon_grids():
    base, cfg, observed = tiny_setup(lam_star=0.0, seed=97)
    scan = flux_scan(base, cfg, observed, epsilons=[0.05, 0.1],
                     grid={0.05: [0, 2], 0.1: [0, 1]},
                     n_replicas=3, n_top=200)
    assert [p.epsilon for p in scan] == [0.05, 0.1]
    for p in scan:
        assert p.flux == p.epsilon * p.lambda_hat
