"""
Observation systems and least-squares solvers
"""
import numpy as np
import pytest

from identsuite.models.estimators.least_squares import (
    joint_noise_levels,
    ols_solve,
    parameter_statistics,
    solve,
    wls_solve,
)
from identsuite.models.estimators.observation import (
    ObservationSystem,
    build_observation,
    check_conditioning,
    condition_number,
    reconstruct_torque,
    stack_joint_series,
)
from identsuite.util.exceptions import DimensionMismatch, RankDeficient


def _random_system(seed=0, rows=60, noise=0.1):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((rows, 8))
    chi = rng.uniform(0.5, 2.0, 8)
    Y = W @ chi + noise * rng.standard_normal(rows)
    half = rows // 2
    return ObservationSystem(Y=Y, W=W,
                             joint_block_bounds=[(0, half), (half, rows)])


def test_condition_number():
    assert condition_number(np.eye(4)) == pytest.approx(1.0)
    assert condition_number(np.diag([1.0, 10.0])) == pytest.approx(10.0)
    assert condition_number(np.ones((3, 5))) == float('inf')
    assert condition_number(np.zeros((4, 2))) == float('inf')


def test_observation_system_checks():
    with pytest.raises(DimensionMismatch):
        ObservationSystem(Y=np.zeros(3), W=np.zeros((4, 2)),
                          joint_block_bounds=[(0, 4)])


def test_ols_matches_the_normal_equations():
    system = _random_system()
    report = ols_solve(system)
    W, Y = system.W, system.Y
    expected = np.linalg.solve(W.T @ W, W.T @ Y)
    np.testing.assert_allclose(report.chi_hat, expected, rtol=1e-10)
    residual = Y - W @ expected
    sigma_rho = np.linalg.norm(residual) / np.sqrt(60 - 8)
    assert report.sigma_rho == pytest.approx(sigma_rho)
    covariance = sigma_rho ** 2 * np.linalg.inv(W.T @ W)
    np.testing.assert_allclose(report.sigma, np.sqrt(np.diag(covariance)),
                               rtol=1e-8)
    np.testing.assert_allclose(
        report.rel_sigma_pct,
        100.0 * np.sqrt(np.diag(covariance)) / np.abs(expected), rtol=1e-8)
    assert report.rel_error == pytest.approx(
        np.linalg.norm(residual) / np.linalg.norm(Y))
    assert report.rows == 60
    assert report.method == "ols"


def test_consistent_system_has_no_residual():
    system = _random_system(noise=0.0)
    report = ols_solve(system)
    assert report.rel_error < 1e-12
    assert report.sigma_rho < 1e-10


def test_square_system_has_no_statistics():
    rng = np.random.default_rng(4)
    system = ObservationSystem(Y=rng.standard_normal(8),
                               W=rng.standard_normal((8, 8)) + 4 * np.eye(8),
                               joint_block_bounds=[(0, 8)])
    report = ols_solve(system)
    assert report.sigma_rho is None
    assert report.sigma == [None] * 8


def test_relative_deviation_undefined_for_zero_parameters():
    system = _random_system()
    chi = np.ones(8)
    chi[3] = 0.0
    _, sigma, rel_sigma = parameter_statistics(system.W, system.Y, chi)
    assert np.isnan(rel_sigma[3])
    assert np.all(np.isfinite(np.delete(rel_sigma, 3)))
    assert np.all(sigma > 0)


def test_rank_deficiency_is_reported():
    system = _random_system()
    W = system.W.copy()
    W[:, 7] = W[:, 6]
    with pytest.raises(RankDeficient):
        ols_solve(ObservationSystem(Y=system.Y, W=W,
                                    joint_block_bounds=[(0, 60)]))
    with pytest.raises(RankDeficient):
        ols_solve(ObservationSystem(Y=system.Y[:5], W=system.W[:5],
                                    joint_block_bounds=[(0, 5)]))
    with pytest.raises(RankDeficient):
        check_conditioning(system, cond_cap=1.0)


def test_wls_equals_ols_on_identical_blocks():
    half = _random_system(seed=2, rows=40)
    system = ObservationSystem(Y=np.concatenate((half.Y, half.Y)),
                               W=np.vstack((half.W, half.W)),
                               joint_block_bounds=[(0, 40), (40, 80)])
    levels = joint_noise_levels(system)
    assert levels[0] == pytest.approx(levels[1])
    np.testing.assert_allclose(wls_solve(system).chi_hat,
                               ols_solve(system).chi_hat, rtol=1e-9)


def test_wls_favours_the_quiet_block():
    rng = np.random.default_rng(5)
    chi = np.linspace(1.0, 2.0, 8)
    W = rng.standard_normal((400, 8))
    noise = np.concatenate((0.01 * rng.standard_normal(200),
                            1.0 * rng.standard_normal(200)))
    system = ObservationSystem(Y=W @ chi + noise, W=W,
                               joint_block_bounds=[(0, 200), (200, 400)])
    levels = joint_noise_levels(system)
    assert levels[1] > 20 * levels[0]
    wls = wls_solve(system)
    ols = ols_solve(system)
    assert np.linalg.norm(np.subtract(wls.chi_hat, chi)) < \
        np.linalg.norm(np.subtract(ols.chi_hat, chi))
    assert wls.method == "wls"
    # fit metrics refer to the unweighted system
    assert wls.rel_error == pytest.approx(
        np.linalg.norm(system.residual(wls.chi_hat)) /
        np.linalg.norm(system.Y))


def test_solver_dispatch():
    system = _random_system()
    assert solve(system, "ols").chi_hat == ols_solve(system).chi_hat
    with pytest.raises(ValueError):
        solve(system, "ridge")


def test_build_observation_stacks_joint_blocks(actual_record, ssign):
    record = actual_record
    system = build_observation(record.q, record.qd, record.qdd, record.tau,
                               record.fm, ssign=ssign)
    n_samples = len(record)
    assert system.joint_block_bounds == [(0, n_samples),
                                         (n_samples, 2 * n_samples)]
    np.testing.assert_array_equal(system.Y, stack_joint_series(record.tau))
    np.testing.assert_array_equal(system.Y[:n_samples], record.tau[:, 0])
    with pytest.raises(DimensionMismatch):
        build_observation(record.q, record.qd, record.qdd, record.tau[:-1],
                          record.fm)


def test_exact_kinematics_recover_the_parameters(actual_record, nominal,
                                                 ssign):
    record = actual_record
    system = build_observation(record.q, record.qd, record.qdd, record.tau,
                               record.fm, ssign=ssign)
    report = ols_solve(system)
    np.testing.assert_allclose(report.chi_hat, nominal.to_array(),
                               rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(
        reconstruct_torque(record.q, record.qd, record.qdd, report.chi,
                           ssign), record.tau, atol=1e-6)


def test_noise_level_estimate_is_calibrated():
    system = _random_system(seed=7, rows=2000, noise=0.1)
    report = ols_solve(system)
    assert report.sigma_rho == pytest.approx(0.1, rel=0.1)


def test_parameter_deviations_match_the_scatter():
    rng = np.random.default_rng(11)
    W = rng.standard_normal((200, 8))
    chi = rng.uniform(0.5, 2.0, 8)
    bounds = [(0, 100), (100, 200)]
    estimates, sigmas = [], []
    for _ in range(300):
        Y = W @ chi + 0.1 * rng.standard_normal(200)
        report = ols_solve(ObservationSystem(Y=Y, W=W,
                                             joint_block_bounds=bounds))
        estimates.append(report.chi_hat)
        sigmas.append(report.sigma)
    scatter = np.std(np.asarray(estimates), axis=0, ddof=1)
    predicted = np.mean(np.asarray(sigmas), axis=0)
    ratio = scatter / predicted
    assert np.all(ratio > 0.5)
    assert np.all(ratio < 2.0)
