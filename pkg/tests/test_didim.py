"""
DIDIM iterations on a simulated actual robot
"""
import numpy as np
import pytest
from pydantic import ValidationError

from identsuite.models.control.control_law import (
    DriveChain,
    LoopTuning,
    tune_gains,
)
from identsuite.models.estimators.didim import (
    DidimOptions,
    bandwidth_ratios,
    check_bandwidth,
    didim_identify,
    initial_parameters,
    jacobian_discrepancy,
    parameters_settled,
    residual_settled,
)
from identsuite.models.estimators.estimation_report import (
    EstimationReport,
    IterationHistory,
)
from identsuite.models.experiments.scenario_config import TrajectorySpec
from identsuite.models.scara.scara_dynamics import (
    BaseParameters,
    SmoothSignConfig,
    effective_inertia,
)
from identsuite.models.simulation.closed_loop_sim import (
    SimConfig,
    integrate_closed_loop,
)
from identsuite.util.exceptions import (
    BandwidthMismatch,
    ConfigInvalid,
    IdentSuiteError,
    MaxIterations,
    NonPositiveInertia,
)


def test_options_validation(nominal):
    with pytest.raises(ValidationError):
        DidimOptions(init_mode="explicit")
    with pytest.raises(ValidationError):
        DidimOptions(tol1=0.0)
    assert DidimOptions(init_mode="explicit",
                        initial_chi=nominal).initial_chi == nominal
    with pytest.raises(ConfigInvalid):
        initial_parameters(DidimOptions(init_mode="idim"))
    regular = initial_parameters(DidimOptions())
    assert regular.zz1r == 1.0 and regular.zz2r == 1.0


def test_stop_rule_helpers():
    opts = DidimOptions(tol1=0.01, tol2=0.01, residual_floor=1e-3)
    assert not residual_settled(None, 1.0, 10.0, opts)
    assert residual_settled(1.0, 1.005, 10.0, opts)
    assert not residual_settled(1.0, 1.1, 10.0, opts)
    # a falling residual never holds the run back
    assert residual_settled(1.0, 0.5, 10.0, opts)
    # changes far below the floor count as no change
    assert residual_settled(1e-12, 2e-12, 10.0, opts)
    chi = np.array([1.0, 0.0, 2.0])
    assert parameters_settled(chi, chi * 1.005, 0.01)
    assert not parameters_settled(chi, chi * 1.05, 0.01)
    assert not parameters_settled(chi, chi + [0.0, 1e-3, 0.0], 0.01)
    assert parameters_settled(chi, chi + [0.0, 1e-8, 0.0], 0.01)


def test_true_parameters_are_a_fixed_point(clean_measurements, short_traj,
                                           fast_tuning, chain, nominal,
                                           actual_record):
    opts = DidimOptions(init_mode="explicit", initial_chi=nominal)
    report, history = didim_identify(
        clean_measurements.tau, short_traj, fast_tuning, chain, opts,
        sim_cfg=SimConfig(fm=100.0), reference=actual_record)
    assert report.converged
    assert report.status == "ok"
    assert report.iterations == 2
    assert report.simulations == 2
    assert len(history) == 2
    np.testing.assert_allclose(report.chi_hat, nominal.to_array(),
                               rtol=1e-6, atol=1e-9)
    first = history.records[0]
    assert first.residual_norm < 1e-6
    assert max(first.kinematic_errors["q"]) < 1e-9


def test_regular_initialization_on_a_short_run(
        clean_measurements, short_traj, fast_tuning, chain, nominal):
    report, history = didim_identify(
        clean_measurements.tau, short_traj, fast_tuning, chain,
        DidimOptions(init_mode="regular-ia", max_iterations=15),
        sim_cfg=SimConfig(fm=100.0))
    assert report.converged
    assert report.method == "didim-ols"
    assert report.rel_error < 1e-3
    np.testing.assert_allclose(report.chi_hat, nominal.to_array(),
                               rtol=5e-2, atol=1e-3)
    assert history.records[0].kv == pytest.approx([20.0, 20.0])
    residuals = [rec.residual_norm for rec in history.records]
    assert residuals[-1] < residuals[0]


def test_max_iterations(clean_measurements, short_traj, fast_tuning, chain):
    opts = DidimOptions(max_iterations=1)
    report, history = didim_identify(clean_measurements.tau, short_traj,
                                     fast_tuning, chain, opts,
                                     sim_cfg=SimConfig(fm=100.0))
    assert not report.converged
    assert report.status == "max_iterations"
    assert len(history) == 1
    with pytest.raises(MaxIterations) as err:
        didim_identify(clean_measurements.tau, short_traj, fast_tuning,
                       chain, opts.model_copy(update={"strict": True}),
                       sim_cfg=SimConfig(fm=100.0))
    assert err.value.payload["report"].status == "max_iterations"
    assert len(err.value.payload["history"]) == 1


def test_non_positive_inertia_stops_the_run(clean_measurements, short_traj,
                                            fast_tuning, chain, nominal):
    bad = nominal.model_copy(update={"zz2r": -0.1})
    with pytest.raises(NonPositiveInertia) as err:
        didim_identify(clean_measurements.tau, short_traj, fast_tuning,
                       chain, DidimOptions(init_mode="explicit",
                                           initial_chi=bad),
                       sim_cfg=SimConfig(fm=100.0))
    assert isinstance(err.value.payload, IterationHistory)
    assert len(err.value.payload) == 0


def test_history_csv(tmp_path, clean_measurements, short_traj, fast_tuning,
                     chain):
    _, history = didim_identify(clean_measurements.tau, short_traj,
                                fast_tuning, chain,
                                DidimOptions(max_iterations=2),
                                sim_cfg=SimConfig(fm=100.0))
    path = history.to_csv(str(tmp_path / 'history.csv'))
    with open(path, encoding='utf-8') as csv_file:
        lines = csv_file.read().splitlines()
    assert lines[0].split(',')[:3] == ["iteration", "zz1r", "fv1"]
    assert lines[0].endswith("kv1,kv2,delta_norm,residual_norm")
    assert len(lines) == 3
    assert history.joint_errors(0)[0] > 0


def _actual_run(traj, tuning, fm):
    """ Noise-free actual robot with its controller tuned on nominal """
    chi = BaseParameters.nominal()
    chain = DriveChain()
    gains = tune_gains(tuning, effective_inertia(chi), chain.g_apriori)
    record = integrate_closed_loop(chi, gains, chain, "actual", traj,
                                   SimConfig(fm=fm), SmoothSignConfig())
    return gains, record


@pytest.fixture(scope="module")
def full_bandwidth_run():
    """ Default trajectory, loops at omega_n = (1, 10), 100 Hz """
    traj = TrajectorySpec().build()
    gains, record = _actual_run(traj, LoopTuning(), 100.0)
    return traj, gains, record


@pytest.mark.slow
def test_convergence_from_the_regular_initialization(full_bandwidth_run):
    traj, gains, record = full_bandwidth_run
    report, history = didim_identify(
        record.tau, traj, LoopTuning(), DriveChain(),
        DidimOptions(init_mode="regular-ia"), sim_cfg=SimConfig(fm=100.0),
        actual_gains=gains)
    nominal = BaseParameters.nominal().to_array()
    assert report.converged
    assert report.iterations <= 5
    assert np.all(np.abs(np.asarray(report.chi_hat) - nominal) <
                  1e-3 * nominal)
    first = history.records[0]
    assert first.kv == pytest.approx([4.0, 20.0])
    assert first.joint_rel_error[0] > 0.3
    assert first.joint_rel_error[1] > 0.5
    for record_k in history.records[3:]:
        assert max(record_k.joint_rel_error) < 0.05
    assert max(report.joint_rel_error) < 0.05


@pytest.mark.slow
def test_jacobian_discrepancy_at_the_nominal_parameters(full_bandwidth_run):
    traj, _, _ = full_bandwidth_run
    discrepancy = jacobian_discrepancy(
        BaseParameters.nominal(), traj, LoopTuning(), DriveChain(),
        sim_cfg=SimConfig(fm=50.0))
    assert discrepancy.shape == (8,)
    assert np.all(np.isfinite(discrepancy))
    assert np.all(discrepancy < 0.15)


@pytest.mark.slow
def test_half_bandwidth_still_converges(full_bandwidth_run):
    traj, gains, record = full_bandwidth_run
    report, _ = didim_identify(
        record.tau, traj, LoopTuning().scaled(0.5), DriveChain(),
        DidimOptions(init_mode="regular-ia"), sim_cfg=SimConfig(fm=100.0),
        actual_gains=gains)
    assert report.converged
    assert report.iterations <= 6


@pytest.mark.slow
def test_quarter_bandwidth_reports_a_failure():
    traj = TrajectorySpec(cycles=2).build()
    gains, record = _actual_run(traj, LoopTuning(), 50.0)
    with pytest.raises(IdentSuiteError) as err:
        didim_identify(record.tau, traj, LoopTuning().scaled(0.25),
                       DriveChain(), DidimOptions(max_iterations=8),
                       sim_cfg=SimConfig(fm=50.0), actual_gains=gains)
    assert err.value.message_code in ('EST-E040', 'CTL-E010', 'DYN-E010')
    if isinstance(err.value, BandwidthMismatch):
        assert err.value.payload["report"].status == "bandwidth_mismatch"
        assert not err.value.payload["report"].converged


def test_bandwidth_ratios(nominal, chain):
    gains = tune_gains(LoopTuning(), effective_inertia(nominal),
                       chain.g_apriori)
    np.testing.assert_allclose(
        bandwidth_ratios(nominal, LoopTuning().scaled(0.5), chain, gains),
        [0.5, 0.5])
    # joint 1 four times heavier than the gains were tuned for: the actual
    # loop runs at half the designed natural frequency
    j1 = effective_inertia(nominal)[0]
    heavier = nominal.model_copy(update={
        "zz1r": 4.0 * j1 - nominal.zz2r - 2.0 * nominal.lmx2})
    ratios = bandwidth_ratios(heavier, LoopTuning(), chain, gains)
    np.testing.assert_allclose(ratios, [2.0, 1.0])


def test_bandwidth_check_flags_slow_simulated_loops(nominal, chain):
    gains = tune_gains(LoopTuning(), effective_inertia(nominal),
                       chain.g_apriori)
    report = EstimationReport(
        method="didim-ols", chi_hat=nominal.to_array().tolist(),
        sigma=[0.0] * 8, rel_sigma_pct=[0.0] * 8, sigma_rho=0.0,
        rel_error=0.0, condition_number=10.0, rows=100, iterations=3)
    history = IterationHistory(method="didim")
    check_bandwidth(report, history, LoopTuning().scaled(1.0 / 3.0), chain,
                    gains)
    with pytest.raises(BandwidthMismatch) as err:
        check_bandwidth(report, history, LoopTuning().scaled(0.25), chain,
                        gains)
    assert err.value.message_code == 'EST-E040'
    assert err.value.payload["history"] is history
    assert err.value.payload["report"].status == "bandwidth_mismatch"
