"""
Position output-error baseline
"""
import numpy as np
import pytest
from pydantic import ValidationError

from identsuite.models.control.control_law import tune_gains
from identsuite.models.estimators import output_error
from identsuite.models.estimators.didim import DidimOptions, didim_identify
from identsuite.models.estimators.estimation_report import IterationHistory
from identsuite.models.estimators.output_error import (
    OutputErrorOptions,
    oe_position_identify,
)
from identsuite.models.scara.scara_dynamics import (
    BaseParameters,
    effective_inertia,
)
from identsuite.models.simulation.closed_loop_sim import SimConfig
from identsuite.util.exceptions import (
    DimensionMismatch,
    IntegrationFailure,
    NonConvergence,
)

MAJOR = [0, 2, 3, 4]  # zz1r, fc1, zz2r, lmx2


@pytest.fixture
def actual_gains(nominal, fast_tuning, chain):
    return tune_gains(fast_tuning, effective_inertia(nominal),
                      chain.g_apriori)


def test_options(nominal):
    opts = OutputErrorOptions(init_mode="explicit", initial_chi=nominal)
    assert opts.max_halvings == 4
    assert opts.rel_step == 1e-4
    with pytest.raises(ValidationError):
        OutputErrorOptions(max_halvings=-1)


def test_true_parameters_are_a_fixed_point(clean_measurements, short_traj,
                                           fast_tuning, chain, nominal,
                                           actual_gains):
    window = clean_measurements.q[:400]
    opts = OutputErrorOptions(init_mode="explicit", initial_chi=nominal)
    report, history = oe_position_identify(
        window, short_traj, fast_tuning, chain, opts,
        sim_cfg=SimConfig(fm=100.0), gains=actual_gains)
    assert report.method == "oe"
    assert report.converged
    assert report.iterations == 1
    # initial run, 2 x 8 jacobian runs, one trial step
    assert report.simulations == 18
    np.testing.assert_allclose(report.chi_hat, nominal.to_array())
    assert report.rel_error == pytest.approx(0.0, abs=1e-12)
    assert history.records[0].kv == pytest.approx(list(actual_gains.kv))


def test_recovery_from_a_perturbed_start(clean_measurements, short_traj,
                                         fast_tuning, chain, nominal,
                                         actual_gains, actual_record):
    start = BaseParameters.from_array(0.9 * nominal.to_array())
    opts = OutputErrorOptions(init_mode="explicit", initial_chi=start,
                              max_iterations=8)
    report, history = oe_position_identify(
        clean_measurements.q[:600], short_traj, fast_tuning, chain, opts,
        sim_cfg=SimConfig(fm=100.0), gains=actual_gains,
        reference=actual_record.select(slice(0, 600)))
    assert report.converged
    np.testing.assert_allclose(np.asarray(report.chi_hat)[MAJOR],
                               nominal.to_array()[MAJOR], rtol=1e-2)
    assert report.rel_error < 1e-3
    residuals = [rec.residual_norm for rec in history.records]
    assert residuals[-1] < residuals[0]
    assert report.simulations >= 1 + 17 * len(history)
    assert history.records[0].kinematic_errors is not None


def test_reference_length_is_checked(clean_measurements, short_traj,
                                     fast_tuning, chain, actual_record):
    with pytest.raises(DimensionMismatch):
        oe_position_identify(clean_measurements.q[:400], short_traj,
                             fast_tuning, chain,
                             reference=actual_record)


def test_no_simulable_step_stops_the_run(monkeypatch, clean_measurements,
                                         short_traj, fast_tuning, chain,
                                         nominal, actual_gains):
    # initial run and jacobian go through, every trial step fails
    calls = {"count": 0}
    integrate = output_error.integrate_closed_loop

    def failing_after_jacobian(*args, **kwargs):
        calls["count"] += 1
        if calls["count"] > 17:
            raise IntegrationFailure('step rejected')
        return integrate(*args, **kwargs)

    monkeypatch.setattr(output_error, "integrate_closed_loop",
                        failing_after_jacobian)
    opts = OutputErrorOptions(init_mode="explicit", initial_chi=nominal)
    with pytest.raises(NonConvergence) as err:
        oe_position_identify(clean_measurements.q[:400], short_traj,
                             fast_tuning, chain, opts,
                             sim_cfg=SimConfig(fm=100.0), gains=actual_gains)
    assert err.value.message_code == 'EST-E030'
    assert isinstance(err.value.payload, IterationHistory)
    assert len(err.value.payload) == 0
    # 17 good runs plus the initial step and its 4 halvings
    assert calls["count"] == 17 + 5


def test_simulation_cost_against_didim(clean_measurements, short_traj,
                                       fast_tuning, chain, nominal,
                                       actual_gains):
    start = BaseParameters.from_array(0.9 * nominal.to_array())
    didim, _ = didim_identify(
        clean_measurements.tau, short_traj, fast_tuning, chain,
        DidimOptions(init_mode="explicit", initial_chi=start,
                     max_iterations=15),
        sim_cfg=SimConfig(fm=100.0))
    oe, _ = oe_position_identify(
        clean_measurements.q[:600], short_traj, fast_tuning, chain,
        OutputErrorOptions(init_mode="explicit", initial_chi=start,
                           max_iterations=8),
        sim_cfg=SimConfig(fm=100.0), gains=actual_gains)
    assert didim.converged and oe.converged
    assert didim.simulations == didim.iterations
    assert oe.simulations >= 1 + 17 * oe.iterations
    assert oe.simulations > 2 * didim.simulations
