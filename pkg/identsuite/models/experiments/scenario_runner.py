"""
Runs a scenario against the synthetic actual robot and writes its
artifact bundle.
"""
# R0914 | Disable "too-many-locals"
# pylint: disable=R0914
from typing import Dict, List, Optional
from dataclasses import dataclass, field
import os

import numpy as np

from identsuite.models.estimators.didim import (
    aligned_sim_config,
    didim_identify,
    simulate_estimate,
)
from identsuite.models.estimators.estimation_report import (
    EstimationReport,
    IterationHistory,
)
from identsuite.models.estimators.idim import idim_identify
from identsuite.models.estimators.observation import reconstruct_torque
from identsuite.models.estimators.output_error import oe_position_identify
from identsuite.models.experiments.comparison import (
    compare_reports,
    comparison_csv,
)
from identsuite.models.experiments.scenario_config import (
    METHODS,
    ScenarioConfig,
)
from identsuite.models.signal.signal_processing import (
    downsample_record,
    estimate_kinematics,
)
from identsuite.models.simulation.closed_loop_sim import (
    SimConfig,
    integrate_closed_loop,
    synthesize_measurements,
)
from identsuite.models.simulation.reference_trajectory import (
    ReferenceTrajectory,
)
from identsuite.models.simulation.sim_record import SimRecord
from identsuite.util.app_logger import log_info, log_warning
from identsuite.util.exceptions import ConfigInvalid, IdentSuiteError
from identsuite.util.file_utilities import (
    MANIFEST_FILE,
    output_dir,
    write_json,
    write_manifest,
)
from identsuite.util.utilities import (
    exception_resultset,
    get_default_resultset,
)

DEBUG = False

KINEMATIC_COLUMNS = "iteration,q1,q2,qd1,qd2,qdd1,qdd2"
TORQUE_COLUMNS = "time,tau1,tau2,tau1_hat,tau2_hat"


@dataclass
class Measurements:
    """
    Measured record (noisy q and tau) and the noise-free actual-robot
    record at the same instants.
    """
    measured: SimRecord
    reference: SimRecord
    traj: ReferenceTrajectory

    @property
    def torque_noise_sigma(self) -> float:
        """ Realized torque noise level, RMS over the joints """
        noise = self.measured.tau - self.reference.tau
        return float(np.sqrt(np.mean(np.var(noise, axis=0))))


@dataclass
class MethodOutcome:
    method: str
    report: Optional[EstimationReport] = None
    history: Optional[IterationHistory] = None
    error: Optional[dict] = None
    # (n, 5) time, measured torques and torques predicted by the estimate
    torque_plot: Optional[np.ndarray] = None
    kinematic_rows: List[List] = field(default_factory=list)


def generate_measurements(config: ScenarioConfig) -> Measurements:
    """
    Simulates the actual robot (nominal parameters, controller tuned
    with the a priori parameters) and synthesizes its measurements.
    """
    traj = config.trajectory.build()
    sim_cfg = SimConfig(**config.sim.model_dump(exclude={"downsample"}))
    actual = integrate_closed_loop(config.nominal_chi, config.actual_gains(),
                                   config.chain, "actual", traj, sim_cfg,
                                   config.ssign)
    measured = synthesize_measurements(actual, config.noise_config(),
                                       config.chain)
    if config.sim.downsample > 1:
        actual = downsample_record(actual, config.sim.downsample)
        measured = downsample_record(measured, config.sim.downsample)
    return Measurements(measured=measured, reference=actual, traj=traj)


def estimator_sim_config(config: ScenarioConfig, fm: float) -> SimConfig:
    """ Simulated robot: same integrator, starts on the reference """
    return SimConfig(fm=fm, rel_tol=config.sim.rel_tol,
                     abs_tol=config.sim.abs_tol,
                     det_floor=config.sim.det_floor)


def _kinematic_rows(history: Optional[IterationHistory],
                    report: EstimationReport) -> List[List]:
    entries = [(rec.iteration, rec.kinematic_errors)
               for rec in history.records] if history is not None else \
        [(0, report.kinematic_errors)]
    rows = []
    for iteration, errors in entries:
        if not errors:
            continue
        rows.append([iteration] + [value for key in ("q", "qd", "qdd")
                                   for value in errors.get(key, [None, None])])
    return rows


def _simulated_torque_plot(config: ScenarioConfig, data: Measurements,
                           report: EstimationReport) -> Optional[np.ndarray]:
    """ Measured torques against IDM(q_sim) chi along a run with chi """
    sim_cfg = aligned_sim_config(len(data.measured), estimator_sim_config(
        config, data.measured.fm))
    try:
        _, record = simulate_estimate(report.chi, data.traj,
                                      config.simulated_tuning, config.chain,
                                      sim_cfg, config.ssign)
    except IdentSuiteError as err:
        log_warning(f'{config.name}: no torque reconstruction for'
                    f' {report.method}: {err}')
        return None
    predicted = reconstruct_torque(record.q, record.qd, record.qdd,
                                   report.chi, config.ssign)
    return np.column_stack((data.measured.times, data.measured.tau,
                            predicted))


def _run_idim(config: ScenarioConfig, data: Measurements,
              outcome: MethodOutcome) -> None:
    settings = config.idim
    outcome.report = idim_identify(
        data.measured, settings.filter, settings.decimation, config.ssign,
        settings.solver, settings.edge_samples, reference=data.reference)
    kinematics = estimate_kinematics(data.measured.q, data.measured.fm,
                                     settings.filter)
    predicted = reconstruct_torque(*kinematics, outcome.report.chi,
                                   config.ssign)
    outcome.torque_plot = np.column_stack(
        (data.measured.times, data.measured.tau, predicted))


def _run_didim(config: ScenarioConfig, data: Measurements,
               outcome: MethodOutcome,
               idim_report: Optional[EstimationReport]) -> None:
    opts = config.didim.options()
    if opts.init_mode == "idim":
        if idim_report is None:
            raise ConfigInvalid('didim init_mode idim: no IDIM estimate')
        opts = opts.model_copy(update={"initial_chi": idim_report.chi})
    outcome.report, outcome.history = didim_identify(
        data.measured.tau, data.traj, config.simulated_tuning, config.chain,
        opts, config.didim.decimation,
        estimator_sim_config(config, data.measured.fm), config.ssign,
        reference=data.reference, actual_gains=config.actual_gains())
    outcome.torque_plot = _simulated_torque_plot(config, data,
                                                 outcome.report)


def _run_oe(config: ScenarioConfig, data: Measurements,
            outcome: MethodOutcome) -> None:
    outcome.report, outcome.history = oe_position_identify(
        data.measured.q, data.traj, config.simulated_tuning, config.chain,
        config.oe, estimator_sim_config(config, data.measured.fm),
        config.ssign, reference=data.reference, gains=config.actual_gains())
    outcome.torque_plot = _simulated_torque_plot(config, data,
                                                 outcome.report)


def run_methods(config: ScenarioConfig,
                data: Measurements) -> Dict[str, MethodOutcome]:
    """
    Runs the configured methods (IDIM first) on the measurements.
    Estimator errors are kept as error resultsets in the outcomes.
    """
    outcomes = {}
    for method in [m for m in METHODS if m in config.methods]:
        outcome = MethodOutcome(method=method)
        try:
            if method == "idim":
                _run_idim(config, data, outcome)
            elif method == "didim":
                idim = outcomes.get("idim")
                _run_didim(config, data, outcome,
                           idim.report if idim is not None else None)
            else:
                _run_oe(config, data, outcome)
        except IdentSuiteError as err:
            log_warning(f'{config.name}: {method} failed: {err}')
            outcome.error = exception_resultset(err)
            payload = err.payload
            if isinstance(payload, IterationHistory):
                outcome.history = payload
            elif isinstance(payload, dict):
                outcome.report = payload.get("report")
                outcome.history = payload.get("history")
        if outcome.report is not None:
            outcome.kinematic_rows = _kinematic_rows(outcome.history,
                                                     outcome.report)
        outcomes[method] = outcome
    return outcomes


def _save_table(path: str, table, header: str, fmt: str) -> str:
    np.savetxt(path, np.asarray(table, dtype=float), delimiter=',', fmt=fmt,
               header=header, comments='')
    return path


def _write_outcome(bundle_dir: str, outcome: MethodOutcome) -> List[str]:
    method = outcome.method
    written = []

    def target(name: str) -> str:
        written.append(name)
        return os.path.join(bundle_dir, name)

    if outcome.report is not None:
        with open(target(f'report_{method}.json'), 'w',
                  encoding='utf-8') as json_file:
            json_file.write(outcome.report.to_json() + '\n')
        outcome.report.to_csv(target(f'report_{method}.csv'))
    if outcome.history is not None:
        outcome.history.to_csv(target(f'history_{method}.csv'))
    if outcome.torque_plot is not None:
        _save_table(target(f'torque_{method}.csv'), outcome.torque_plot,
                    TORQUE_COLUMNS, '%.10g')
    if outcome.kinematic_rows:
        table = [[np.nan if v is None else v for v in row]
                 for row in outcome.kinematic_rows]
        _save_table(target(f'kinematics_{method}.csv'), table,
                    KINEMATIC_COLUMNS, '%.6g')
    if outcome.error is not None:
        write_json(target(f'error_{method}.json'), outcome.error)
    return written


def run_scenario(config: ScenarioConfig,
                 out_dir: Optional[str] = None) -> dict:
    """
    Runs config and writes its bundle to <out_dir>/<config.name>:
    measured record, reports (JSON and CSV), iteration histories, plot
    data, comparison table and a manifest with the SHA-256 of each file.

    Returns:
        dict: a resultset; error is True when a method failed, the
            failures being recorded in the bundle.
    """
    result = get_default_resultset()
    bundle_dir = output_dir(config.name, out_dir or config.output_dir)
    log_info(f'Scenario {config.name} | methods: {config.methods}'
             f' | seed: {config.seed} | bundle: {bundle_dir}')
    data = generate_measurements(config)
    outcomes = run_methods(config, data)

    written = ['measured.csv']
    data.measured.to_csv(os.path.join(bundle_dir, 'measured.csv'))
    for outcome in outcomes.values():
        written.extend(_write_outcome(bundle_dir, outcome))
    reports = [o.report for o in outcomes.values() if o.report is not None]
    if reports:
        with open(os.path.join(bundle_dir, 'comparison.csv'), 'w',
                  encoding='utf-8') as csv_file:
            csv_file.write(comparison_csv(compare_reports(reports)))
        written.append('comparison.csv')
    write_manifest(bundle_dir, written, {
        "scenario": config.name,
        "seed": config.seed,
        "methods": list(outcomes.keys()),
    })

    errors = {m: o.error for m, o in outcomes.items() if o.error}
    result['resultset'] = {
        "scenario": config.name,
        "bundle_dir": bundle_dir,
        "files": sorted(written + [MANIFEST_FILE]),
        "reports": {m: o.report.model_dump() for m, o in outcomes.items()
                    if o.report is not None},
        "errors": errors,
    }
    if errors:
        result['error'] = True
        first = next(iter(errors.values()))
        result['error_message'] = '; '.join(
            f'{m}: {e["error_message"]}' for m, e in errors.items())
        result['error_code'] = first['error_code']
    return result
