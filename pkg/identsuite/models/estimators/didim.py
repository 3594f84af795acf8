"""
DIDIM: direct and inverse dynamic identification models.

Each iteration simulates the closed-loop robot with the current estimate,
samples the inverse model along the SIMULATED trajectory and regresses it
on the MEASURED torques (a Gauss-Newton step whose jacobian is the
regressor itself). Only torque measurements are consumed.
"""
# C0103 | Disable "name doesn't conform to naming rules..." (snake_case)
# pylint: disable=C0103
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from identsuite.constants.const_tables import get_constant
from identsuite.models.control.control_law import (
    DriveChain,
    LoopTuning,
    PdGains,
    loop_natural_frequency,
    update_simulated_gains,
)
from identsuite.models.estimators.estimation_report import (
    EstimationReport,
    IterationHistory,
    IterationRecord,
)
from identsuite.models.estimators.idim import kinematic_errors
from identsuite.models.estimators.least_squares import solve
from identsuite.models.estimators.observation import (
    build_observation,
    stack_joint_series,
)
from identsuite.models.scara.scara_dynamics import (
    REGULAR_INIT_MODES,
    BaseParameters,
    SmoothSignConfig,
    effective_inertia,
    regressor_series,
    regular_initialization,
)
from identsuite.models.signal.signal_processing import DecimationSpec
from identsuite.models.simulation.closed_loop_sim import (
    SimConfig,
    integrate_closed_loop,
    trim_transient,
)
from identsuite.models.simulation.reference_trajectory import (
    ReferenceTrajectory,
)
from identsuite.models.simulation.sim_record import SimRecord
from identsuite.util.app_logger import log_debug, log_info, log_warning
from identsuite.util.exceptions import (
    BandwidthMismatch,
    ConfigInvalid,
    DimensionMismatch,
    IdentSuiteError,
    MaxIterations,
)

DEBUG = False

InitMode = Literal["regular-ia", "regular-zz", "explicit", "idim"]

# Parameters smaller than this are judged on their absolute change
SMALL_PARAMETER = 1e-6
# Slowest simulated/actual natural frequency ratio DIDIM is trusted at
MIN_BANDWIDTH_RATIO = get_constant("DIDIM", "MIN_BANDWIDTH_RATIO", 0.3)


class DidimOptions(BaseModel):
    """
    Iteration control of DIDIM (and of the output-error baseline).

    The run stops when the residual norm does not grow by more than tol1
    (relative) and every parameter changes by less than tol2 (relative).
    Residual growth below residual_floor x ||Y|| counts as no change.
    """
    model_config = ConfigDict(frozen=True)

    tol1: float = Field(default=1e-2, gt=0)
    tol2: float = Field(default=1e-2, gt=0)
    max_iterations: int = Field(default=15, ge=1)
    init_mode: InitMode = "regular-ia"
    # Starting point for init_mode explicit / idim
    initial_chi: Optional[BaseParameters] = None
    solver: Literal["ols", "wls"] = "ols"
    residual_floor: float = Field(default=1e-3, ge=0)
    strict: bool = False

    @model_validator(mode='after')
    def check_initial_chi(self) -> 'DidimOptions':
        if self.init_mode == "explicit" and self.initial_chi is None:
            raise ValueError('init_mode explicit needs initial_chi')
        return self


def initial_parameters(opts: DidimOptions) -> BaseParameters:
    """
    Raises:
        ConfigInvalid: init_mode idim without the IDIM estimate.
    """
    if opts.init_mode in REGULAR_INIT_MODES:
        return regular_initialization(opts.init_mode)
    if opts.initial_chi is None:
        raise ConfigInvalid(
            f'init_mode {opts.init_mode} needs an initial_chi')
    return opts.initial_chi


def parameters_settled(chi_k: np.ndarray, chi_next: np.ndarray,
                       tol2: float) -> bool:
    """ |chi_next_i - chi_k_i| / |chi_k_i| <= tol2 for every i """
    change = np.abs(chi_next - chi_k)
    small = np.abs(chi_k) < SMALL_PARAMETER
    with np.errstate(divide='ignore', invalid='ignore'):
        relative = np.where(small, 0.0, change / np.abs(chi_k))
    return bool(np.all(np.where(small, change < SMALL_PARAMETER,
                                relative <= tol2)))


def residual_settled(previous: Optional[float], current: float,
                     y_norm: float, opts: DidimOptions) -> bool:
    """ current - previous <= tol1 max(previous, floor ||Y||) """
    if previous is None:
        return False
    scale = max(previous, opts.residual_floor * y_norm)
    return current - previous <= opts.tol1 * scale


def _fit(report: EstimationReport) -> float:
    return float("inf") if report.rel_error is None else report.rel_error


def _window_start(record: SimRecord, trimmed: SimRecord) -> int:
    return len(record) - len(trimmed)


def simulate_estimate(chi: BaseParameters, traj: ReferenceTrajectory,
                      tuning: LoopTuning, chain: DriveChain,
                      sim_cfg: SimConfig, ssign: SmoothSignConfig
                      ) -> Tuple[PdGains, SimRecord]:
    """ Simulated robot run with chi, gains retuned from chi """
    gains = update_simulated_gains(tuning, chi, chain)
    record = integrate_closed_loop(chi, gains, chain, "apriori", traj,
                                   sim_cfg, ssign)
    return gains, record


def aligned_sim_config(n_samples: int, sim_cfg: SimConfig) -> SimConfig:
    """ Simulation window matching the measurements sample for sample """
    return sim_cfg.model_copy(update={"duration": n_samples / sim_cfg.fm})


def bandwidth_ratios(chi: BaseParameters, tuning: LoopTuning,
                     chain: DriveChain, actual_gains: PdGains) -> np.ndarray:
    """
    Simulated over actual natural frequency, per joint. The actual loops
    run actual_gains on a robot with the inertia of chi.
    """
    with np.errstate(invalid='ignore'):
        actual = loop_natural_frequency(actual_gains, effective_inertia(chi),
                                        chain.g_actual)
    return np.asarray(tuning.omega_n, dtype=float) / actual


def check_bandwidth(report: EstimationReport, history: IterationHistory,
                    tuning: LoopTuning, chain: DriveChain,
                    actual_gains: PdGains) -> None:
    """
    Raises:
        BandwidthMismatch: a simulated loop is slower than
            MIN_BANDWIDTH_RATIO times the actual one, judged with the
            estimated inertia. The report and history are the payload.
    """
    ratios = bandwidth_ratios(report.chi, tuning, chain, actual_gains)
    if np.all(ratios >= MIN_BANDWIDTH_RATIO):
        return
    report = report.model_copy(update={"converged": False,
                                       "status": "bandwidth_mismatch"})
    raise BandwidthMismatch(
        f'simulated/actual natural frequency ratios {ratios.tolist()}'
        f' are below {MIN_BANDWIDTH_RATIO}, the estimate is not reliable',
        payload={"report": report, "history": history})


def didim_identify(torque_measurements: np.ndarray,
                   traj: ReferenceTrajectory,
                   tuning: LoopTuning,
                   chain: DriveChain,
                   opts: Optional[DidimOptions] = None,
                   decimation: Optional[DecimationSpec] = None,
                   sim_cfg: Optional[SimConfig] = None,
                   ssign: Optional[SmoothSignConfig] = None,
                   reference: Optional[SimRecord] = None,
                   actual_gains: Optional[PdGains] = None
                   ) -> Tuple[EstimationReport, IterationHistory]:
    """
    DIDIM estimate from the measured joint torques.

    Args:
        torque_measurements (np.ndarray): (n, 2) torques sampled at
            sim_cfg.fm from t = 0 along traj.
        traj (ReferenceTrajectory): reference tracked by the actual robot.
        tuning (LoopTuning): desired poles of the simulated loops.
        chain (DriveChain): the a priori gains drive the simulation.
        opts (DidimOptions): tolerances, initialization and solver.
        decimation (DecimationSpec): optional parallel decimation.
        sim_cfg (SimConfig): integrator settings and sampling rate.
        reference (SimRecord): noise-free actual-robot record. When
            given, history entries carry the simulated kinematics errors.
        actual_gains (PdGains): gains of the actual controller. When
            given, the final estimate is checked against the bandwidth
            limit.

    Returns:
        Tuple: the final (or best) report and the iteration history.

    Raises:
        NonPositiveInertia, SingularInertia, IntegrationFailure,
        RankDeficient: the run can't go on; the history so far is the
            exception payload.
        MaxIterations: no convergence and opts.strict.
        BandwidthMismatch: simulated loops too slow against the actual
            ones.
    """
    opts = opts or DidimOptions()
    ssign = ssign or SmoothSignConfig()
    sim_cfg = sim_cfg or SimConfig()
    tau = np.atleast_2d(np.asarray(torque_measurements, dtype=float))
    n_samples = tau.shape[0]
    if reference is not None and len(reference) != n_samples:
        raise DimensionMismatch(
            f'reference has {len(reference)} samples, torques {n_samples}')
    sim_cfg = aligned_sim_config(n_samples, sim_cfg)

    chi = initial_parameters(opts)
    history = IterationHistory(method="didim")
    best: Optional[EstimationReport] = None
    previous_residual = None
    y_norm = None
    simulations = 0
    converged = False
    for iteration in range(opts.max_iterations):
        try:
            gains, record = simulate_estimate(chi, traj, tuning, chain,
                                              sim_cfg, ssign)
            simulations += 1
            trimmed = trim_transient(record, tuning.omega_n_min)
            first = _window_start(record, trimmed)
            system = build_observation(trimmed.q, trimmed.qd, trimmed.qdd,
                                       tau[first:], sim_cfg.fm,
                                       decimation=decimation, ssign=ssign)
            report = solve(system, opts.solver)
        except IdentSuiteError as err:
            log_warning(f'DIDIM stopped at iteration {iteration}: {err}')
            err.payload = history
            raise

        y_norm = float(np.linalg.norm(system.Y))
        chi_k = chi.to_array()
        chi_next = np.asarray(report.chi_hat)
        residual = float(np.linalg.norm(system.residual(chi_k)))
        history.append(IterationRecord(
            iteration=iteration,
            chi=chi_k.tolist(),
            joint_rel_error=system.joint_relative_errors(chi_k),
            kv=list(gains.kv),
            delta_norm=float(np.linalg.norm(chi_next - chi_k)),
            residual_norm=residual,
            kinematic_errors=None if reference is None else kinematic_errors(
                trimmed.q, trimmed.qd, trimmed.qdd,
                reference.select(slice(first, None))),
        ))
        _ = DEBUG and log_debug(
            f'didim_identify | k: {iteration} | residual: {residual:.4e}'
            f' | chi_next: {chi_next.tolist()}')

        report = report.model_copy(update={
            "method": f"didim-{opts.solver}",
            "iterations": iteration + 1,
            "simulations": simulations,
        })
        if best is None or _fit(report) < _fit(best):
            best = report
        settled = residual_settled(previous_residual, residual, y_norm,
                                   opts) and \
            parameters_settled(chi_k, chi_next, opts.tol2)
        previous_residual = residual
        chi = BaseParameters.from_array(chi_next)
        if settled:
            converged = True
            break

    if converged:
        log_info(f'DIDIM converged in {report.iterations} iterations'
                 f' | rel_error: {report.rel_error}')
        if not report.chi.is_plausible():
            log_warning(f'DIDIM estimate is not physically plausible:'
                        f' {report.chi_hat}')
    else:
        report = _unconverged(best, simulations, opts, history)
    if actual_gains is not None:
        check_bandwidth(report, history, tuning, chain, actual_gains)
    return report, history


def _unconverged(best: EstimationReport, simulations: int,
                 opts: DidimOptions,
                 history: IterationHistory) -> EstimationReport:
    best = best.model_copy(update={
        "iterations": opts.max_iterations,
        "simulations": simulations,
        "converged": False,
        "status": "max_iterations",
    })
    message = f'DIDIM did not converge in {opts.max_iterations} iterations'
    if opts.strict:
        raise MaxIterations(message, payload={"report": best,
                                              "history": history})
    log_warning(f'{message}, returning the best iterate'
                f' (rel_error: {best.rel_error})')
    return best


def jacobian_discrepancy(chi: BaseParameters, traj: ReferenceTrajectory,
                         tuning: LoopTuning, chain: DriveChain,
                         sim_cfg: Optional[SimConfig] = None,
                         ssign: Optional[SmoothSignConfig] = None,
                         rel_step: float = 1e-4,
                         abs_step: float = 1e-6) -> np.ndarray:
    """
    Compares, column by column, the regressor sampled along the
    simulated trajectory with a central finite-difference jacobian of the
    simulated torque with respect to chi.

    Returns:
        np.ndarray: (8,) ||J_fd[:, i] - W[:, i]|| / ||W[:, i]|| (NaN for
            a zero column).
    """
    ssign = ssign or SmoothSignConfig()
    sim_cfg = sim_cfg or SimConfig()

    def simulated_torque(values: np.ndarray):
        _, record = simulate_estimate(BaseParameters.from_array(values),
                                      traj, tuning, chain, sim_cfg, ssign)
        trimmed = trim_transient(record, tuning.omega_n_min)
        return trimmed, stack_joint_series(trimmed.tau)

    chi_arr = chi.to_array()
    trimmed, _ = simulated_torque(chi_arr)
    idm = regressor_series(trimmed.q, trimmed.qd, trimmed.qdd, ssign)
    W = np.vstack([idm[:, 0, :], idm[:, 1, :]])
    discrepancy = np.empty(chi_arr.shape[0])
    for idx in range(chi_arr.shape[0]):
        step = max(rel_step * abs(chi_arr[idx]), abs_step)
        plus = chi_arr.copy()
        plus[idx] += step
        minus = chi_arr.copy()
        minus[idx] -= step
        column = (simulated_torque(plus)[1] - simulated_torque(minus)[1]) / \
            (2.0 * step)
        norm = np.linalg.norm(W[:, idx])
        discrepancy[idx] = np.linalg.norm(column - W[:, idx]) / norm \
            if norm > 0 else np.nan
    return discrepancy
