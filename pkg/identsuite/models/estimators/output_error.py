"""
Position output-error identification: Gauss-Newton on the distance
between measured and simulated joint positions, with a finite-difference
jacobian of the closed-loop simulation.

The simulated controller keeps the gains of the actual one.
"""
# C0103 | Disable "name doesn't conform to naming rules..." (snake_case)
# pylint: disable=C0103
from typing import List, Optional, Tuple

import numpy as np
from pydantic import Field

from identsuite.models.control.control_law import (
    DriveChain,
    LoopTuning,
    PdGains,
    tune_gains,
)
from identsuite.models.estimators.didim import (
    DidimOptions,
    aligned_sim_config,
    initial_parameters,
    parameters_settled,
    residual_settled,
)
from identsuite.models.estimators.estimation_report import (
    EstimationReport,
    IterationHistory,
    IterationRecord,
)
from identsuite.models.estimators.idim import kinematic_errors
from identsuite.models.estimators.least_squares import (
    make_report,
    ols_solve,
    parameter_statistics,
)
from identsuite.models.estimators.observation import (
    BlockBounds,
    ObservationSystem,
    stack_joint_series,
)
from identsuite.models.scara.scara_dynamics import (
    BaseParameters,
    SmoothSignConfig,
    effective_inertia,
)
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
    DimensionMismatch,
    IdentSuiteError,
    IntegrationFailure,
    MaxIterations,
    NonConvergence,
    SingularInertia,
)

DEBUG = False

DIVERGED = (IntegrationFailure, SingularInertia)


class OutputErrorOptions(DidimOptions):
    """
    DIDIM iteration control plus the finite-difference step and the
    number of step halvings tried when a step increases the residual.
    """
    rel_step: float = Field(default=1e-4, gt=0)
    abs_step: float = Field(default=1e-6, gt=0)
    max_halvings: int = Field(default=4, ge=0)


class _PositionModel:
    """ Simulated positions on the observation window, with a counter """

    def __init__(self, traj: ReferenceTrajectory, tuning: LoopTuning,
                 chain: DriveChain, gains: PdGains, sim_cfg: SimConfig,
                 ssign: SmoothSignConfig):
        self.traj = traj
        self.tuning = tuning
        self.chain = chain
        self.gains = gains
        self.sim_cfg = sim_cfg
        self.ssign = ssign
        self.simulations = 0
        self.first = 0

    def record(self, chi_values: np.ndarray) -> SimRecord:
        """ Simulated record without its transient """
        self.simulations += 1
        record = integrate_closed_loop(
            BaseParameters.from_array(chi_values), self.gains, self.chain,
            "apriori", self.traj, self.sim_cfg, self.ssign)
        trimmed = trim_transient(record, self.tuning.omega_n_min)
        self.first = len(record) - len(trimmed)
        return trimmed

    def outputs(self, chi_values: np.ndarray) -> np.ndarray:
        return stack_joint_series(self.record(chi_values).q)

    def jacobian(self, chi_values: np.ndarray, rel_step: float,
                 abs_step: float) -> np.ndarray:
        """ Central differences, two simulations per parameter """
        columns = []
        for idx in range(chi_values.shape[0]):
            step = max(rel_step * abs(chi_values[idx]), abs_step)
            plus = chi_values.copy()
            plus[idx] += step
            minus = chi_values.copy()
            minus[idx] -= step
            columns.append((self.outputs(plus) - self.outputs(minus)) /
                           (2.0 * step))
        return np.column_stack(columns)


def _joint_errors(y: np.ndarray, y_sim: np.ndarray,
                  bounds: BlockBounds) -> List[Optional[float]]:
    errors = []
    for start, stop in bounds:
        denom = np.linalg.norm(y[start:stop])
        errors.append(float(np.linalg.norm(y[start:stop] - y_sim[start:stop])
                            / denom) if denom > 0 else None)
    return errors


def oe_position_identify(position_measurements: np.ndarray,
                         traj: ReferenceTrajectory,
                         tuning: LoopTuning,
                         chain: DriveChain,
                         opts: Optional[OutputErrorOptions] = None,
                         sim_cfg: Optional[SimConfig] = None,
                         ssign: Optional[SmoothSignConfig] = None,
                         reference: Optional[SimRecord] = None,
                         gains: Optional[PdGains] = None
                         ) -> Tuple[EstimationReport, IterationHistory]:
    """
    Output-error estimate from the measured joint positions.

    Every iteration costs 1 + 2 x 8 closed-loop simulations plus the
    line-search trials. A step that increases the residual is halved up
    to opts.max_halvings times.

    Args:
        gains (PdGains): gains of the actual controller, kept in every
            simulation. None tunes them once from tuning and the initial
            estimate.

    Raises:
        NonConvergence: the residual increased on two consecutive
            iterations, or no trial step could be simulated.
        MaxIterations: no convergence and opts.strict.
        RankDeficient: the sensitivity matrix is ill-conditioned.
    """
    opts = opts or OutputErrorOptions()
    ssign = ssign or SmoothSignConfig()
    sim_cfg = sim_cfg or SimConfig()
    q_meas = np.atleast_2d(np.asarray(position_measurements, dtype=float))
    n_samples = q_meas.shape[0]
    if reference is not None and len(reference) != n_samples:
        raise DimensionMismatch(
            f'reference has {len(reference)} samples, positions {n_samples}')
    history = IterationHistory(method="oe")

    try:
        initial = initial_parameters(opts)
        if gains is None:
            gains = tune_gains(tuning, effective_inertia(initial),
                               chain.g_apriori)
        model = _PositionModel(traj, tuning, chain, gains,
                               aligned_sim_config(n_samples, sim_cfg), ssign)
        chi = initial.to_array()
        trimmed = model.record(chi)
    except IdentSuiteError as err:
        err.payload = history
        raise
    first = model.first
    y = stack_joint_series(q_meas[first:])
    y_sim = stack_joint_series(trimmed.q)
    n_window = len(trimmed)
    bounds = [(0, n_window), (n_window, 2 * n_window)]
    y_norm = float(np.linalg.norm(y))
    residual = float(np.linalg.norm(y - y_sim))
    increases = 0
    converged = False
    sensitivity = None

    for iteration in range(opts.max_iterations):
        try:
            sensitivity = model.jacobian(chi, opts.rel_step, opts.abs_step)
            delta = np.asarray(ols_solve(ObservationSystem(
                Y=y - y_sim, W=sensitivity,
                joint_block_bounds=bounds)).chi_hat)
        except IdentSuiteError as err:
            log_warning(f'OE stopped at iteration {iteration}: {err}')
            err.payload = history
            raise

        step = 1.0
        accepted = None
        trial_residual = float('inf')
        for _ in range(opts.max_halvings + 1):
            candidate = chi + step * delta
            try:
                candidate_rec = model.record(candidate)
            except DIVERGED:
                step *= 0.5
                continue
            candidate_sim = stack_joint_series(candidate_rec.q)
            accepted = (candidate, candidate_rec, candidate_sim)
            trial_residual = float(np.linalg.norm(y - candidate_sim))
            if trial_residual <= residual:
                break
            step *= 0.5
        if accepted is None:
            raise NonConvergence(
                f'OE iteration {iteration}: no trial step could be'
                ' simulated', payload=history)

        history.append(IterationRecord(
            iteration=iteration,
            chi=chi.tolist(),
            joint_rel_error=_joint_errors(y, y_sim, bounds),
            kv=list(gains.kv),
            delta_norm=float(np.linalg.norm(accepted[0] - chi)),
            residual_norm=residual,
            kinematic_errors=None if reference is None else kinematic_errors(
                trimmed.q, trimmed.qd, trimmed.qdd,
                reference.select(slice(first, None))),
        ))
        _ = DEBUG and log_debug(
            f'oe_position_identify | k: {iteration} | residual:'
            f' {residual:.4e} -> {trial_residual:.4e} | step: {step}')
        increases = increases + 1 if trial_residual > residual else 0
        if increases >= 2:
            raise NonConvergence(
                'OE residual increased on two consecutive iterations'
                f' (iteration {iteration})', payload=history)

        settled = residual_settled(residual, trial_residual, y_norm, opts) \
            and parameters_settled(chi, accepted[0], opts.tol2)
        chi, trimmed, y_sim = accepted
        residual = trial_residual
        if settled:
            converged = True
            break

    # Statistics of the last linearized system around the estimate
    linearized = ObservationSystem(Y=y - y_sim + sensitivity @ chi,
                                   W=sensitivity, joint_block_bounds=bounds)
    sigma_rho, sigma, rel_sigma = parameter_statistics(
        linearized.W, linearized.Y, chi)
    report = make_report(
        "oe", linearized, chi, sigma_rho, sigma, rel_sigma,
        iterations=len(history), simulations=model.simulations,
        converged=converged,
        status="ok" if converged else "max_iterations")
    report = report.model_copy(update={
        "rel_error": residual / y_norm if y_norm > 0 else None,
        "joint_rel_error": _joint_errors(y, y_sim, bounds),
    })
    if converged:
        log_info(f'OE converged in {report.iterations} iterations'
                 f' | simulations: {report.simulations}')
        return report, history
    message = f'OE did not converge in {opts.max_iterations} iterations'
    if opts.strict:
        raise MaxIterations(message, payload={"report": report,
                                              "history": history})
    log_warning(message)
    return report, history
