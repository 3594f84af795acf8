"""
Inverse dynamic identification (IDIM): filtered positions are
differentiated off-line, the inverse model is sampled along the
estimated kinematics and solved by least squares against the torques.
"""
from typing import Dict, List, Optional

import numpy as np

from identsuite.models.estimators.estimation_report import EstimationReport
from identsuite.models.estimators.least_squares import solve
from identsuite.models.estimators.observation import build_observation
from identsuite.models.scara.scara_dynamics import SmoothSignConfig
from identsuite.models.signal.signal_processing import (
    DecimationSpec,
    FilterSpec,
    estimate_kinematics,
)
from identsuite.models.simulation.sim_record import SimRecord
from identsuite.util.app_logger import log_info
from identsuite.util.exceptions import DimensionMismatch, SeriesTooShort


def relative_norm_errors(estimate: np.ndarray,
                         truth: np.ndarray) -> List[Optional[float]]:
    """ ||estimate_j - truth_j|| / ||truth_j|| per column j """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise DimensionMismatch(
            f'estimate {estimate.shape} vs truth {truth.shape}')
    errors = []
    for col in range(truth.shape[1]):
        denom = np.linalg.norm(truth[:, col])
        errors.append(float(np.linalg.norm(estimate[:, col] - truth[:, col])
                            / denom) if denom > 0 else None)
    return errors


def kinematic_errors(q: np.ndarray, qd: np.ndarray, qdd: np.ndarray,
                     reference: SimRecord) -> Dict[str, List[Optional[float]]]:
    """ Errors of (q, qd, qdd) estimates against a noise-free record """
    return {
        "q": relative_norm_errors(q, reference.q),
        "qd": relative_norm_errors(qd, reference.qd),
        "qdd": relative_norm_errors(qdd, reference.qdd),
    }


def idim_identify(measured: SimRecord,
                  filter_spec: Optional[FilterSpec] = None,
                  decimation: Optional[DecimationSpec] = None,
                  ssign: Optional[SmoothSignConfig] = None,
                  solver: str = "wls",
                  edge_samples: int = 0,
                  reference: Optional[SimRecord] = None
                  ) -> EstimationReport:
    """
    IDIM estimate from measured positions and torques.

    Args:
        measured (SimRecord): measured q and tau, sampled at fm.
        filter_spec (FilterSpec): position lowpass, None differentiates
            the raw positions.
        decimation (DecimationSpec): parallel decimation, None keeps
            every sample.
        solver (str): "wls" (default) or "ols".
        edge_samples (int): samples dropped at both ends after
            differentiation.
        reference (SimRecord): noise-free record of the same run. When
            given, the report carries the kinematic estimation errors.

    Raises:
        SeriesTooShort: not enough samples for the filters.
        RankDeficient: the observation matrix is ill-conditioned.
    """
    fm = measured.fm
    q_hat, qd_hat, qdd_hat = estimate_kinematics(measured.q, fm, filter_spec)
    n_samples = len(measured)
    if edge_samples < 0 or 2 * edge_samples >= n_samples:
        raise SeriesTooShort(
            f'cannot drop {edge_samples} edge samples from {n_samples}')
    window = slice(edge_samples, n_samples - edge_samples)
    system = build_observation(q_hat[window], qd_hat[window],
                               qdd_hat[window], measured.tau[window], fm,
                               decimation=decimation, ssign=ssign)
    report = solve(system, solver)
    update = {"method": f"idim-{solver}"}
    if reference is not None:
        ref_window = reference.select(window)
        update["kinematic_errors"] = kinematic_errors(
            q_hat[window], qd_hat[window], qdd_hat[window], ref_window)
    log_info(f'IDIM ({solver}) | rows: {system.rows}'
             f' | cond: {system.condition_number:.1f}'
             f' | rel_error: {report.rel_error}')
    return report.model_copy(update=update)
