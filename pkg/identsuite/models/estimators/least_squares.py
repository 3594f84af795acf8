"""
Ordinary and weighted least-squares solutions of Y = W chi, with the
standard deviations of the estimates.
"""
# C0103 | Disable "name doesn't conform to naming rules..." (snake_case)
# pylint: disable=C0103
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from identsuite.config.config import Config
from identsuite.models.estimators.estimation_report import EstimationReport
from identsuite.models.estimators.observation import (
    ObservationSystem,
    condition_number,
)
from identsuite.util.app_logger import log_debug, log_warning
from identsuite.util.exceptions import RankDeficient

settings = Config()
DEBUG = False


def _check_solvable(W: np.ndarray, cond: float, cond_cap: float,
                    label: str) -> None:
    rows, n_par = W.shape
    if rows < n_par:
        raise RankDeficient(
            f'{label}: {rows} rows for {n_par} parameters')
    if not cond <= cond_cap:
        raise RankDeficient(
            f'{label}: condition number {cond:.3e} exceeds {cond_cap:.1e}')


def _qr_solve(W: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """ chi = R^-1 Q^T Y from the economic QR of W """
    Q, R = linalg.qr(W, mode='economic')
    return linalg.solve_triangular(R, Q.T @ Y), R


def parameter_statistics(W: np.ndarray, Y: np.ndarray, chi: np.ndarray,
                         R: Optional[np.ndarray] = None
                         ) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Residual standard deviation sigma_rho = ||Y - W chi|| / sqrt(r - b),
    parameter standard deviations from C = sigma_rho^2 (W^T W)^-1 and the
    relative deviations 100 sigma / |chi| (NaN where chi is exactly 0).

    Returns:
        Tuple: (sigma_rho, sigma, rel_sigma_pct), NaN-filled when r == b.
    """
    rows, n_par = W.shape
    chi = np.asarray(chi, dtype=float)
    if rows <= n_par:
        log_warning(f'parameter_statistics: {rows} rows for {n_par}'
                    ' parameters, no degrees of freedom left')
        blank = np.full(n_par, np.nan)
        return float('nan'), blank, blank.copy()
    if R is None:
        _, R = linalg.qr(W, mode='economic')
    residual = Y - W @ chi
    sigma_rho2 = float(residual @ residual) / (rows - n_par)
    R_inv = linalg.solve_triangular(R, np.eye(n_par))
    covariance = sigma_rho2 * (R_inv @ R_inv.T)
    sigma = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    with np.errstate(divide='ignore', invalid='ignore'):
        rel_sigma = np.where(chi != 0.0, 100.0 * sigma / np.abs(chi), np.nan)
    return float(np.sqrt(sigma_rho2)), sigma, rel_sigma


def make_report(method: str, system: ObservationSystem, chi: np.ndarray,
                sigma_rho: float, sigma: np.ndarray,
                rel_sigma: np.ndarray, **extra) -> EstimationReport:
    """ EstimationReport of chi, fit metrics computed on system """
    y_norm = np.linalg.norm(system.Y)
    rel_error = float(np.linalg.norm(system.residual(chi)) / y_norm) \
        if y_norm > 0 else float('nan')
    return EstimationReport(
        method=method,
        chi_hat=np.asarray(chi, dtype=float).tolist(),
        sigma=sigma.tolist(),
        rel_sigma_pct=rel_sigma.tolist(),
        sigma_rho=sigma_rho,
        rel_error=rel_error,
        joint_rel_error=system.joint_relative_errors(chi),
        condition_number=system.condition_number,
        rows=system.rows,
        **extra,
    )


def ols_solve(system: ObservationSystem, cond_cap: Optional[float] = None,
              method: str = "ols") -> EstimationReport:
    """
    Ordinary least squares through a QR decomposition of W.

    Raises:
        RankDeficient: fewer rows than parameters or cond(W) > cond_cap.
    """
    cond_cap = settings.COND_CAP if cond_cap is None else cond_cap
    _check_solvable(system.W, system.condition_number, cond_cap, 'OLS')
    chi, R = _qr_solve(system.W, system.Y)
    sigma_rho, sigma, rel_sigma = parameter_statistics(
        system.W, system.Y, chi, R)
    _ = DEBUG and log_debug(f'ols_solve | rows: {system.rows}'
                            f' | cond: {system.condition_number:.2f}'
                            f' | sigma_rho: {sigma_rho:.4e}')
    return make_report(method, system, chi, sigma_rho, sigma, rel_sigma)


def joint_noise_levels(system: ObservationSystem,
                       cond_cap: Optional[float] = None) -> np.ndarray:
    """
    Per-joint residual standard deviations sigma_rho_j of separate OLS
    fits of each joint block, restricted to the parameters the block
    involves (the non-zero columns).

    Raises:
        RankDeficient: a block cannot be solved.
    """
    cond_cap = settings.COND_CAP if cond_cap is None else cond_cap
    levels = []
    for joint in range(len(system.joint_block_bounds)):
        Y_j, W_j = system.block(joint)
        active = np.any(W_j != 0.0, axis=0)
        W_active = W_j[:, active]
        label = f'WLS joint {joint + 1} block'
        _check_solvable(W_active, condition_number(W_active), cond_cap,
                        label)
        if W_active.shape[0] == W_active.shape[1]:
            raise RankDeficient(f'{label}: no degrees of freedom left')
        chi_j, _ = _qr_solve(W_active, Y_j)
        residual = Y_j - W_active @ chi_j
        levels.append(float(np.linalg.norm(residual) /
                            np.sqrt(W_active.shape[0] - W_active.shape[1])))
    return np.asarray(levels)


def wls_solve(system: ObservationSystem,
              cond_cap: Optional[float] = None) -> EstimationReport:
    """
    Weighted least squares: every row of joint block j is divided by
    sigma_rho_j, then the weighted system is solved by OLS. Fit metrics
    of the report refer to the unweighted system.

    Raises:
        RankDeficient: a block or the weighted system cannot be solved.
    """
    cond_cap = settings.COND_CAP if cond_cap is None else cond_cap
    levels = joint_noise_levels(system, cond_cap)
    if np.max(levels) > 0:
        # Exactly fitted blocks keep a bounded weight
        levels = np.maximum(levels, 1e-3 * np.max(levels))
    else:
        levels = np.ones_like(levels)
    row_weights = np.empty(system.rows)
    for (start, stop), level in zip(system.joint_block_bounds, levels):
        row_weights[start:stop] = 1.0 / level
    weighted = ObservationSystem(Y=system.Y * row_weights,
                                 W=system.W * row_weights[:, np.newaxis],
                                 joint_block_bounds=system.joint_block_bounds)
    _check_solvable(weighted.W, weighted.condition_number, cond_cap, 'WLS')
    chi, R = _qr_solve(weighted.W, weighted.Y)
    _, sigma, rel_sigma = parameter_statistics(weighted.W, weighted.Y, chi, R)
    residual = system.residual(chi)
    dof = system.rows - system.n_parameters
    sigma_rho = float(np.linalg.norm(residual) / np.sqrt(dof)) \
        if dof > 0 else float('nan')
    _ = DEBUG and log_debug(f'wls_solve | joint sigma_rho: {levels.tolist()}')
    return make_report("wls", system, chi, sigma_rho, sigma, rel_sigma)


def solve(system: ObservationSystem, solver: str = "ols",
          cond_cap: Optional[float] = None) -> EstimationReport:
    """ Dispatches to ols_solve or wls_solve """
    if solver == "ols":
        return ols_solve(system, cond_cap)
    if solver == "wls":
        return wls_solve(system, cond_cap)
    raise ValueError(f'unknown least-squares solver: {solver}')
