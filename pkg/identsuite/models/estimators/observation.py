"""
Over-determined observation systems Y = W chi built by sampling the
inverse dynamic model along a trajectory.
"""
# C0103 | Disable "name doesn't conform to naming rules..." (snake_case)
# pylint: disable=C0103
from typing import List, Optional, Tuple
from dataclasses import dataclass, field

import numpy as np

from identsuite.config.config import Config
from identsuite.models.scara.scara_dynamics import (
    N_JOINTS,
    BaseParameters,
    SmoothSignConfig,
    regressor_series,
)
from identsuite.models.signal.signal_processing import (
    DecimationSpec,
    parallel_decimate,
)
from identsuite.util.app_logger import log_warning
from identsuite.util.exceptions import DimensionMismatch, RankDeficient

settings = Config()

BlockBounds = List[Tuple[int, int]]


def condition_number(W: np.ndarray) -> float:
    """ 2-norm condition number, inf when W has no rows or is singular """
    if W.shape[0] < W.shape[1] or not np.all(np.isfinite(W)):
        return float('inf')
    singular = np.linalg.svd(W, compute_uv=False)
    if singular[-1] == 0:
        return float('inf')
    return float(singular[0] / singular[-1])


@dataclass
class ObservationSystem:
    """
    Stacked measurements Y (r,) and observation matrix W (r, b). Rows
    are grouped by joint, joint_block_bounds giving (start, stop) of each
    joint block.
    """
    Y: np.ndarray
    W: np.ndarray
    joint_block_bounds: BlockBounds
    condition_number: float = field(init=False)

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float).ravel()
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        if self.Y.shape[0] != self.W.shape[0]:
            raise DimensionMismatch(
                f'Y has {self.Y.shape[0]} rows but W has {self.W.shape[0]}')
        self.condition_number = condition_number(self.W)

    @property
    def rows(self) -> int:
        return self.W.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.W.shape[1]

    def block(self, joint: int) -> Tuple[np.ndarray, np.ndarray]:
        start, stop = self.joint_block_bounds[joint]
        return self.Y[start:stop], self.W[start:stop]

    def residual(self, chi) -> np.ndarray:
        chi_arr = chi.to_array() if isinstance(chi, BaseParameters) \
            else np.asarray(chi, dtype=float)
        return self.Y - self.W @ chi_arr

    def joint_relative_errors(self, chi) -> List[float]:
        """ ||Y_j - W_j chi|| / ||Y_j|| for every joint block """
        res = self.residual(chi)
        errors = []
        for start, stop in self.joint_block_bounds:
            denom = np.linalg.norm(self.Y[start:stop])
            errors.append(float(np.linalg.norm(res[start:stop]) / denom)
                          if denom > 0 else float('nan'))
        return errors


def stack_joint_series(series: np.ndarray) -> np.ndarray:
    """ (n, 2) joint series -> (2n,) vector, joint 1 rows first """
    return np.asarray(series, dtype=float).T.ravel()


def check_conditioning(system: ObservationSystem,
                       cond_warn: Optional[float] = None,
                       cond_cap: Optional[float] = None) -> None:
    """
    Raises:
        RankDeficient: W condition number above cond_cap (or infinite).
    """
    cond_warn = settings.COND_WARN if cond_warn is None else cond_warn
    cond_cap = settings.COND_CAP if cond_cap is None else cond_cap
    cond = system.condition_number
    if not cond <= cond_cap:
        raise RankDeficient(
            f'observation matrix condition number {cond:.3e} exceeds'
            f' {cond_cap:.1e}')
    if cond > cond_warn:
        log_warning(f'Badly conditioned observation matrix: cond(W) ='
                    f' {cond:.1f} > {cond_warn:g}')


def build_observation(q: np.ndarray, qd: np.ndarray, qdd: np.ndarray,
                      tau: np.ndarray, fm: float,
                      decimation: Optional[DecimationSpec] = None,
                      ssign: Optional[SmoothSignConfig] = None,
                      cond_warn: Optional[float] = None,
                      cond_cap: Optional[float] = None
                      ) -> ObservationSystem:
    """
    Samples IDM along (q, qd, qdd) and stacks the rows joint by joint:
    Y = [tau_1; tau_2], W = [IDM_1; IDM_2]. With decimation, Y and W are
    parallel-decimated block by block.

    Raises:
        DimensionMismatch: series of different lengths or widths.
        RankDeficient: cond(W) above the configured cap.
    """
    ssign = ssign or SmoothSignConfig()
    series = [np.atleast_2d(np.asarray(s, dtype=float))
              for s in (q, qd, qdd, tau)]
    shapes = {s.shape for s in series}
    if len(shapes) != 1 or series[0].shape[1] != N_JOINTS:
        raise DimensionMismatch(
            f'q, qd, qdd and tau must share an (n, {N_JOINTS}) shape,'
            f' got {[s.shape for s in series]}')
    n_samples = series[0].shape[0]
    idm = regressor_series(series[0], series[1], series[2], ssign)
    W = np.vstack([idm[:, joint, :] for joint in range(N_JOINTS)])
    Y = stack_joint_series(series[3])
    bounds = [(joint * n_samples, (joint + 1) * n_samples)
              for joint in range(N_JOINTS)]
    if decimation is not None:
        Y, W, bounds = parallel_decimate(Y, W, fm, decimation, bounds)
    system = ObservationSystem(Y=Y, W=W, joint_block_bounds=bounds)
    check_conditioning(system, cond_warn, cond_cap)
    return system


def reconstruct_torque(q: np.ndarray, qd: np.ndarray, qdd: np.ndarray,
                       chi: BaseParameters,
                       ssign: Optional[SmoothSignConfig] = None
                       ) -> np.ndarray:
    """
    Torques IDM(q, qd, qdd) chi predicted along a (simulated) trajectory,
    as an (n, 2) array at the sampling rate of the series.
    """
    ssign = ssign or SmoothSignConfig()
    return regressor_series(q, qd, qdd, ssign) @ chi.to_array()
