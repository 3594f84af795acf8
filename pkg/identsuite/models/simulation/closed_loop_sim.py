"""
Closed-loop simulation of the PD-controlled SCARA robot, for both the
synthetic actual robot and the simulated robot of the iterative
identification methods.
"""
from typing import Annotated, Optional, Tuple

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict, Field
from scipy.integrate import solve_ivp

from identsuite.config.config import Config
from identsuite.models.control.control_law import (
    DriveChain,
    GainSet,
    PdGains,
    drive_torque,
    pd_control,
)
from identsuite.models.scara.scara_dynamics import (
    BaseParameters,
    SmoothSignConfig,
    accelerations,
    forward_dynamics_series,
)
from identsuite.models.simulation.reference_trajectory import (
    ReferenceTrajectory,
)
from identsuite.models.simulation.sim_record import SimRecord
from identsuite.util.app_logger import log_debug
from identsuite.util.exceptions import IntegrationFailure, RecordTooShort

settings = Config()
DEBUG = False

# Transient length in units of 1 / omega_n_min
TRANSIENT_TIME_CONSTANTS = 5.0

Pair = Tuple[float, float]


def _non_negative(value: Pair) -> Pair:
    if min(value) < 0:
        raise ValueError('noise standard deviations must be >= 0')
    return value


class SimConfig(BaseModel):
    """
    Integrator and sampling settings of a closed-loop run.
    """
    model_config = ConfigDict(frozen=True)

    fm: float = Field(default=200.0, gt=0)
    rel_tol: float = Field(default=1e-8, gt=0)
    abs_tol: float = Field(default=1e-10, gt=0)
    # (q(0), qd(0)); None starts on the reference (qr(0), qdr(0))
    initial_state: Optional[Tuple[Pair, Pair]] = None
    # Added to the initial position (synthetic actual robot only)
    initial_offset: Pair = (0.0, 0.0)
    det_floor: float = Field(default=settings.DET_FLOOR, gt=0)
    # Observation window, defaults to the trajectory duration
    duration: Optional[float] = Field(default=None, gt=0)


class NoiseConfig(BaseModel):
    """
    Additive zero-mean Gaussian noise of the synthetic measurements.
    torque_sigma, when given, overrides torque_sigma_ratio (a fraction of
    each joint's peak torque).
    """
    model_config = ConfigDict(frozen=True)

    torque_sigma: Optional[Annotated[Pair, AfterValidator(_non_negative)]] \
        = None
    torque_sigma_ratio: float = Field(default=0.02, ge=0)
    position_sigma: Annotated[Pair, AfterValidator(_non_negative)] = \
        (0.0, 0.0)
    seed: int = 0


def _initial_state(traj: ReferenceTrajectory, cfg: SimConfig) -> np.ndarray:
    if cfg.initial_state is not None:
        q0, qd0 = (np.asarray(v, dtype=float) for v in cfg.initial_state)
    else:
        q0, qd0, _ = traj.evaluate(0.0)
    return np.concatenate((q0 + np.asarray(cfg.initial_offset), qd0))


def integrate_closed_loop(chi: BaseParameters, gains: PdGains,
                          chain: DriveChain, which_gain: GainSet,
                          traj: ReferenceTrajectory, cfg: SimConfig,
                          ssign: SmoothSignConfig) -> SimRecord:
    """
    Integrates the PD-controlled robot tracking traj with an adaptive
    Runge-Kutta 4(5) pair and samples it at cfg.fm.

    The PD law is evaluated continuously inside the right-hand side;
    accelerations and torques are recomputed at the sample instants.

    Raises:
        SingularInertia: chi gives a singular inertia along the motion.
        IntegrationFailure: the solver failed (step-size underflow).
    """
    duration = cfg.duration or traj.duration
    n_samples = int(round(duration * cfg.fm))
    if n_samples < 2:
        raise IntegrationFailure(
            f'observation window of {duration} s at {cfg.fm} Hz'
            ' holds less than 2 samples')
    times = np.arange(n_samples) / cfg.fm

    chi_values = tuple(chi.to_array().tolist())
    g1, g2 = chain.gains(which_gain).tolist()
    kp1, kp2 = gains.kp
    kv1, kv2 = gains.kv
    epsilon = ssign.epsilon
    det_floor = cfg.det_floor

    def rhs(t, x):
        qr1, qr2 = traj.position_at(t)
        tau1 = g1 * (kp1 * kv1 * (qr1 - x[0]) - kv1 * x[2])
        tau2 = g2 * (kp2 * kv2 * (qr2 - x[1]) - kv2 * x[3])
        qdd1, qdd2 = accelerations(x[0], x[1], x[2], x[3], tau1, tau2,
                                   chi_values, epsilon, det_floor)
        return [x[2], x[3], qdd1, qdd2]

    solution = solve_ivp(rhs, (0.0, float(times[-1])),
                         _initial_state(traj, cfg), method='RK45',
                         t_eval=times, rtol=cfg.rel_tol, atol=cfg.abs_tol)
    if solution.status != 0 or solution.y.shape[1] != n_samples or \
            not np.all(np.isfinite(solution.y)):
        raise IntegrationFailure(
            f'closed-loop integration failed: {solution.message}')
    _ = DEBUG and log_debug(
        f'integrate_closed_loop | nfev: {solution.nfev}'
        f' | samples: {n_samples} | which_gain: {which_gain}')

    q = solution.y[:2].T
    qd = solution.y[2:].T
    qr, _, _ = traj.evaluate(times)
    v_tau = pd_control(qr, q, qd, gains)
    tau = drive_torque(v_tau, chain, which_gain)
    qdd = forward_dynamics_series(q, qd, tau, chi, ssign, det_floor)
    return SimRecord(times=times, q=q, qd=qd, qdd=qdd, tau=tau, v_tau=v_tau)


def synthesize_measurements(record: SimRecord, noise: NoiseConfig,
                            chain: Optional[DriveChain] = None
                            ) -> SimRecord:
    """
    Turns a simulated actual-robot record into measurements: noisy q and
    torque, control signal v = tau / g_actual, and no qd / qdd.
    """
    chain = chain or DriveChain()
    rng = np.random.default_rng(noise.seed)
    if noise.torque_sigma is not None:
        torque_sigma = np.asarray(noise.torque_sigma, dtype=float)
    else:
        torque_sigma = noise.torque_sigma_ratio * \
            np.max(np.abs(record.tau), axis=0)
    position_sigma = np.asarray(noise.position_sigma, dtype=float)
    q = record.q + rng.standard_normal(record.q.shape) * position_sigma
    tau = record.tau + rng.standard_normal(record.tau.shape) * torque_sigma
    return SimRecord(times=record.times.copy(), q=q, tau=tau,
                     v_tau=tau / chain.gains("actual"))


def trim_transient(record: SimRecord, omega_n_min: float) -> SimRecord:
    """
    Drops the samples of the closed-loop transient, t < 5 / omega_n_min.

    Raises:
        RecordTooShort: nothing would be left after the transient.
    """
    t_cut = TRANSIENT_TIME_CONSTANTS / omega_n_min
    if len(record) <= t_cut * record.fm:
        raise RecordTooShort(
            f'record of {len(record)} samples at {record.fm:g} Hz doesn\'t'
            f' outlast the {t_cut:g} s transient')
    # Tolerance keeps the sample lying exactly on t_cut
    first = int(np.searchsorted(record.times, t_cut - 1e-9 / record.fm))
    return record.select(slice(first, None))
