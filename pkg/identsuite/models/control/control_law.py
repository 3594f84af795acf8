"""
Joint PD control law, drive chain and gain tuning
"""
from typing import Annotated, Literal, Tuple

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict

from identsuite.constants.const_tables import get_constant
from identsuite.models.scara.scara_dynamics import (
    BaseParameters,
    effective_inertia,
)
from identsuite.util.exceptions import NonPositiveInertia

Pair = Tuple[float, float]
GainSet = Literal["actual", "apriori"]


def _strictly_positive(value: Pair) -> Pair:
    if len(value) != 2 or min(value) <= 0:
        raise ValueError('expected two strictly positive values')
    return value


PositivePair = Annotated[Pair, AfterValidator(_strictly_positive)]


class LoopTuning(BaseModel):
    """
    Desired closed-loop poles per joint (natural frequency, damping).
    """
    model_config = ConfigDict(frozen=True)

    omega_n: PositivePair = tuple(get_constant("FULL_BANDWIDTH", "omega_n"))
    zeta: PositivePair = tuple(get_constant("FULL_BANDWIDTH", "zeta"))

    def scaled(self, factor: float) -> 'LoopTuning':
        """ Same damping, natural frequencies multiplied by factor """
        return LoopTuning(omega_n=tuple(w * factor for w in self.omega_n),
                          zeta=self.zeta)

    @property
    def omega_n_min(self) -> float:
        return min(self.omega_n)


class PdGains(BaseModel):
    """ PD gains: v = kp kv (qr - q) - kv qd """
    model_config = ConfigDict(frozen=True)

    kp: PositivePair
    kv: PositivePair


class DriveChain(BaseModel):
    """
    Composite drive gains (gear ratio x amplifier x torque constant)
    mapping the control signal to joint torque.
    """
    model_config = ConfigDict(frozen=True)

    g_actual: PositivePair = (1.0, 1.0)
    g_apriori: PositivePair = (1.0, 1.0)

    def gains(self, which: GainSet) -> np.ndarray:
        if which == "actual":
            return np.asarray(self.g_actual, dtype=float)
        if which == "apriori":
            return np.asarray(self.g_apriori, dtype=float)
        raise ValueError(f'unknown gain set: {which}')


def pd_control(qr, q, qd, gains: PdGains) -> np.ndarray:
    """ Control signal v = kp kv (qr - q) - kv qd, per joint """
    kp = np.asarray(gains.kp)
    kv = np.asarray(gains.kv)
    return kp * kv * (np.asarray(qr) - np.asarray(q)) - kv * np.asarray(qd)


def drive_torque(v, chain: DriveChain, which: GainSet) -> np.ndarray:
    """ Joint torque tau = g v with the selected gain set """
    return chain.gains(which) * np.asarray(v, dtype=float)


def tune_gains(tuning: LoopTuning, J, g) -> PdGains:
    """
    PD gains placing the poles of the double integrator J qdd = g v at
    the desired (omega_n, zeta):
        kp = omega_n / (2 zeta), kv = 2 zeta omega_n J / g
    """
    omega = np.asarray(tuning.omega_n, dtype=float)
    zeta = np.asarray(tuning.zeta, dtype=float)
    kp = omega / (2.0 * zeta)
    kv = 2.0 * zeta * omega * np.asarray(J, dtype=float) / \
        np.asarray(g, dtype=float)
    return PdGains(kp=tuple(kp.tolist()), kv=tuple(kv.tolist()))


def update_simulated_gains(tuning: LoopTuning, chi_k: BaseParameters,
                           chain: DriveChain) -> PdGains:
    """
    Simulated loop gains for the current estimate chi_k. Only kv moves
    with chi_k; kp depends on the tuning alone.

    Raises:
        NonPositiveInertia: an effective inertia of chi_k is <= 0.
    """
    inertia = effective_inertia(chi_k)
    if np.any(inertia <= 0):
        raise NonPositiveInertia(
            f'effective inertia {inertia.tolist()} of the current'
            ' estimate is not strictly positive')
    return tune_gains(tuning, inertia, chain.g_apriori)


def bandwidth_ratio(J_apriori, J_actual, g_actual, g_apriori) -> np.ndarray:
    """
    Ratio actual/desired of both the natural frequency and the damping
    when the gains were tuned with a priori inertia and drive gain.
    """
    return np.sqrt((np.asarray(J_apriori, dtype=float) /
                    np.asarray(J_actual, dtype=float)) *
                   (np.asarray(g_actual, dtype=float) /
                    np.asarray(g_apriori, dtype=float)))


def closed_loop_poles(gains: PdGains, J, g) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coefficients (a1, a0) of s^2 + a1 s + a0 for the linearized joint
    loop J qdd = g (kp kv (qr - q) - kv qd).
    """
    kp = np.asarray(gains.kp)
    kv = np.asarray(gains.kv)
    ratio = np.asarray(g, dtype=float) / np.asarray(J, dtype=float)
    return kv * ratio, kp * kv * ratio


def loop_natural_frequency(gains: PdGains, J, g) -> np.ndarray:
    """ Natural frequency sqrt(a0) of the linearized joint loops """
    _, a0 = closed_loop_poles(gains, J, g)
    return np.sqrt(a0)
