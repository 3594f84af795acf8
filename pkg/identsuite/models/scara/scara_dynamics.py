"""
Closed-form dynamics of the 2-DOF planar SCARA robot (no gravity).

The model is linear in the 8 base parameters:

    tau = IDM(q, qd, qdd) . chi

with chi = [zz1r, fv1, fc1, zz2r, lmx2, lmy2, fv2, fc2]. The Coulomb
terms use the smoothed sign ssign(v) = tanh(v / epsilon) everywhere, so
the simulator and the regressor share the exact same model.
"""
# C0103 | Disable "name doesn't conform to naming rules..." (snake_case)
# pylint: disable=C0103
from typing import Optional, Tuple
from dataclasses import dataclass
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from identsuite.config.config import Config
from identsuite.constants.const_tables import get_constant
from identsuite.util.exceptions import SingularInertia

settings = Config()

PARAMETER_NAMES = tuple(get_constant("PARAMETER_NAMES"))
N_PARAMETERS = len(PARAMETER_NAMES)
N_JOINTS = 2
LINK_LENGTH = get_constant("ROBOT", "LINK_LENGTH", 0.5)

# A 2x8 matrix of torque-per-parameter basis values
RegressorMatrix = np.ndarray

REGULAR_INIT_MODES = ("regular-ia", "regular-zz")


class SmoothSignConfig(BaseModel):
    """
    Smoothed sign function used for the Coulomb friction columns.
    """
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(default=settings.SSIGN_EPSILON, gt=0)

    def apply(self, v):
        """ ssign(v) = tanh(v / epsilon) """
        return np.tanh(np.asarray(v, dtype=float) / self.epsilon)


class BaseParameters(BaseModel):
    """
    The SCARA base parameter vector, ordered as
    [ZZ1R, Fv1, Fc1, ZZ2R, LMX2, LMY2, Fv2, Fc2].
    """
    model_config = ConfigDict(frozen=True)

    zz1r: float = 0.0
    fv1: float = 0.0
    fc1: float = 0.0
    zz2r: float = 0.0
    lmx2: float = 0.0
    lmy2: float = 0.0
    fv2: float = 0.0
    fc2: float = 0.0

    @field_validator('*')
    @classmethod
    def check_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError('base parameters must be finite')
        return value

    def to_array(self) -> np.ndarray:
        """ Parameters as a float array, in base-set order """
        return np.array([getattr(self, name) for name in PARAMETER_NAMES],
                        dtype=float)

    @classmethod
    def from_array(cls, values) -> 'BaseParameters':
        """ Build the parameters from an 8-entry sequence """
        values = np.asarray(values, dtype=float).ravel()
        if values.shape[0] != N_PARAMETERS:
            raise ValueError(
                f'expected {N_PARAMETERS} parameters, got {values.shape[0]}')
        return cls(**dict(zip(PARAMETER_NAMES, values.tolist())))

    @classmethod
    def nominal(cls) -> 'BaseParameters':
        """ Nominal parameters of the prototype robot """
        return cls(**get_constant("NOMINAL_PARAMETERS"))

    def is_plausible(self) -> bool:
        """
        Positive link inertias and non-negative frictions
        """
        return self.zz1r > 0 and self.zz2r > 0 and \
            min(self.fv1, self.fc1, self.fv2, self.fc2) >= 0


@dataclass(frozen=True)
class JointState:
    """ Joint positions, velocities and accelerations """
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray

    def __post_init__(self):
        for name in ('q', 'qd', 'qdd'):
            value = np.asarray(getattr(self, name), dtype=float).reshape(
                N_JOINTS)
            if not np.all(np.isfinite(value)):
                raise ValueError(f'JointState.{name} must be finite')
            object.__setattr__(self, name, value)


def _idm_rows(c2, s2, qd1, qd2, qdd1, qdd2, sign1, sign2):
    """
    Entries of the two IDM rows. Arguments are floats or arrays of one
    shape; the zero entries stay plain floats.
    """
    centrifugal = qd2 * (2.0 * qd1 + qd2)
    inertial = 2.0 * qdd1 + qdd2
    row1 = (qdd1, qd1, sign1, qdd1 + qdd2,
            inertial * c2 - centrifugal * s2,
            -inertial * s2 - centrifugal * c2,
            0.0, 0.0)
    row2 = (0.0, 0.0, 0.0, qdd1 + qdd2,
            qdd1 * c2 + qd1 * qd1 * s2,
            qd1 * qd1 * c2 - qdd1 * s2,
            qd2, sign2)
    return row1, row2


def _inertia_terms(c2, s2, zz1r, zz2r, lmx2, lmy2):
    """ (m11, m12, m22) of M(q), floats or arrays like c2 """
    coupling = lmx2 * c2 - lmy2 * s2
    return zz1r + zz2r + 2.0 * coupling, zz2r + coupling, zz2r


def _solve_inertia(m11, m12, m22, r1, r2):
    """ M qdd = r for the symmetric 2x2 M; returns (det, qdd1, qdd2) """
    det = m11 * m22 - m12 * m12
    return det, (m22 * r1 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det


def regressor_series(q: np.ndarray, qd: np.ndarray, qdd: np.ndarray,
                     ssign: SmoothSignConfig) -> np.ndarray:
    """
    Evaluates IDM(q, qd, qdd) for n samples at once.

    Args:
        q, qd, qdd (np.ndarray): (n, 2) joint series.
        ssign (SmoothSignConfig): Coulomb sign regularization.

    Returns:
        np.ndarray: (n, 2, 8) regressor matrices.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    qd = np.atleast_2d(np.asarray(qd, dtype=float))
    qdd = np.atleast_2d(np.asarray(qdd, dtype=float))
    rows = _idm_rows(np.cos(q[:, 1]), np.sin(q[:, 1]), qd[:, 0], qd[:, 1],
                     qdd[:, 0], qdd[:, 1], ssign.apply(qd[:, 0]),
                     ssign.apply(qd[:, 1]))
    shape = (q.shape[0],)
    return np.stack([
        np.stack([np.broadcast_to(entry, shape) for entry in row], axis=-1)
        for row in rows], axis=1)


def regressor(state: JointState, ssign: SmoothSignConfig) -> RegressorMatrix:
    """ The 2x8 regressor IDM(q, qd, qdd) of a single state """
    return regressor_series(state.q[np.newaxis], state.qd[np.newaxis],
                            state.qdd[np.newaxis], ssign)[0]


def inverse_dynamics(state: JointState, chi: BaseParameters,
                     ssign: SmoothSignConfig) -> np.ndarray:
    """ Joint torques tau = IDM(q, qd, qdd) . chi """
    return regressor(state, ssign) @ chi.to_array()


def inertia_matrix(q, chi: BaseParameters) -> np.ndarray:
    """ The 2x2 inertia matrix M(q, chi) """
    q = np.asarray(q, dtype=float).reshape(N_JOINTS)
    m11, m12, m22 = _inertia_terms(math.cos(q[1]), math.sin(q[1]), chi.zz1r,
                                   chi.zz2r, chi.lmx2, chi.lmy2)
    return np.array([[m11, m12], [m12, m22]])


def _check_determinant(det: float, det_floor: float) -> None:
    if not abs(det) >= det_floor:
        raise SingularInertia(
            f'inertia determinant {det:.3e} below floor {det_floor:.1e}')


def forward_dynamics_series(q: np.ndarray, qd: np.ndarray, tau: np.ndarray,
                            chi: BaseParameters, ssign: SmoothSignConfig,
                            det_floor: Optional[float] = None
                            ) -> np.ndarray:
    """
    Joint accelerations from M(q) qdd = tau - N(q, qd) over (n, 2) series,
    N being IDM(q, qd, 0) . chi (centrifugal, Coriolis and friction).

    Raises:
        SingularInertia: |det M| is below det_floor somewhere.
    """
    det_floor = settings.DET_FLOOR if det_floor is None else det_floor
    q = np.atleast_2d(np.asarray(q, dtype=float))
    nonlinear = regressor_series(q, qd, np.zeros_like(q), ssign) @ \
        chi.to_array()
    rhs = np.atleast_2d(np.asarray(tau, dtype=float)) - nonlinear
    masses = _inertia_terms(np.cos(q[:, 1]), np.sin(q[:, 1]), chi.zz1r,
                            chi.zz2r, chi.lmx2, chi.lmy2)
    with np.errstate(divide='ignore', invalid='ignore'):
        det, qdd1, qdd2 = _solve_inertia(*masses, rhs[:, 0], rhs[:, 1])
    if det.size:
        _check_determinant(float(np.min(np.abs(det))), det_floor)
    return np.column_stack((qdd1, qdd2))


def forward_dynamics(q, qd, tau, chi: BaseParameters,
                     ssign: SmoothSignConfig,
                     det_floor: Optional[float] = None) -> np.ndarray:
    """
    Single-state forward_dynamics_series.

    Raises:
        SingularInertia: |det M| is below det_floor.
    """
    return forward_dynamics_series(
        np.asarray(q, dtype=float).reshape(1, N_JOINTS),
        np.asarray(qd, dtype=float).reshape(1, N_JOINTS),
        np.asarray(tau, dtype=float).reshape(1, N_JOINTS),
        chi, ssign, det_floor)[0]


def accelerations(q1: float, q2: float, qd1: float, qd2: float,
                  tau1: float, tau2: float, chi: Tuple[float, ...],
                  epsilon: float, det_floor: float) -> Tuple[float, float]:
    """
    Scalar forward dynamics for the ODE right-hand side, chi given as a
    plain 8-tuple. Same rows and inertia terms as forward_dynamics_series.
    """
    c2 = math.cos(q2)
    s2 = math.sin(q2)
    row1, row2 = _idm_rows(c2, s2, qd1, qd2, 0.0, 0.0,
                           math.tanh(qd1 / epsilon), math.tanh(qd2 / epsilon))
    n1 = sum(entry * value for entry, value in zip(row1, chi))
    n2 = sum(entry * value for entry, value in zip(row2, chi))
    zz1r, _, _, zz2r, lmx2, lmy2, _, _ = chi
    m11, m12, m22 = _inertia_terms(c2, s2, zz1r, zz2r, lmx2, lmy2)
    _check_determinant(m11 * m22 - m12 * m12, det_floor)
    _, qdd1, qdd2 = _solve_inertia(m11, m12, m22, tau1 - n1, tau2 - n2)
    return qdd1, qdd2


def effective_inertia(chi: BaseParameters) -> np.ndarray:
    """
    Maximum diagonal inertia per joint, used to tune the PD gains:
    J1 = ZZ1R + ZZ2R + 2 LMX2, J2 = ZZ2R (LMY2 neglected).
    """
    return np.array([chi.zz1r + chi.zz2r + 2.0 * chi.lmx2, chi.zz2r])


def standard_to_base(zz1: float, ia1: float, zz2: float, ia2: float,
                     m2: float, link_length: float = LINK_LENGTH,
                     template: Optional[BaseParameters] = None
                     ) -> BaseParameters:
    """
    Regroups the standard inertial parameters into the base inertias
    ZZ1R = ZZ1 + Ia1 + M2 L^2 and ZZ2R = ZZ2 + Ia2. The friction and
    first-moment fields are taken from template untouched.
    """
    if link_length < 0:
        raise ValueError('link_length must be >= 0')
    template = template or BaseParameters()
    return template.model_copy(update={
        'zz1r': zz1 + ia1 + m2 * link_length ** 2,
        'zz2r': zz2 + ia2,
    })


def regular_initialization(mode: str = "regular-ia") -> BaseParameters:
    """
    Initial parameters that need no a priori values: everything zero
    except unit rotor inertias (regular-ia) or unit link inertias
    (regular-zz). Both regroup to ZZ1R = ZZ2R = 1 in the base set.
    """
    if mode == "regular-ia":
        return standard_to_base(zz1=0.0, ia1=1.0, zz2=0.0, ia2=1.0, m2=0.0)
    if mode == "regular-zz":
        return standard_to_base(zz1=1.0, ia1=0.0, zz2=1.0, ia2=0.0, m2=0.0)
    raise ValueError(f'unknown regular initialization mode: {mode}')
