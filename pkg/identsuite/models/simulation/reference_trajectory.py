"""
Reference trajectories built from quintic waypoint segments
"""
from typing import Optional, Sequence, Tuple
import bisect

import numpy as np

from identsuite.util.exceptions import ConfigInvalid, DimensionMismatch

N_COEFFICIENTS = 6


def _segment_coefficients(start: np.ndarray, end: np.ndarray,
                          duration: float) -> np.ndarray:
    """
    Coefficients c0..c5 of q(tau) = sum c_i tau^i, tau = t / duration,
    meeting the (q, qd, qdd) rows of start and end.

    Returns:
        np.ndarray: (6, n_joints).
    """
    p0, v0, a0 = start
    p1, v1, a1 = end
    t = duration
    gap = p1 - p0 - v0 * t - 0.5 * a0 * t * t
    dv = (v1 - v0 - a0 * t) * t
    da = (a1 - a0) * t * t
    return np.array([
        p0,
        v0 * t,
        0.5 * a0 * t * t,
        10.0 * gap - 4.0 * dv + 0.5 * da,
        -15.0 * gap + 7.0 * dv - da,
        6.0 * gap - 3.0 * dv + 0.5 * da,
    ])


def _powers(tau: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ tau^i and its first two derivatives, (n, 6) each """
    ones = np.ones_like(tau)
    zeros = np.zeros_like(tau)
    tau2 = tau * tau
    tau3 = tau2 * tau
    basis = np.column_stack((ones, tau, tau2, tau3, tau3 * tau, tau3 * tau2))
    d_basis = np.column_stack((zeros, ones, 2.0 * tau, 3.0 * tau2,
                               4.0 * tau3, 5.0 * tau3 * tau))
    dd_basis = np.column_stack((zeros, zeros, 2.0 * ones, 6.0 * tau,
                                12.0 * tau2, 20.0 * tau3))
    return basis, d_basis, dd_basis


class ReferenceTrajectory:
    """
    Piecewise quintic reference (qr, qdr, qddr), continuous up to the
    acceleration. Each waypoint carries a position, a velocity and an
    acceleration (zero velocity and acceleration by default). Outside
    [0, duration] the trajectory holds its end positions.
    """

    def __init__(self, waypoints: np.ndarray, segment_durations: np.ndarray,
                 velocities: Optional[np.ndarray] = None,
                 accelerations: Optional[np.ndarray] = None):
        self.waypoints = np.asarray(waypoints, dtype=float)
        self.segment_durations = np.asarray(segment_durations, dtype=float)
        self.velocities = np.zeros_like(self.waypoints) \
            if velocities is None else np.asarray(velocities, dtype=float)
        self.accelerations = np.zeros_like(self.waypoints) \
            if accelerations is None else \
            np.asarray(accelerations, dtype=float)
        self.knots = np.concatenate(
            ([0.0], np.cumsum(self.segment_durations)))
        states = np.stack((self.waypoints, self.velocities,
                           self.accelerations), axis=1)
        # (segments, 6, joints)
        self.coefficients = np.array([
            _segment_coefficients(states[idx], states[idx + 1], duration)
            for idx, duration in enumerate(self.segment_durations)])
        # Plain lists for the scalar path used inside the ODE right-hand side
        self._knots = self.knots.tolist()
        self._durations = self.segment_durations.tolist()
        self._coefficients = self.coefficients.transpose(0, 2, 1).tolist()

    @property
    def duration(self) -> float:
        return float(self.knots[-1])

    @property
    def n_joints(self) -> int:
        return self.waypoints.shape[1]

    def _segment(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = np.clip(t, 0.0, self.duration)
        idx = np.searchsorted(self.knots, t, side='right') - 1
        idx = np.clip(idx, 0, len(self.segment_durations) - 1)
        tau = (t - self.knots[idx]) / self.segment_durations[idx]
        return idx, np.clip(tau, 0.0, 1.0)

    def evaluate(self, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Reference position, velocity and acceleration at time(s) t.

        Returns arrays shaped (n, 2) for an array t, (2,) for a scalar t.
        """
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx, tau = self._segment(t)
        basis, d_basis, dd_basis = _powers(tau)
        coefficients = self.coefficients[idx]
        seg_t = self.segment_durations[idx][:, np.newaxis]
        qr = np.einsum('nk,nkj->nj', basis, coefficients)
        qdr = np.einsum('nk,nkj->nj', d_basis, coefficients) / seg_t
        qddr = np.einsum('nk,nkj->nj', dd_basis, coefficients) / seg_t ** 2
        held = (t < 0.0) | (t > self.duration)
        qdr[held] = 0.0
        qddr[held] = 0.0
        if scalar:
            return qr[0], qdr[0], qddr[0]
        return qr, qdr, qddr

    def position_at(self, t: float) -> Tuple[float, ...]:
        """ Scalar reference position, without numpy overhead """
        knots = self._knots
        t = min(max(t, 0.0), knots[-1])
        idx = min(bisect.bisect_right(knots, t) - 1, len(self._durations) - 1)
        tau = (t - knots[idx]) / self._durations[idx]
        return tuple(
            c0 + tau * (c1 + tau * (c2 + tau * (c3 + tau * (c4 + tau * c5))))
            for c0, c1, c2, c3, c4, c5 in self._coefficients[idx])


def _rate_rows(values, n_points: int, n_joints: int,
               label: str) -> np.ndarray:
    if values is None:
        return np.zeros((n_points, n_joints))
    rows = np.asarray(values, dtype=float)
    if rows.shape != (n_points, n_joints):
        raise DimensionMismatch(
            f'{label}: expected {n_points} rows of {n_joints} values,'
            f' got shape {rows.shape}')
    return rows


def quintic_reference(waypoints: Sequence[Sequence[float]],
                      segment_durations: Sequence[float],
                      cycles: int = 1,
                      velocities: Optional[Sequence[Sequence[float]]] = None,
                      accelerations: Optional[Sequence[Sequence[float]]] = None
                      ) -> ReferenceTrajectory:
    """
    Builds a reference trajectory joining the waypoints with quintic
    segments.

    Each cycle replays the waypoint sequence shifted by the net motion of
    one cycle (last minus first waypoint), so a closed waypoint loop
    repeats in place and an open one keeps rotating.

    Args:
        waypoints: k joint-position vectors (k >= 2).
        segment_durations: k - 1 positive durations (s).
        cycles: number of times the waypoint sequence is replayed.
        velocities, accelerations: joint rates at each waypoint, zero when
            omitted.

    Raises:
        DimensionMismatch: inconsistent waypoint/duration/rate counts.
        ConfigInvalid: non-positive durations or cycles.
    """
    points = np.asarray(waypoints, dtype=float)
    durations = np.asarray(segment_durations, dtype=float).ravel()
    if points.ndim != 2 or points.shape[0] < 2:
        raise DimensionMismatch('at least 2 waypoint vectors are required')
    if durations.shape[0] != points.shape[0] - 1:
        raise DimensionMismatch(
            f'{points.shape[0]} waypoints need {points.shape[0] - 1}'
            f' segment durations, got {durations.shape[0]}')
    if not np.all(durations > 0):
        raise ConfigInvalid(
            f'segment durations must be > 0, got {durations.tolist()}')
    if cycles < 1:
        raise ConfigInvalid(f'cycles must be >= 1, got {cycles}')
    rates = [_rate_rows(values, *points.shape, label)
             for values, label in ((velocities, 'velocities'),
                                   (accelerations, 'accelerations'))]
    shift = points[-1] - points[0]
    all_points = [points]
    all_rates = [[rows] for rows in rates]
    for cycle in range(1, cycles):
        all_points.append(points[1:] + cycle * shift)
        for stacked, rows in zip(all_rates, rates):
            stacked.append(rows[1:])
    return ReferenceTrajectory(np.vstack(all_points),
                               np.tile(durations, cycles),
                               *(np.vstack(stacked) for stacked in all_rates))
