"""
Off-line signal processing of the identification data: zero-phase
Butterworth lowpass, central differences, parallel decimation and raw
downsampling.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import signal

from identsuite.constants.const_tables import get_constant
from identsuite.models.simulation.sim_record import SimRecord
from identsuite.util.exceptions import (
    ConfigInvalid,
    DimensionMismatch,
    SeriesTooShort,
)

PAD_PER_ORDER = 3


class FilterSpec(BaseModel):
    """
    Butterworth lowpass. With forward_backward the filter runs forward
    then over the time-reversed output (zero phase, squared magnitude).
    """
    model_config = ConfigDict(frozen=True)

    cutoff_hz: float = Field(
        default=get_constant("IDIM_DEFAULTS", "cutoff_hz"), gt=0)
    order: int = Field(
        default=get_constant("IDIM_DEFAULTS", "filter_order"), ge=2)
    forward_backward: bool = True

    def check_rate(self, fm: float) -> None:
        if not self.cutoff_hz < fm / 2.0:
            raise ConfigInvalid(
                f'cutoff {self.cutoff_hz} Hz must be below the Nyquist'
                f' frequency {fm / 2.0} Hz')


class DecimationSpec(BaseModel):
    """
    Keep one sample over nd after an anti-alias lowpass. The cutoff
    defaults to 0.8 fm / (2 nd).
    """
    model_config = ConfigDict(frozen=True)

    nd: int = Field(default=get_constant("IDIM_DEFAULTS", "nd"), ge=1)
    cutoff_hz: Optional[float] = Field(default=None, gt=0)
    order: int = Field(
        default=get_constant("IDIM_DEFAULTS", "filter_order"), ge=2)

    def filter_for(self, fm: float) -> FilterSpec:
        cutoff = self.cutoff_hz or 0.8 * fm / (2.0 * self.nd)
        spec = FilterSpec(cutoff_hz=cutoff, order=self.order)
        spec.check_rate(fm)
        return spec


def zero_phase_lowpass(series: np.ndarray, fm: float,
                       spec: FilterSpec) -> np.ndarray:
    """
    Lowpass filters series along its first axis.

    Edge transients are reduced with an odd reflection of 3 x order
    samples at each end, discarded after filtering.

    Raises:
        SeriesTooShort: not more than 3 x order samples.
        ConfigInvalid: cutoff at or above fm / 2.
    """
    spec.check_rate(fm)
    series = np.asarray(series, dtype=float)
    padlen = PAD_PER_ORDER * spec.order
    if series.shape[0] <= padlen:
        raise SeriesTooShort(
            f'{series.shape[0]} samples, the filter needs more than {padlen}')
    sos = signal.butter(spec.order, spec.cutoff_hz, btype='low', fs=fm,
                        output='sos')
    if spec.forward_backward:
        return signal.sosfiltfilt(sos, series, axis=0, padtype='odd',
                                  padlen=padlen)
    return signal.sosfilt(sos, series, axis=0)


def central_difference(series: np.ndarray, fm: float) -> np.ndarray:
    """
    Derivative estimate d[k] = (s[k+1] - s[k-1]) fm / 2, with one-sided
    first-order differences at both ends.

    Raises:
        SeriesTooShort: less than 3 samples.
    """
    series = np.asarray(series, dtype=float)
    if series.shape[0] < 3:
        raise SeriesTooShort('central difference needs at least 3 samples')
    return np.gradient(series, 1.0 / fm, axis=0, edge_order=1)


def estimate_kinematics(q_samples: np.ndarray, fm: float,
                        spec: Optional[FilterSpec]
                        ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Position, velocity and acceleration estimates from sampled positions.
    Without spec the raw positions are differentiated.
    """
    q_hat = np.asarray(q_samples, dtype=float)
    if spec is not None:
        q_hat = zero_phase_lowpass(q_hat, fm, spec)
    qd_hat = central_difference(q_hat, fm)
    qdd_hat = central_difference(qd_hat, fm)
    return q_hat, qd_hat, qdd_hat


def parallel_decimate(Y: np.ndarray, W: np.ndarray, fm: float,
                      spec: DecimationSpec,
                      block_bounds: Optional[Sequence[Tuple[int, int]]]
                      = None
                      ) -> Tuple[np.ndarray, np.ndarray,
                                 List[Tuple[int, int]]]:
    """
    Applies the same lowpass-then-subsample to Y and to every column of
    W, joint block by joint block, so Y = W chi keeps holding.

    Args:
        Y (np.ndarray): (r,) measurement vector.
        W (np.ndarray): (r, b) observation matrix.
        fm (float): sampling rate of the rows (Hz).
        spec (DecimationSpec): decimation factor and cutoff.
        block_bounds: (start, stop) rows of each joint, defaults to a
            single block.

    Returns:
        Tuple: decimated Y, decimated W and the new block bounds.

    Raises:
        DimensionMismatch: Y and W row counts differ.
    """
    Y = np.asarray(Y, dtype=float)
    W = np.asarray(W, dtype=float)
    if Y.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            f'Y has {Y.shape[0]} rows but W has {W.shape[0]}')
    if block_bounds is None:
        block_bounds = [(0, Y.shape[0])]
    lowpass = spec.filter_for(fm)
    y_blocks, w_blocks, new_bounds = [], [], []
    start_row = 0
    for start, stop in block_bounds:
        stacked = np.column_stack((Y[start:stop], W[start:stop]))
        filtered = zero_phase_lowpass(stacked, fm, lowpass)[::spec.nd]
        y_blocks.append(filtered[:, 0])
        w_blocks.append(filtered[:, 1:])
        new_bounds.append((start_row, start_row + filtered.shape[0]))
        start_row += filtered.shape[0]
    return np.concatenate(y_blocks), np.vstack(w_blocks), new_bounds


def downsample(series: np.ndarray, factor: int) -> np.ndarray:
    """
    Keeps every factor-th sample, without anti-alias filtering.
    """
    if int(factor) != factor or factor < 1:
        raise ValueError('downsample factor must be an integer >= 1')
    return np.asarray(series)[::int(factor)]


def downsample_record(record: SimRecord, factor: int) -> SimRecord:
    """ Record-level downsample (all series, same instants) """
    if int(factor) != factor or factor < 1:
        raise ValueError('downsample factor must be an integer >= 1')
    return record.select(slice(None, None, int(factor)))
