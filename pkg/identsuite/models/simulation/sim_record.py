"""
Sampled closed-loop records and their CSV format
"""
from typing import Optional, Union
from dataclasses import dataclass, replace

import numpy as np

from identsuite.util.exceptions import DimensionMismatch

CSV_COLUMNS = ("time", "q1", "q2", "qd1", "qd2", "qdd1", "qdd2",
               "tau1", "tau2", "v1", "v2")


@dataclass(frozen=True)
class SimRecord:
    """
    Time series of a closed-loop run sampled at fm. qd and qdd are None
    for measured records, which only provide q and the control signal.
    """
    times: np.ndarray
    q: np.ndarray
    tau: np.ndarray
    v_tau: np.ndarray
    qd: Optional[np.ndarray] = None
    qdd: Optional[np.ndarray] = None

    def __post_init__(self):
        n_samples = len(self.times)
        for name in ('q', 'tau', 'v_tau', 'qd', 'qdd'):
            value = getattr(self, name)
            if value is not None and np.shape(value)[0] != n_samples:
                raise DimensionMismatch(
                    f'SimRecord.{name} has {np.shape(value)[0]} samples,'
                    f' expected {n_samples}')

    def __len__(self) -> int:
        return len(self.times)

    @property
    def fm(self) -> float:
        """ Sampling rate (Hz) of the uniform time grid """
        if len(self.times) < 2:
            raise DimensionMismatch('sampling rate needs 2 samples')
        return 1.0 / float(self.times[1] - self.times[0])

    @property
    def duration(self) -> float:
        return float(len(self.times)) / self.fm

    def select(self, index: Union[slice, np.ndarray]) -> 'SimRecord':
        """ Sub-record with the samples picked by a slice or a mask """
        def pick(value):
            return None if value is None else value[index]
        return SimRecord(times=self.times[index], q=self.q[index],
                         tau=self.tau[index], v_tau=self.v_tau[index],
                         qd=pick(self.qd), qdd=pick(self.qdd))

    def without_derivatives(self) -> 'SimRecord':
        return replace(self, qd=None, qdd=None)

    def to_array(self) -> np.ndarray:
        """ (n, 11) table in CSV column order, NaN for cleared series """
        blank = np.full_like(self.q, np.nan)
        return np.column_stack([
            self.times,
            self.q,
            blank if self.qd is None else self.qd,
            blank if self.qdd is None else self.qdd,
            self.tau,
            self.v_tau,
        ])

    def to_csv(self, path: str) -> str:
        """ Writes the record to path, 17 significant digits """
        np.savetxt(path, self.to_array(), delimiter=',', fmt='%.17g',
                   header=','.join(CSV_COLUMNS), comments='')
        return path

    @classmethod
    def from_csv(cls, path: str) -> 'SimRecord':
        table = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
        if table.shape[1] != len(CSV_COLUMNS):
            raise DimensionMismatch(
                f'{path}: expected {len(CSV_COLUMNS)} columns,'
                f' got {table.shape[1]}')

        def optional(block: np.ndarray) -> Optional[np.ndarray]:
            return None if np.all(np.isnan(block)) else block

        return cls(times=table[:, 0], q=table[:, 1:3],
                   qd=optional(table[:, 3:5]), qdd=optional(table[:, 5:7]),
                   tau=table[:, 7:9], v_tau=table[:, 9:11])
