"""
Estimation reports and iteration histories, with their JSON and CSV
renderings.
"""
from typing import Dict, List, Optional
import csv
import json
import math

from pydantic import BaseModel, Field, field_validator

from identsuite.constants.const_tables import get_constant
from identsuite.models.scara.scara_dynamics import (
    PARAMETER_NAMES,
    BaseParameters,
)

REPORT_CSV_COLUMNS = ("parameter", "value", "two_sigma", "rel_sigma_pct")


def finite_or_none(value: Optional[float]) -> Optional[float]:
    """ JSON has no NaN/Inf: undefined statistics are reported as None """
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _finite_list(values: List[Optional[float]]) -> List[Optional[float]]:
    return [finite_or_none(v) for v in values]


def _format_cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class EstimationReport(BaseModel):
    """
    Identified parameters with their least-squares statistics.
    """
    method: str
    parameter_names: List[str] = Field(
        default_factory=lambda: list(PARAMETER_NAMES))
    chi_hat: List[float]
    sigma: List[Optional[float]]
    rel_sigma_pct: List[Optional[float]]
    sigma_rho: Optional[float]
    rel_error: Optional[float]
    joint_rel_error: List[Optional[float]] = Field(default_factory=list)
    condition_number: Optional[float]
    rows: int
    iterations: int = 0
    converged: bool = True
    status: str = "ok"
    simulations: int = 0
    # Relative norm errors of the kinematics used to build W, per joint
    kinematic_errors: Optional[Dict[str, List[Optional[float]]]] = None

    sanitize_lists = field_validator(
        'sigma', 'rel_sigma_pct', 'joint_rel_error')(_finite_list)
    sanitize_values = field_validator(
        'sigma_rho', 'rel_error', 'condition_number')(finite_or_none)

    @property
    def chi(self) -> BaseParameters:
        return BaseParameters.from_array(self.chi_hat)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, indent=2)

    def table_rows(self) -> List[dict]:
        """ One row per parameter: value, 2 sigma and relative sigma % """
        labels = get_constant("PARAMETER_LABELS")
        rows = []
        for idx, name in enumerate(self.parameter_names):
            sigma = self.sigma[idx]
            rows.append({
                "parameter": labels.get(name, name),
                "value": self.chi_hat[idx],
                "two_sigma": None if sigma is None else 2.0 * sigma,
                "rel_sigma_pct": self.rel_sigma_pct[idx],
            })
        return rows

    def to_csv(self, path: str) -> str:
        with open(path, 'w', encoding='utf-8', newline='') as csv_file:
            writer = csv.writer(csv_file, lineterminator='\n')
            writer.writerow(REPORT_CSV_COLUMNS)
            for row in self.table_rows():
                writer.writerow([_format_cell(row[col])
                                 for col in REPORT_CSV_COLUMNS])
            writer.writerow(["rel_error", _format_cell(self.rel_error),
                             "", ""])
        return path


class IterationRecord(BaseModel):
    """ State of one iteration k of an iterative estimator """
    iteration: int
    chi: List[float]
    joint_rel_error: List[Optional[float]]
    kv: Optional[List[float]] = None
    delta_norm: Optional[float] = None
    residual_norm: Optional[float] = None
    kinematic_errors: Optional[Dict[str, List[Optional[float]]]] = None

    sanitize_list = field_validator('joint_rel_error')(_finite_list)
    sanitize_values = field_validator(
        'delta_norm', 'residual_norm')(finite_or_none)


class IterationHistory(BaseModel):
    """ Per-iteration trace of DIDIM or output-error runs """
    method: str
    records: List[IterationRecord] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def joint_errors(self, joint: int) -> List[Optional[float]]:
        return [rec.joint_rel_error[joint] for rec in self.records]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, indent=2)

    def to_csv(self, path: str) -> str:
        header = ["iteration"] + list(PARAMETER_NAMES) + \
            ["err_joint1", "err_joint2", "kv1", "kv2", "delta_norm",
             "residual_norm"]
        with open(path, 'w', encoding='utf-8', newline='') as csv_file:
            writer = csv.writer(csv_file, lineterminator='\n')
            writer.writerow(header)
            for rec in self.records:
                kv = rec.kv or [None, None]
                writer.writerow(
                    [rec.iteration] +
                    [_format_cell(v) for v in rec.chi] +
                    [_format_cell(v) for v in rec.joint_rel_error] +
                    [_format_cell(v) for v in kv] +
                    [_format_cell(rec.delta_norm),
                     _format_cell(rec.residual_norm)])
        return path
