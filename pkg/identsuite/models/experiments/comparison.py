"""
Side-by-side tables of several estimation reports
"""
from typing import Dict, List, Sequence
import csv
import io
import json

from identsuite.constants.const_tables import get_constant
from identsuite.models.estimators.estimation_report import EstimationReport
from identsuite.util.exceptions import ConfigInvalid, DimensionMismatch

VALUE_FIELDS = ("value", "two_sigma", "rel_sigma_pct")


def _labels(reports: Sequence[EstimationReport]) -> List[str]:
    """ Report methods, suffixed when a method shows up twice """
    labels = []
    for report in reports:
        label = report.method
        count = sum(1 for prev in labels if prev.split('#')[0] == label)
        labels.append(label if count == 0 else f'{label}#{count + 1}')
    return labels


def compare_reports(reports: Sequence[EstimationReport]) -> List[Dict]:
    """
    One row per parameter with value, 2 sigma and relative sigma % of
    each report, plus a last row holding the relative residuals.

    Raises:
        ConfigInvalid: no reports.
        DimensionMismatch: reports with different parameter orderings.
    """
    if not reports:
        raise ConfigInvalid(get_constant("ERROR_MESSAGES", "NO_REPORTS"))
    names = reports[0].parameter_names
    if any(report.parameter_names != names for report in reports):
        raise DimensionMismatch(
            get_constant("ERROR_MESSAGES", "REPORT_SHAPE"))
    labels = _labels(reports)
    tables = [report.table_rows() for report in reports]
    rows = []
    for idx in range(len(names)):
        row = {"parameter": tables[0][idx]["parameter"]}
        for label, table in zip(labels, tables):
            for field in VALUE_FIELDS:
                row[f'{label}_{field}'] = table[idx][field]
        rows.append(row)
    residual_row = {"parameter": "rel_error"}
    for label, report in zip(labels, reports):
        residual_row[f'{label}_value'] = report.rel_error
        residual_row[f'{label}_two_sigma'] = None
        residual_row[f'{label}_rel_sigma_pct'] = None
    rows.append(residual_row)
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def comparison_csv(rows: List[Dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()),
                            lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(value) for key, value in row.items()})
    return buffer.getvalue()


def comparison_json(rows: List[Dict]) -> str:
    return json.dumps(rows, sort_keys=True, indent=2)
