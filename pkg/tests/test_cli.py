"""
Command-line front end
"""
import csv
import glob
import io
import json
import os

import pytest
import yaml

from identsuite import __version__
from identsuite.cli import main


@pytest.fixture
def scenario_file(tmp_path, quick_scenario):
    content = dict(quick_scenario, methods=["idim"])
    path = tmp_path / "quick.yml"
    path.write_text(yaml.safe_dump(content), encoding='utf-8')
    return str(path)


def _stderr_record(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_version(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_usage_errors_exit_with_2():
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["run"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["run", "x.yml", "--format", "xml"])
    assert err.value.code == 2


def test_missing_scenario_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.yml")]) == 1
    record = _stderr_record(capsys)
    assert record["error"] is True
    assert record["error_code"] == "CFG-E010"


def test_run_compare_and_verify(tmp_path, scenario_file, capsys):
    out_dir = str(tmp_path / "out")
    assert main(["run", scenario_file, "--out-dir", out_dir,
                 "--seed", "3"]) == 0
    output = capsys.readouterr().out
    assert "parameter,idim-wls_value" in output
    bundle = os.path.join(out_dir, "quick")
    with open(os.path.join(bundle, "manifest.json"),
              encoding='utf-8') as manifest:
        assert json.load(manifest)["seed"] == 3

    reports = sorted(glob.glob(os.path.join(bundle, "report_*.json")))
    assert main(["compare", *reports, reports[0]]) == 0
    assert "idim-wls#2_value" in capsys.readouterr().out
    assert main(["compare", "--format", "csv", reports[0]]) == 0
    table = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(table) == 9
    assert table[0]["parameter"] == "ZZ1R"
    assert table[-1]["parameter"] == "rel_error"
    assert table[-1]["idim-wls_two_sigma"] == ""
    assert float(table[0]["idim-wls_value"]) > 0
    assert main(["compare", "--format", "json", reports[0]]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["parameter"] == "ZZ1R"

    assert main(["verify", bundle]) == 0
    capsys.readouterr()
    with open(os.path.join(bundle, "measured.csv"), 'a',
              encoding='utf-8') as measured:
        measured.write("0,0,0,0,0,0,0,0,0,0,0\n")
    assert main(["verify", bundle]) == 1
    record = _stderr_record(capsys)
    assert record["error_code"] == "IS-E020"
    assert "measured.csv" in record["error_message"]


def test_verify_without_manifest(tmp_path, capsys):
    assert main(["verify", str(tmp_path)]) == 1
    assert _stderr_record(capsys)["error_code"] == "CFG-E010"


def test_compare_missing_report(tmp_path, capsys):
    assert main(["compare", str(tmp_path / "report_x.json")]) == 1
    assert _stderr_record(capsys)["error_code"] == "CFG-E010"
