"""
End-to-end scenario runs on a short, fast scenario
"""
import json
import os

import numpy as np
import pytest

from identsuite.models.experiments.batch_runner import run_batch
from identsuite.models.experiments.monte_carlo import monte_carlo_statistics
from identsuite.models.experiments.scenario_config import (
    load_scenario,
    shipped_scenarios,
)
from identsuite.models.experiments.scenario_runner import (
    generate_measurements,
    run_methods,
    run_scenario,
)
from identsuite.util.file_utilities import MANIFEST_FILE, verify_manifest


def test_generate_measurements(quick_config):
    data = generate_measurements(quick_config)
    assert len(data.measured) == 1000
    assert data.measured.qd is None
    assert data.reference.qd is not None
    assert 0.0 < data.torque_noise_sigma
    again = generate_measurements(quick_config)
    np.testing.assert_array_equal(again.measured.tau, data.measured.tau)


def test_downsampled_measurements(quick_config):
    slow = quick_config.derived(
        "quick-slow", sim={"fm": 100.0, "downsample": 10},
        idim={"filter": None, "decimation": None})
    data = generate_measurements(slow)
    assert len(data.measured) == 100
    assert data.measured.fm == pytest.approx(10.0)


def test_run_methods(quick_config, nominal):
    outcomes = run_methods(quick_config, generate_measurements(quick_config))
    assert list(outcomes) == ["idim", "didim"]
    idim = outcomes["idim"]
    assert idim.error is None
    assert idim.torque_plot.shape == (1000, 5)
    assert idim.kinematic_rows[0][0] == 0
    didim = outcomes["didim"]
    assert didim.error is None
    assert didim.report.method == "didim-ols"
    assert len(didim.history) == didim.report.iterations
    assert abs(didim.report.chi_hat[0] - nominal.zz1r) < 0.1 * nominal.zz1r


def test_method_errors_are_recorded(quick_config):
    broken = quick_config.derived(
        "quick-broken", methods=["didim"],
        didim={"init_mode": "explicit", "max_iterations": 2,
               "initial_chi": {"zz1r": 1.0, "zz2r": -1.0}})
    outcomes = run_methods(broken, generate_measurements(broken))
    error = outcomes["didim"].error
    assert error["error"] is True
    assert error["error_code"] == "CTL-E010"
    assert outcomes["didim"].report is None


def test_run_scenario_writes_a_verified_bundle(tmp_path, quick_config):
    result = run_scenario(quick_config, str(tmp_path))
    assert result["error"] is False
    bundle = result["resultset"]["bundle_dir"]
    assert bundle == os.path.join(str(tmp_path), "quick")
    files = set(result["resultset"]["files"])
    for name in ("measured.csv", "comparison.csv", MANIFEST_FILE,
                 "report_idim.json", "report_idim.csv", "report_didim.json",
                 "history_didim.csv", "torque_idim.csv", "torque_didim.csv",
                 "kinematics_idim.csv", "kinematics_didim.csv"):
        assert name in files
        assert os.path.isfile(os.path.join(bundle, name))
    assert verify_manifest(bundle) == []
    with open(os.path.join(bundle, MANIFEST_FILE), encoding='utf-8') as mf:
        manifest = json.load(mf)
    assert manifest["seed"] == 7
    assert manifest["methods"] == ["idim", "didim"]
    with open(os.path.join(bundle, "torque_didim.csv"),
              encoding='utf-8') as csv_file:
        assert csv_file.readline().strip() == \
            "time,tau1,tau2,tau1_hat,tau2_hat"

    with open(os.path.join(bundle, "comparison.csv"), 'a',
              encoding='utf-8') as csv_file:
        csv_file.write("tampered\n")
    assert verify_manifest(bundle) == ["comparison.csv: hash mismatch"]


def test_bundles_are_reproducible(tmp_path, quick_config):
    idim_only = quick_config.derived("quick-idim", methods=["idim"])
    first = run_batch([idim_only], str(tmp_path / "one"))[0]
    second = run_batch([idim_only], str(tmp_path / "two"))[0]
    with open(os.path.join(first["resultset"]["bundle_dir"],
                           MANIFEST_FILE), encoding='utf-8') as one, \
            open(os.path.join(second["resultset"]["bundle_dir"],
                              MANIFEST_FILE), encoding='utf-8') as two:
        assert json.load(one)["files"] == json.load(two)["files"]


def test_monte_carlo_statistics(quick_config):
    idim_only = quick_config.derived("quick-mc", methods=["idim"])
    statistics = monte_carlo_statistics(idim_only, range(3))
    idim = statistics["idim"]
    assert idim["runs"] == 3
    assert idim["failures"] == 0
    assert len(idim["mean"]) == 8
    assert all(value > 0 for value in idim["empirical_std"])
    assert idim["sigma_rho_over_noise"] > 0


def _shipped(name):
    path, = [path for path in shipped_scenarios()
             if os.path.basename(path) == f'{name}.yml']
    return load_scenario(path)


@pytest.mark.slow
def test_low_sampling_rate_scenario(nominal):
    config = _shipped("scenario_c")
    outcomes = run_methods(config, generate_measurements(config))
    idim, didim = outcomes["idim"], outcomes["didim"]
    assert idim.error is None and didim.error is None
    zz1r = nominal.zz1r
    assert abs(idim.report.chi_hat[0] - zz1r) > 0.05 * zz1r
    assert abs(didim.report.chi_hat[0] - zz1r) < 0.02 * zz1r
    # central differences over 2 s samples
    assert max(idim.report.kinematic_errors["qd"]) > 0.5


@pytest.mark.slow
def test_raw_differentiation_scenario():
    config = _shipped("scenario_d")
    outcomes = run_methods(config, generate_measurements(config))
    idim, didim = outcomes["idim"], outcomes["didim"]
    assert idim.error is None and didim.error is None
    assert idim.report.rel_error > 0.3
    assert didim.report.converged
    assert didim.report.rel_error < 0.1
