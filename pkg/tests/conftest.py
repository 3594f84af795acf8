"""
Shared fixtures: a short exciting trajectory and fast loop tunings keep
the closed-loop simulations of the test suite cheap.
"""
import copy

import pytest

from identsuite.models.control.control_law import (
    DriveChain,
    LoopTuning,
    tune_gains,
)
from identsuite.models.experiments.scenario_config import scenario_from_dict
from identsuite.models.scara.scara_dynamics import (
    BaseParameters,
    SmoothSignConfig,
    effective_inertia,
)
from identsuite.models.simulation.closed_loop_sim import (
    NoiseConfig,
    SimConfig,
    integrate_closed_loop,
    synthesize_measurements,
)
from identsuite.models.simulation.reference_trajectory import (
    quintic_reference,
)

SHORT_WAYPOINTS = [
    (0.0, 0.0), (1.5, 2.0), (-1.0, -1.5), (2.0, 0.5), (-2.0, 2.5),
    (0.0, 0.0),
]


@pytest.fixture
def nominal():
    return BaseParameters.nominal()


@pytest.fixture
def ssign():
    return SmoothSignConfig()


@pytest.fixture
def chain():
    return DriveChain()


@pytest.fixture
def fast_tuning():
    """ 1 s transient (5 / omega_n_min) """
    return LoopTuning(omega_n=(5.0, 10.0), zeta=(1.0, 1.0))


@pytest.fixture
def short_traj():
    """ 10 s, both joints crossing zero velocity several times """
    return quintic_reference(SHORT_WAYPOINTS, [2.0] * 5)


@pytest.fixture
def sim_cfg():
    return SimConfig(fm=100.0)


@pytest.fixture
def actual_record(nominal, fast_tuning, chain, short_traj, sim_cfg, ssign):
    """ Noise-free actual robot, controller tuned with nominal values """
    gains = tune_gains(fast_tuning, effective_inertia(nominal),
                       chain.g_apriori)
    return integrate_closed_loop(nominal, gains, chain, "actual",
                                 short_traj, sim_cfg, ssign)


@pytest.fixture
def clean_measurements(actual_record, chain):
    noise = NoiseConfig(torque_sigma_ratio=0.0, position_sigma=(0.0, 0.0))
    return synthesize_measurements(actual_record, noise, chain)


# Short scenario: fast loops, 10 s trajectory sampled at 100 Hz
QUICK_SCENARIO = {
    "name": "quick",
    "seed": 7,
    "actual_tuning": {"omega_n": [5.0, 10.0], "zeta": [1.0, 1.0]},
    "simulated_tuning": {"omega_n": [5.0, 10.0], "zeta": [1.0, 1.0]},
    "trajectory": {
        "waypoints": [list(point) for point in SHORT_WAYPOINTS],
        "segment_durations": [2.0] * 5,
    },
    "sim": {"fm": 100.0},
    "noise": {"torque_sigma_ratio": 0.01},
    "methods": ["idim", "didim"],
    "idim": {"filter": {"cutoff_hz": 20.0}, "decimation": {"nd": 5}},
    "didim": {"init_mode": "idim", "max_iterations": 6},
}


@pytest.fixture
def quick_scenario():
    return copy.deepcopy(QUICK_SCENARIO)


@pytest.fixture
def quick_config(quick_scenario):
    return scenario_from_dict(quick_scenario)
