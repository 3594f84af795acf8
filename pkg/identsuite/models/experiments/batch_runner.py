"""
Runs several scenarios: the shipped suite and bandwidth / noise sweeps.
"""
from typing import List, Optional, Sequence, Tuple
from concurrent.futures import ProcessPoolExecutor
from functools import partial
import math

from identsuite.models.experiments.scenario_config import ScenarioConfig
from identsuite.models.experiments.scenario_runner import run_scenario
from identsuite.models.simulation.closed_loop_sim import (
    TRANSIENT_TIME_CONSTANTS,
)
from identsuite.util.app_logger import log_info, log_warning
from identsuite.util.exceptions import ConfigInvalid
from identsuite.util.utilities import exception_resultset

# Record length of a sweep, in transients of its slowest point
SWEEP_TRANSIENT_MARGIN = 2.0


def run_batch(configs: Sequence[ScenarioConfig],
              out_dir: Optional[str] = None,
              workers: int = 1) -> List[dict]:
    """
    Runs every scenario, in a process pool when workers > 1. Each
    scenario keeps its own sequential pipeline; results come back in the
    order of configs.
    """
    job = partial(run_scenario, out_dir=out_dir)
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(job, configs))
    else:
        results = [job(config) for config in configs]
    failed = sum(1 for result in results if result['error'])
    log_info(f'Batch of {len(results)} scenarios | failed: {failed}')
    return results


def sweep_cycles(config: ScenarioConfig,
                 bandwidth_factors: Sequence[float]) -> int:
    """
    Trajectory cycles giving every sweep point a record of at least
    SWEEP_TRANSIENT_MARGIN transients, the slowest point setting the
    length. Never fewer cycles than the scenario has.
    """
    factors = [factor for factor in bandwidth_factors if factor > 0]
    if not factors:
        return config.trajectory.cycles
    slowest = min(config.actual_tuning.omega_n_min,
                  config.simulated_tuning.omega_n_min * min(factors))
    needed = SWEEP_TRANSIENT_MARGIN * TRANSIENT_TIME_CONSTANTS / slowest
    cycle = sum(config.trajectory.segment_durations)
    return max(config.trajectory.cycles, math.ceil(needed / cycle))


def rejected_point(name: str, err: ConfigInvalid) -> dict:
    """ Error resultset standing for a sweep point that can't run """
    log_warning(f'sweep point {name} rejected: {err}')
    result = exception_resultset(err)
    result['resultset'] = {"scenario": name, "bundle_dir": None}
    return result


def sweep_scenarios(config: ScenarioConfig,
                    bandwidth_factors: Sequence[float] = (1.0,),
                    noise_ratios: Optional[Sequence[float]] = None
                    ) -> Tuple[List[ScenarioConfig], List[dict]]:
    """
    One scenario per (simulated bandwidth factor, torque noise ratio)
    pair. The simulated loops get omega_n x factor, the actual robot
    keeps its tuning. Every point shares the trajectory, replayed
    sweep_cycles times.

    Returns:
        Tuple: the runnable scenarios and an error resultset for each
            rejected point.
    """
    if noise_ratios is None:
        noise_ratios = (config.noise.torque_sigma_ratio,)
    trajectory = config.trajectory.model_copy(
        update={"cycles": sweep_cycles(config, bandwidth_factors)})
    configs = []
    rejected = []
    for factor in bandwidth_factors:
        for ratio in noise_ratios:
            name = f'{config.name}-bw{factor:g}-noise{ratio:g}'
            try:
                if factor <= 0:
                    raise ConfigInvalid(
                        f'bandwidth factor must be > 0, got {factor:g}')
                tuning = config.simulated_tuning.scaled(factor)
                noise = config.noise.model_copy(
                    update={"torque_sigma_ratio": ratio,
                            "torque_sigma": None})
                configs.append(config.derived(
                    name, simulated_tuning=tuning.model_dump(),
                    noise=noise.model_dump(),
                    trajectory=trajectory.model_dump()))
            except ConfigInvalid as err:
                rejected.append(rejected_point(name, err))
    return configs, rejected
