"""
Monte Carlo calibration of the least-squares statistics: empirical
spread of the estimates over noise seeds against the reported sigma.
"""
from typing import Dict, List, Optional, Sequence, Tuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from identsuite.models.estimators.estimation_report import finite_or_none
from identsuite.models.experiments.scenario_config import ScenarioConfig
from identsuite.models.experiments.scenario_runner import (
    generate_measurements,
    run_methods,
)
from identsuite.util.app_logger import log_info, log_warning

Sample = Dict[str, Tuple[List[float], List[Optional[float]],
                         Optional[float]]]


def _seed_run(job: Tuple[ScenarioConfig, int]) -> Tuple[Sample, float]:
    config, seed = job
    seeded = config.with_seed(seed)
    data = generate_measurements(seeded)
    sample = {}
    for method, outcome in run_methods(seeded, data).items():
        if outcome.error is not None or outcome.report is None:
            continue
        report = outcome.report
        sample[method] = (report.chi_hat, report.sigma, report.sigma_rho)
    return sample, data.torque_noise_sigma


def _json_list(values: np.ndarray) -> List[Optional[float]]:
    return [finite_or_none(float(v)) for v in values]


def _nan(values) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in values],
                    dtype=float)


def monte_carlo_statistics(config: ScenarioConfig, seeds: Sequence[int],
                           workers: int = 1) -> Dict[str, dict]:
    """
    Repeats config over seeds (in a process pool when workers > 1).

    Returns:
        dict: per method, the mean estimate, the empirical standard
            deviation of every parameter, the mean reported sigma, their
            ratio, and the mean sigma_rho over the realized torque noise
            level. Failed runs are counted, not averaged.
    """
    jobs = [(config, int(seed)) for seed in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            runs = list(executor.map(_seed_run, jobs))
    else:
        runs = [_seed_run(job) for job in jobs]

    noise_level = float(np.mean([noise for _, noise in runs]))
    statistics = {}
    for method in config.methods:
        samples = [sample[method] for sample, _ in runs if method in sample]
        failures = len(runs) - len(samples)
        if failures:
            log_warning(f'Monte Carlo {config.name}: {method} failed on'
                        f' {failures} of {len(runs)} seeds')
        if len(samples) < 2:
            statistics[method] = {"runs": len(samples),
                                  "failures": failures}
            continue
        chi = np.array([s[0] for s in samples])
        sigma = np.array([_nan(s[1]) for s in samples])
        sigma_rho = _nan([s[2] for s in samples])
        empirical = np.std(chi, axis=0, ddof=1)
        mean_sigma = np.nanmean(sigma, axis=0)
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = empirical / mean_sigma
        statistics[method] = {
            "runs": len(samples),
            "failures": failures,
            "mean": _json_list(np.mean(chi, axis=0)),
            "empirical_std": _json_list(empirical),
            "mean_sigma": _json_list(mean_sigma),
            "std_ratio": _json_list(ratio),
            "sigma_rho_over_noise": finite_or_none(
                float(np.nanmean(sigma_rho)) / noise_level)
            if noise_level > 0 else None,
        }
        log_info(f'Monte Carlo {config.name} | {method}'
                 f' | runs: {len(samples)} | std ratio: {ratio.tolist()}')
    return statistics
