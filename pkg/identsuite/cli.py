"""
Command-line front end: run scenarios, compare reports, run the shipped
suite, sweeps and Monte Carlo calibrations, verify bundles.
"""
from typing import List, Optional, Sequence
import argparse
import json
import os
import sys

from identsuite import __version__
from identsuite.config.config import Config
from identsuite.constants.const_tables import get_constant
from identsuite.models.estimators.estimation_report import EstimationReport
from identsuite.models.experiments.batch_runner import (
    run_batch,
    sweep_scenarios,
)
from identsuite.models.experiments.comparison import (
    compare_reports,
    comparison_csv,
    comparison_json,
)
from identsuite.models.experiments.monte_carlo import monte_carlo_statistics
from identsuite.models.experiments.scenario_config import (
    ScenarioConfig,
    load_scenario,
    shipped_scenarios,
)
from identsuite.util.app_logger import log_error
from identsuite.util.exceptions import ConfigInvalid, IdentSuiteError
from identsuite.util.file_utilities import (
    MANIFEST_FILE,
    output_dir,
    verify_manifest,
    write_json,
)
from identsuite.util.utilities import (
    error_resultset,
    exception_resultset,
    get_default_resultset,
)

EXIT_OK = 0
EXIT_ERROR = 1


def _build_parser() -> argparse.ArgumentParser:
    settings = Config()
    parser = argparse.ArgumentParser(
        prog="identsuite",
        description="Closed-loop robot dynamic identification laboratory"
                    " (IDIM, DIDIM, output error) on a synthetic SCARA.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=settings.OUT_DIR,
                        help="bundle root directory (IDENT_OUT_DIR)")
    common.add_argument("--seed", type=int, default=None,
                        help="overrides the scenario seed")
    common.add_argument("--workers", type=int, default=settings.WORKERS,
                        help="parallel scenarios (IDENT_WORKERS)")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="console output format")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", parents=[common],
                           help="run one scenario file")
    run.add_argument("config", help="scenario YAML file")

    compare = verbs.add_parser("compare", parents=[common],
                               help="compare report JSON files")
    compare.add_argument("reports", nargs="+", help="report_*.json files")

    verbs.add_parser("suite", parents=[common],
                     help="run all shipped scenarios")

    sweep = verbs.add_parser("sweep", parents=[common],
                             help="bandwidth / noise grid of a scenario")
    sweep.add_argument("config", help="scenario YAML file")
    sweep.add_argument("--bandwidth", type=float, nargs="+",
                       default=[1.0, 0.5, 1.0 / 3.0, 0.25],
                       help="simulated omega_n factors")
    sweep.add_argument("--noise", type=float, nargs="+", default=None,
                       help="torque noise ratios")

    monte = verbs.add_parser("montecarlo", parents=[common],
                             help="statistics calibration over seeds")
    monte.add_argument("config", help="scenario YAML file")
    monte.add_argument("--runs", type=int, default=200,
                       help="number of seeds")

    verify = verbs.add_parser("verify", help="check a bundle manifest")
    verify.add_argument("bundle_dir", help="scenario bundle directory")
    return parser


def _error_record(resultset: dict) -> None:
    """ Machine-readable error record on stderr """
    print(json.dumps({key: resultset[key] for key in
                      ("error", "error_message", "error_code")},
                     sort_keys=True), file=sys.stderr)


def _seeded(config: ScenarioConfig, seed: Optional[int]) -> ScenarioConfig:
    return config if seed is None else config.with_seed(seed)


def _emit(resultset: dict, fmt: str, table: Optional[str] = None) -> None:
    if fmt == "json" or table is None:
        print(json.dumps(resultset, sort_keys=True, indent=2))
    else:
        print(table, end='' if table.endswith('\n') else '\n')


def _report_table(result: dict, fmt: str) -> Optional[str]:
    reports = [EstimationReport.model_validate(r)
               for r in result['resultset'].get('reports', {}).values()]
    if not reports:
        return None
    rows = compare_reports(reports)
    return comparison_csv(rows) if fmt == "csv" else comparison_json(rows)


def _batch_exit(results: List[dict]) -> int:
    summary = get_default_resultset()
    summary['resultset'] = {
        r['resultset'].get('scenario', str(idx)): {
            "bundle_dir": r['resultset'].get('bundle_dir'),
            "error": r['error'],
            "error_message": r['error_message'],
        } for idx, r in enumerate(results)}
    failed = [r for r in results if r['error']]
    if failed:
        summary['error'] = True
        summary['error_message'] = f'{len(failed)} scenario(s) failed'
    _emit(summary, "json")
    return EXIT_ERROR if failed else EXIT_OK


def _run(args) -> int:
    config = _seeded(load_scenario(args.config), args.seed)
    result = run_batch([config], args.out_dir, 1)[0]
    if result["error"]:
        _error_record(result)
        return EXIT_ERROR
    _emit(result, args.format, _report_table(result, args.format))
    return EXIT_OK


def _compare(args) -> int:
    reports = []
    for path in args.reports:
        if not os.path.isfile(path):
            raise ConfigInvalid(f'report file not found: {path}')
        with open(path, encoding='utf-8') as json_file:
            reports.append(EstimationReport.model_validate_json(
                json_file.read()))
    rows = compare_reports(reports)
    text = comparison_json(rows) if args.format == "json" \
        else comparison_csv(rows)
    print(text, end='' if text.endswith('\n') else '\n')
    return EXIT_OK


def _suite(args) -> int:
    configs = [_seeded(load_scenario(path), args.seed)
               for path in shipped_scenarios()]
    return _batch_exit(run_batch(configs, args.out_dir, args.workers))


def _sweep(args) -> int:
    config = _seeded(load_scenario(args.config), args.seed)
    configs, rejected = sweep_scenarios(config, args.bandwidth, args.noise)
    return _batch_exit(run_batch(configs, args.out_dir, args.workers) +
                       rejected)


def _montecarlo(args) -> int:
    config = load_scenario(args.config)
    first = args.seed if args.seed is not None else (config.seed or 0)
    statistics = monte_carlo_statistics(
        config, range(first, first + args.runs), args.workers)
    path = write_json(os.path.join(output_dir(config.name, args.out_dir),
                                   'monte_carlo.json'), statistics)
    result = get_default_resultset()
    result['resultset'] = {"path": path, "statistics": statistics}
    _emit(result, "json")
    return EXIT_OK


def _verify(args) -> int:
    if not os.path.isfile(os.path.join(args.bundle_dir, MANIFEST_FILE)):
        raise ConfigInvalid(f'{args.bundle_dir}: no {MANIFEST_FILE}')
    problems = verify_manifest(args.bundle_dir)
    if problems:
        result = error_resultset(
            f'{get_constant("ERROR_MESSAGES", "MANIFEST_MISMATCH")}:'
            f' {"; ".join(problems)}', 'IS-E020')
        _error_record(result)
        return EXIT_ERROR
    result = get_default_resultset()
    result['resultset'] = {"bundle_dir": args.bundle_dir, "verified": True}
    _emit(result, "json")
    return EXIT_OK


VERBS = {
    "run": _run,
    "compare": _compare,
    "suite": _suite,
    "sweep": _sweep,
    "montecarlo": _montecarlo,
    "verify": _verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point. Usage errors exit with 2 (argparse); configuration and
    estimator errors return 1 after printing a JSON error record to
    stderr.
    """
    args = _build_parser().parse_args(argv)
    try:
        return VERBS[args.verb](args)
    except IdentSuiteError as err:
        record = exception_resultset(err)
    except (OSError, ValueError) as err:
        log_error(f'identsuite {args.verb}: {err}')
        record = error_resultset(str(err), 'IS-E010')
    _error_record(record)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
