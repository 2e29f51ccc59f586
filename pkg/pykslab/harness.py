# This file is part of pykslab.

# pykslab is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.

# pykslab is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with pykslab. If not, see <http://www.gnu.org/licenses/>.


import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, NamedTuple, Optional, Tuple

from pykslab.errors import DomainError, InfeasibleError
from pykslab.momentflow import P_BELOW_N, classify
from pykslab.radial import init_mass_profile, second_moment_of
from pykslab.scenario import CLASSIFY, SIMULATE, SWEEP, VERIFY, ScenarioConfig, SweepSpec
from pykslab.solver import COMPLETED, INFEASIBLE, NUMERICAL_BLOWUP, RunReport, run
from pykslab.utils import format_float
from pykslab.verify import run_suites

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

NOT_SIMULATED = 'not-simulated'

SWEEP_HEADER = ('mass', 'mass_over_threshold', 'outcome', 't_detect', 'u_max_final', 'classification')


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, 'tolist'):
        return _clean(value.tolist())
    return value


def write_json(path: str, document: Dict[str, object]) -> None:
    '''Writes `document` with sorted keys, so equal inputs give equal bytes.'''
    with open(path, mode='w', newline='\n') as file:
        json.dump(_clean(document), file, indent=2, sort_keys=True, allow_nan=False)
        file.write('\n')


def write_series(path: str, report: RunReport) -> None:
    with open(path, mode='w', newline='') as file:
        report.write_series_csv(file)


def _output_dir(config: ScenarioConfig) -> str:
    os.makedirs(config.output, exist_ok=True)
    return config.output


def _initial_moment(config: ScenarioConfig, mass: float) -> Optional[float]:
    try:
        profile = init_mass_profile(config.initial_data(mass), config.grid, config.n)
    except (InfeasibleError, DomainError):
        return None
    m0 = second_moment_of(profile)
    return m0 if m0 > 0.0 else None


def _classify_cell(config: ScenarioConfig, mass: float, m0: Optional[float]):
    if not mass > 0.0:
        return None
    return classify(config.n, config.p, config.chi, mass, m0=m0, radial_setting=True, seed=config.seed)


class SweepRow(NamedTuple):
    '''One cell of a mass sweep.

    Attributes:
        index (int): Position in the mass grid.
        mass (float): Total mass.
        mass_over_threshold (Optional[float]): mass / threshold, None when no mass threshold governs.
        outcome (str): Run outcome, or 'not-simulated'.
        t_detect (Optional[float]): Detection time of numerical blow-up.
        u_max_final (Optional[float]): Last sampled u_max.
        classification (str): Certificate of the threshold classifier.
        margins (Dict[str, float]): Classifier margins.
        report (Optional[RunReport]): The run, when simulated.
    '''
    index: int
    mass: float
    mass_over_threshold: Optional[float]
    outcome: str
    t_detect: Optional[float]
    u_max_final: Optional[float]
    classification: str
    margins: Dict[str, float]
    report: Optional[RunReport]

    def csv_fields(self) -> List[str]:
        def fmt(value):
            return '' if value is None else format_float(value)
        return [format_float(self.mass), fmt(self.mass_over_threshold), self.outcome,
                fmt(self.t_detect), fmt(self.u_max_final), self.classification]

    def to_dict(self) -> Dict[str, object]:
        return {
            'mass': self.mass,
            'mass_over_threshold': self.mass_over_threshold,
            'outcome': self.outcome,
            't_detect': self.t_detect,
            'u_max_final': self.u_max_final,
            'classification': self.classification,
            'margins': dict(self.margins),
        }


def sweep_cell(config: ScenarioConfig, index: int, mass: float) -> SweepRow:
    '''Runs and classifies one mass of a sweep. Safe to run in a worker process.'''
    m0 = _initial_moment(config, mass)
    record = _classify_cell(config, mass, m0)
    certificate = record.certificate if record is not None else 'indeterminate'
    margins = dict(record.margins) if record is not None else {}
    below = record is not None and record.regime == P_BELOW_N
    ratio = None if below else mass / config.threshold

    if not config.simulates:
        return SweepRow(index, mass, ratio, NOT_SIMULATED, None, None, certificate, margins, None)
    report = run(config.initial_data(mass), config.grid, config.n, config.solver)
    u_max = report.series[-1].u_max if report.series else None
    return SweepRow(index, mass, ratio, report.outcome, report.t_detect, u_max, certificate, margins, report)


def _sweep_job(job: Tuple[ScenarioConfig, int, float]) -> SweepRow:
    return sweep_cell(*job)


class SweepResult(NamedTuple):
    '''Rows of a sweep, in mass order, and its bracketing summary.'''
    rows: List[SweepRow]
    largest_completed: Optional[float]
    smallest_blowup: Optional[float]
    all_infeasible: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            'rows': [row.to_dict() for row in self.rows],
            'largest_completed_mass': self.largest_completed,
            'smallest_blowup_mass': self.smallest_blowup,
            'all_infeasible': self.all_infeasible,
        }


def sweep_mass(spec: SweepSpec) -> SweepResult:
    '''Runs every mass cell, concurrently up to `spec.parallelism`.

    Rows are returned in mass order whatever the completion order.
    '''
    jobs = [(spec.base, index, mass) for index, mass in enumerate(spec.mass_grid)]
    if spec.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(spec.parallelism, len(jobs))) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(job) for job in jobs]
    rows.sort(key=lambda row: row.mass)

    completed = [row.mass for row in rows if row.outcome == COMPLETED]
    blown = [row.mass for row in rows if row.outcome == NUMERICAL_BLOWUP]
    all_infeasible = all(row.outcome == INFEASIBLE for row in rows)
    result = SweepResult(rows, max(completed) if completed else None, min(blown) if blown else None, all_infeasible)
    logger.info('sweep of %d cells: largest completed %s, smallest blow-up %s',
                len(rows), result.largest_completed, result.smallest_blowup)
    return result


def write_sweep_csv(path: str, result: SweepResult) -> None:
    with open(path, mode='w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(SWEEP_HEADER)
        for row in result.rows:
            writer.writerow(row.csv_fields())


def _run_simulation(config: ScenarioConfig) -> int:
    out = _output_dir(config)
    report = run(config.initial, config.grid, config.n, config.solver)
    write_series(os.path.join(out, 'series_run.csv'), report)
    write_json(os.path.join(out, 'summary_run.json'), {'config': config.to_dict(), 'report': report.to_dict()})
    if report.outcome == INFEASIBLE:
        logger.error('run infeasible: %s', report.reason)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _run_classify(config: ScenarioConfig) -> int:
    out = _output_dir(config)
    record = classify(config.n, config.p, config.chi, config.mass, m0=config.m0,
                      radial_setting=config.radial, monotone_samples=config.monotone_samples, seed=config.seed)
    write_json(os.path.join(out, 'summary_classify.json'),
               {'config': config.to_dict(), 'classification': record.to_dict()})
    return EXIT_OK


def _run_verify(config: ScenarioConfig) -> int:
    out = _output_dir(config)
    results = run_suites(config.suites, seed=config.seed, draws=config.draws)
    passed = all(result.passed for result in results)
    if not passed:
        logger.warning('verification failed: %s', ', '.join(r.name for r in results if not r.passed))
    write_json(os.path.join(out, 'verify.json'), {
        'seed': config.seed,
        'draws': config.draws,
        'passed': passed,
        'suites': [result.to_dict() for result in results],
    })
    return EXIT_OK


def _run_sweep(config: ScenarioConfig) -> int:
    out = _output_dir(config)
    result = sweep_mass(SweepSpec(config))
    write_sweep_csv(os.path.join(out, 'sweep.csv'), result)
    for row in result.rows:
        if row.report is not None:
            write_series(os.path.join(out, 'series_cell{:03d}.csv'.format(row.index)), row.report)
    write_json(os.path.join(out, 'summary_sweep.json'), {'config': config.to_dict(), 'sweep': result.to_dict()})
    if result.all_infeasible:
        logger.error('every sweep cell is infeasible')
        return EXIT_INFEASIBLE
    return EXIT_OK


def run_scenario(config: ScenarioConfig) -> int:
    '''Runs a validated scenario and writes its artifacts.

    Returns:
        int: 0 on success (detected numerical blow-up included), 3 if the
        run is infeasible.

    Raises:
        InfeasibleError: If a barrier or grid cannot be realised.
        HypothesisViolatedError: If a certificate hypothesis fails.
    '''
    logger.info('running %s scenario with seed %d', config.scenario, config.seed)
    handlers = {SIMULATE: _run_simulation, CLASSIFY: _run_classify, VERIFY: _run_verify, SWEEP: _run_sweep}
    return handlers[config.scenario](config)
