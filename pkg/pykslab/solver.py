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
import logging
import math
from typing import Dict, IO, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from pykslab.errors import DomainError, HypothesisViolatedError, InfeasibleError, SolverError
from pykslab.model import critical_mass_blowup, critical_mass_global
from pykslab.radial import (InitialData, MassProfile, RadialGrid, choose_k, comparison_violation,
                            grad_v_max, init_mass_profile, initial_density, recover_density,
                            second_moment_of)
from pykslab.utils import format_float

logger = logging.getLogger(__name__)

COMPLETED = 'completed'
NUMERICAL_BLOWUP = 'numerical-blowup'
INFEASIBLE = 'infeasible'
STEP_COLLAPSE = 'step-collapse'

SUP_NORM = 'sup-norm'
DT_COLLAPSE = 'dt-collapse'

SERIES_HEADER = ('t', 'theta', 'm', 'u_max', 'grad_v_max', 'comparison_violation', 'dt')

JUMP_LIMIT = 0.1
QUIET_STEPS = 50
DOUBLING_WINDOW = 10
BARRIER_SAFETY = 2.0
RESOLVED_WIDTH_CELLS = 32
GROWTH_SAMPLE_RATIO = 1.5


class SolverConfig(object):
    '''Parameters of a radial run.

    Args:
        chi: Strength of the |x|^{n-2} weighted coefficient.
        t_end: Integration horizon.
        dt_init: Initial and largest time step.
        dt_min: Smallest admissible time step.
        blowup_factor: Sup-norm multiplier of the blow-up detector, at least 10^3.
        safety: CFL safety factor in (0, 1).
        samples: Number of uniform sampling intervals, at least 200.
        implicit_geometric: Treat the -(n-1)/r M_r drift implicitly with M_rr.

    Raises:
        DomainError: If a parameter is out of range.
    '''

    def __init__(self,
            chi: float,
            t_end: float,
            dt_init: float = 1e-4,
            dt_min: float = 1e-12,
            blowup_factor: float = 1e3,
            safety: float = 0.9,
            samples: int = 200,
            implicit_geometric: bool = True) -> None:
        if not chi > 0.0:
            raise DomainError('chi must be positive, got {}.'.format(chi))
        if not t_end > 0.0:
            raise DomainError('t_end must be positive, got {}.'.format(t_end))
        if not 0.0 < dt_min < dt_init:
            raise DomainError('Need 0 < dt_min < dt_init, got {} and {}.'.format(dt_min, dt_init))
        if not blowup_factor >= 1e3:
            raise DomainError('blowup_factor must be >= 1e3, got {}.'.format(blowup_factor))
        if not 0.0 < safety < 1.0:
            raise DomainError('safety must lie in (0, 1), got {}.'.format(safety))
        if int(samples) != samples or samples < 200:
            raise DomainError('At least 200 samples are required, got {}.'.format(samples))
        self.chi = float(chi)
        self.t_end = float(t_end)
        self.dt_init = float(dt_init)
        self.dt_min = float(dt_min)
        self.blowup_factor = float(blowup_factor)
        self.safety = float(safety)
        self.samples = int(samples)
        self.implicit_geometric = bool(implicit_geometric)

    def to_dict(self) -> Dict[str, object]:
        return {
            'chi': self.chi,
            't_end': self.t_end,
            'dt_init': self.dt_init,
            'dt_min': self.dt_min,
            'blowup_factor': self.blowup_factor,
            'safety': self.safety,
            'samples': self.samples,
            'implicit_geometric': self.implicit_geometric,
        }

    def __repr__(self) -> str:
        return 'SolverConfig({})'.format(', '.join('{}={}'.format(k, v) for k, v in self.to_dict().items()))


class StepDiagnostics(NamedTuple):
    '''Diagnostics of one time step.

    Attributes:
        dt (float): Step taken.
        u_max (float): Largest recovered density after the step.
        cfl (float): dt max|b| / dr over the explicit drift.
        monotonicity_violation (float): max_i (M_i - M_{i+1})_+ after the step.
    '''
    dt: float
    u_max: float
    cfl: float
    monotonicity_violation: float


class SeriesRow(NamedTuple):
    '''One sampled row of a run.'''
    t: float
    theta: float
    m: float
    u_max: float
    grad_v_max: float
    comparison_violation: float
    dt: float


class MomentState(NamedTuple):
    '''Total mass and second moment at one time.'''
    mass: float
    second_moment: float
    time: float


class BlowupVerdict(NamedTuple):
    '''Verdict of the blow-up detector.

    Attributes:
        fired (bool): True if a signal fired.
        label (str): 'numerical-blowup' or 'no-blowup'.
        signal (Optional[str]): 'sup-norm' or 'dt-collapse'.
        t_detect (Optional[float]): Time of the row that fired.
    '''
    fired: bool
    label: str
    signal: Optional[str]
    t_detect: Optional[float]

    def to_dict(self) -> Dict[str, object]:
        return dict(self._asdict())


def _peak_density(profile: MassProfile) -> float:
    return float(np.max(recover_density(profile).values))


def _aggregation_drift(profile: MassProfile, chi: float) -> np.ndarray:
    r = profile.grid.nodes[1:-1]
    return chi * profile.values[1:-1] / (profile.constants.omega_n * r)


def explicit_drift(profile: MassProfile, config: SolverConfig) -> np.ndarray:
    '''Returns the drift treated explicitly at the interior nodes.'''
    drift = _aggregation_drift(profile, config.chi)
    if not config.implicit_geometric:
        drift = drift - (profile.n - 1) / profile.grid.nodes[1:-1]
    return drift


def cfl_limit(profile: MassProfile, config: SolverConfig) -> float:
    '''Returns safety * dr / max|b| over the explicit drift, or inf.'''
    top = float(np.max(np.abs(explicit_drift(profile, config))))
    if top == 0.0:
        return math.inf
    return config.safety * profile.grid.spacing / top


def _upwind(M: np.ndarray, drift: np.ndarray, dr: float) -> np.ndarray:
    forward = (M[2:] - M[1:-1]) / dr
    backward = (M[1:-1] - M[:-2]) / dr
    return np.where(drift > 0.0, drift * forward, drift * backward)


def _implicit_bands(profile: MassProfile, config: SolverConfig, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    '''Returns the (lower, upper) couplings of the implicit operator.'''
    grid = profile.grid
    dr = grid.spacing
    N = grid.N
    if not config.implicit_geometric:
        coupling = np.full(N, dt / (dr * dr))
        return coupling, coupling.copy()
    n = profile.n
    r = grid.nodes
    s = r ** n
    # r^{n-1} d/dr (r^{1-n} dM/dr), exact on r^n
    scale = n * r[1:-1] ** (n - 1) / dr
    lower = dt * scale / (s[1:-1] - s[:-2])
    upper = dt * scale / (s[2:] - s[1:-1])
    return lower, upper


def step(profile: MassProfile, config: SolverConfig, dt: Optional[float] = None) -> Tuple[MassProfile, StepDiagnostics]:
    '''Advances the cumulative mass by one time step.

    The diffusion (and, by default, the geometric drift) are implicit and
    solved as a tridiagonal system; the remaining drift is explicit with
    upwind differences chosen by the sign of b. Endpoints stay at 0 and theta.

    Args:
        profile: Current profile.
        config: Solver parameters.
        dt: Step, config.dt_init when omitted.

    Returns:
        Tuple[MassProfile, StepDiagnostics]: The next profile and its diagnostics.

    Raises:
        DomainError: If dt is outside [dt_min, dt_init].
        SolverError: If the tridiagonal solve fails.
    '''
    dt = config.dt_init if dt is None else float(dt)
    if not config.dt_min <= dt <= config.dt_init:
        raise DomainError('Step {} outside [{}, {}].'.format(dt, config.dt_min, config.dt_init))
    grid = profile.grid
    M = profile.values
    theta = profile.theta

    drift = explicit_drift(profile, config)
    rhs = M[1:-1] + dt * _upwind(M, drift, grid.spacing)
    lower, upper = _implicit_bands(profile, config, dt)
    rhs[-1] += upper[-1] * theta

    bands = np.zeros((3, grid.N))
    bands[0, 1:] = -upper[:-1]
    bands[1, :] = 1.0 + lower + upper
    bands[2, :-1] = -lower[1:]
    try:
        interior = solve_banded((1, 1), bands, rhs, check_finite=False)
    except (LinAlgError, ValueError) as e:
        raise SolverError('Tridiagonal solve failed: {}'.format(e))
    if not np.all(np.isfinite(interior)):
        raise SolverError('Tridiagonal solve produced non-finite values.')

    values = np.empty_like(M)
    values[0] = 0.0
    values[1:-1] = interior
    values[-1] = theta
    advanced = profile.advance(values, dt)
    cfl = dt * float(np.max(np.abs(drift))) / grid.spacing
    diagnostics = StepDiagnostics(dt, _peak_density(advanced), cfl, advanced.monotonicity_violation())
    return advanced, diagnostics


def _doubling_times(series: List[SeriesRow]) -> List[float]:
    times = []
    for previous, current in zip(series[:-1], series[1:]):
        if not (previous.u_max > 0.0 and current.u_max > previous.u_max):
            times.append(math.inf)
            continue
        times.append((current.t - previous.t) * math.log(2.0) / math.log(current.u_max / previous.u_max))
    return times


def detect_blowup(series: List[SeriesRow], config: SolverConfig, dt_collapsed: bool = False) -> BlowupVerdict:
    '''Decides whether a run shows numerical blow-up.

    The sup-norm signal fires when u_max >= blowup_factor * u_max(0). The
    dt-collapse signal fires when dt has collapsed to dt_min and the u_max
    doubling time decreased strictly over the last 10 samples. A blow-up on
    a fixed grid is always labeled numerical.

    Raises:
        DomainError: If the series is empty.
    '''
    if not series:
        raise DomainError('Blow-up detection needs a nonempty series.')
    start = series[0].u_max
    if start > 0.0:
        for row in series:
            if row.u_max >= config.blowup_factor * start:
                return BlowupVerdict(True, NUMERICAL_BLOWUP, SUP_NORM, row.t)
    collapsed = dt_collapsed or series[-1].dt <= config.dt_min
    if collapsed and len(series) > DOUBLING_WINDOW:
        window = _doubling_times(series[-(DOUBLING_WINDOW + 1):])
        if all(math.isfinite(a) and b < a for a, b in zip(window[:-1], window[1:])):
            return BlowupVerdict(True, NUMERICAL_BLOWUP, DT_COLLAPSE, series[-1].t)
    return BlowupVerdict(False, 'no-blowup', None, None)


class RunReport(object):
    '''Outcome, sampled series and diagnostics of one radial run.

    Attributes:
        outcome (str): 'completed', 'numerical-blowup', 'infeasible' or 'step-collapse'.
        series (List[SeriesRow]): Sampled rows with strictly increasing t.
        thresholds (Dict[str, float]): Critical masses of the run's model.
        config (SolverConfig): Solver parameters.
        grid (RadialGrid): The radial grid.
        n (int): Ambient dimension.
        initial (Optional[InitialData]): Initial data.
        k (Optional[float]): Supersolution parameter, when one dominates the data.
        barrier_status (str): Why `k` is missing, 'feasible' otherwise.
        verdict (Optional[BlowupVerdict]): Detector verdict.
        final (Optional[MassProfile]): Last profile.
        reason (Optional[str]): Diagnostic for infeasible runs.
        max_monotonicity_violation (float): Largest violation over all steps.
        steps (int): Accepted steps.
    '''

    def __init__(self, grid: RadialGrid, n: int, config: SolverConfig, initial: Optional[InitialData]) -> None:
        self.grid = grid
        self.n = n
        self.config = config
        self.initial = initial
        self.outcome = COMPLETED
        self.series = []  # type: List[SeriesRow]
        self.thresholds = {}  # type: Dict[str, float]
        self.k = None  # type: Optional[float]
        self.barrier_status = 'feasible'
        self.verdict = None  # type: Optional[BlowupVerdict]
        self.final = None  # type: Optional[MassProfile]
        self.reason = None  # type: Optional[str]
        self.max_monotonicity_violation = 0.0
        self.steps = 0

    @property
    def t_detect(self) -> Optional[float]:
        return self.verdict.t_detect if self.verdict is not None else None

    def moment_states(self) -> List[MomentState]:
        return [MomentState(row.theta, row.m, row.t) for row in self.series]

    def write_series_csv(self, stream: IO[str]) -> None:
        '''Writes the series with full round-trip float precision.'''
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(SERIES_HEADER)
        for row in self.series:
            writer.writerow([format_float(value) for value in row])

    def to_dict(self) -> Dict[str, object]:
        '''Returns a JSON-compatible summary; NaN becomes None.'''
        last = self.series[-1] if self.series else None
        doc = {
            'outcome': self.outcome,
            'reason': self.reason,
            'verdict': self.verdict.to_dict() if self.verdict is not None else None,
            't_detect': self.t_detect,
            'thresholds': dict(self.thresholds),
            'k': self.k,
            'barrier': self.barrier_status,
            'grid': {'L': self.grid.L, 'N': self.grid.N},
            'n': self.n,
            'initial': self.initial.to_document() if self.initial is not None else None,
            'config': self.config.to_dict(),
            'steps': self.steps,
            'samples': len(self.series),
            'final': dict(last._asdict()) if last is not None else None,
            'max_monotonicity_violation': self.max_monotonicity_violation,
        }
        return _finite(doc)

    def __repr__(self) -> str:
        return 'RunReport(outcome={}, samples={}, t_detect={})'.format(self.outcome, len(self.series), self.t_detect)


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def _row(profile: MassProfile, config: SolverConfig, k: Optional[float], u_max: float, dt: float) -> SeriesRow:
    violation = comparison_violation(profile, k, config.chi) if k is not None else math.nan
    return SeriesRow(profile.time, profile.theta, second_moment_of(profile), u_max,
                     grad_v_max(profile), violation, dt)


def _thresholds(n: int, chi: float) -> Dict[str, float]:
    return {
        'critical_mass_blowup': critical_mass_blowup(n, chi, p=n),
        'critical_mass_global': critical_mass_global(n, chi),
    }


def run(u0: InitialData, grid: RadialGrid, n: int, config: SolverConfig) -> RunReport:
    '''Integrates the cumulative-mass equation to t_end or detected blow-up.

    dt is halved while it exceeds the CFL limit of the explicit drift or
    when u_max grows by more than 10% in one step (the step is rejected),
    and doubled, up to dt_init, after 50 quiet steps. Steps are clipped to
    land on the uniform sample times; an extra row is recorded whenever
    u_max reaches 1.5 times the last recorded value, so a fast blow-up
    still leaves resolved rows before detection.

    Returns:
        RunReport: The report; outcome 'infeasible' if the grid cannot
        resolve the data.
    '''
    report = RunReport(grid, n, config, u0)
    report.thresholds = _thresholds(n, config.chi)
    try:
        profile = init_mass_profile(u0, grid, n)
    except InfeasibleError as e:
        report.outcome = INFEASIBLE
        report.reason = str(e)
        logger.info('run infeasible: %s', e)
        return report

    u_max = _peak_density(profile)
    try:
        u0_sup = float(np.max(initial_density(u0, grid, n)))
        report.k = choose_k(profile.theta, u0_sup, grid.L, n, config.chi, BARRIER_SAFETY, grid.nodes)
    except (HypothesisViolatedError, InfeasibleError) as e:
        report.barrier_status = str(e)

    dt = config.dt_init
    report.series.append(_row(profile, config, report.k, u_max, dt))
    sample_times = config.t_end * np.arange(1, config.samples + 1) / config.samples
    quiet = 0
    collapsed = False

    for target in sample_times:
        while profile.time < target and not collapsed:
            remaining = target - profile.time
            limit = cfl_limit(profile, config)
            while dt > limit and dt >= config.dt_min:
                dt *= 0.5
                quiet = 0
                logger.debug('t=%g halved dt to %g (CFL limit %g)', profile.time, dt, limit)
            if dt < config.dt_min:
                collapsed = True
                break
            taken = min(dt, remaining)
            if remaining - taken < 1e-12 * config.t_end:
                taken = remaining
            taken = max(min(taken, config.dt_init), config.dt_min)

            candidate, diagnostics = step(profile, config, taken)
            if diagnostics.u_max > (1.0 + JUMP_LIMIT) * u_max and taken > config.dt_min:
                dt = 0.5 * taken
                quiet = 0
                logger.debug('t=%g rejected step, u_max jump %g -> %g', profile.time, u_max, diagnostics.u_max)
                continue

            profile, u_max = candidate, diagnostics.u_max
            if taken >= remaining:
                profile.time = float(target)
            report.steps += 1
            report.max_monotonicity_violation = max(report.max_monotonicity_violation,
                                                    diagnostics.monotonicity_violation)
            quiet += 1
            if quiet >= QUIET_STEPS and dt < config.dt_init:
                dt = min(2.0 * dt, config.dt_init)
                quiet = 0
                logger.debug('t=%g doubled dt to %g', profile.time, dt)

            last = report.series[-1]
            blown = report.series[0].u_max > 0.0 and u_max >= config.blowup_factor * report.series[0].u_max
            grown = last.u_max > 0.0 and u_max >= GROWTH_SAMPLE_RATIO * last.u_max
            if (blown or grown) and last.t < profile.time < target:
                report.series.append(_row(profile, config, report.k, u_max, taken))
            if blown:
                break
        if profile.time >= target and (not report.series or report.series[-1].t < profile.time):
            report.series.append(_row(profile, config, report.k, u_max, dt))

        verdict = detect_blowup(report.series, config, dt_collapsed=collapsed)
        if verdict.fired:
            report.verdict = verdict
            report.outcome = NUMERICAL_BLOWUP
            break
        if collapsed:
            report.verdict = verdict
            report.outcome = STEP_COLLAPSE
            report.reason = 'dt fell below dt_min at t={}'.format(profile.time)
            break

    if report.verdict is None:
        report.verdict = detect_blowup(report.series, config)
    report.final = profile
    logger.info('run finished: %s at t=%g after %d steps', report.outcome, profile.time, report.steps)
    return report


class MomentCheck(NamedTuple):
    '''Sampled second-moment inequality along a run.

    Attributes:
        pairs (int): Resolved sample pairs checked.
        worst_excess (float): Largest dm/dt - bound - epsilon (<= 0 when holds).
        holds (bool): True if at least one pair was checked and every one
            satisfies the inequality.
        decreasing (bool): True if m decreased strictly across every checked pair.
        checked (bool): False when no resolved pair precedes detection.
    '''
    pairs: int
    worst_excess: float
    holds: bool
    decreasing: bool
    checked: bool


def check_moment_trajectory(report: RunReport) -> MomentCheck:
    '''Checks dm/dt <= 4 theta - chi theta^2 / (2 pi) + eps on sampled pairs.

    Only planar runs are checked. A pair is resolved when both rows precede
    detection and the peak density is below that of a Gaussian bump of
    mass theta spanning 32 cells, theta / (2 pi (32 dr)^2);
    eps = 0.05 |4 theta - chi theta^2 / (2 pi)| + 0.1.

    Raises:
        DomainError: If the run is not planar.
    '''
    if report.n != 2:
        raise DomainError('The moment trajectory check applies to n = 2.')
    chi = report.config.chi
    cutoff = report.t_detect if report.t_detect is not None else math.inf
    excesses = []
    decreasing = True
    states = report.moment_states()
    for index in range(1, len(states)):
        previous, current = states[index - 1], states[index]
        if current.time >= cutoff:
            break
        ceiling = current.mass / (2.0 * math.pi * (RESOLVED_WIDTH_CELLS * report.grid.spacing) ** 2)
        if max(report.series[index - 1].u_max, report.series[index].u_max) > ceiling:
            break
        theta = current.mass
        bound = 4.0 * theta - chi * theta * theta / (2.0 * math.pi)
        epsilon = 0.05 * abs(bound) + 0.1
        rate = (current.second_moment - previous.second_moment) / (current.time - previous.time)
        excesses.append(rate - bound - epsilon)
        decreasing = decreasing and current.second_moment < previous.second_moment
    if not excesses:
        logger.warning('moment inequality not checked: no resolved sample pair before detection')
        return MomentCheck(0, math.nan, False, False, False)
    worst = max(excesses)
    return MomentCheck(len(excesses), worst, worst <= 0.0, decreasing, True)
