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


import logging
import math
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from pykslab import kernelmath, utils
from pykslab.chi import ChiProfile, check_radial_monotone
from pykslab.density import SampleDensity
from pykslab.radial import RadialGrid, grad_v_magnitude, residual_order, supersolution_profile

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-12
BOUND_TOLERANCE = 1e-12
SAMPLE_RADIUS = 2.0
UNIFORM_BALL_J = 6.0 / 5.0
UNIFORM_BALL_SLACK = 1.2 * math.sqrt(1.2) - 1.0
RIESZ_SAMPLES = 10 ** 6
MIXTURES = 100
MIXTURE_POINTS = 800
MIN_RESIDUAL_ORDER = 1.8


class SuiteResult(NamedTuple):
    '''Outcome of one verification suite.

    Attributes:
        name (str): Suite name.
        passed (bool): True if every check passed.
        count (int): Number of checks.
        worst (float): Worst normalized margin; negative means failure.
        worst_case (Dict[str, object]): Inputs attaining `worst`.
        details (Dict[str, object]): Suite-specific figures.
    '''
    name: str
    passed: bool
    count: int
    worst: float
    worst_case: Dict[str, object]
    details: Dict[str, object]

    def to_dict(self) -> Dict[str, object]:
        return {
            'name': self.name,
            'passed': self.passed,
            'count': self.count,
            'worst': self.worst,
            'worst_case': self.worst_case,
            'details': self.details,
        }


def catalog() -> Dict[str, ChiProfile]:
    '''Returns one profile of every catalog kind.'''
    return {
        'constant': ChiProfile.constant(1.5),
        'saturating': ChiProfile.saturating(),
        'arctan': ChiProfile.arctan(),
        'power': ChiProfile.power(1.0, 3.0),
        'anisotropic': ChiProfile.anisotropic(),
        'tabulated-radial': ChiProfile.tabulated([0.0, 0.5, 1.0, 2.0, 2.5], [1.0, 1.2, 1.5, 1.7, 2.0]),
    }


def _draw_pairs(rng: np.random.Generator, draws: int, n: int):
    x = utils.uniform_ball_points(rng, draws, n, SAMPLE_RADIUS)
    y = utils.uniform_ball_points(rng, draws, n, SAMPLE_RADIUS)
    return x, y


def _case(x: np.ndarray, y: np.ndarray, i: int, **extra) -> Dict[str, object]:
    case = {'x': x[i].tolist(), 'y': y[i].tolist()}
    case.update(extra)
    return case


def identity_suite(seed: int, draws: int) -> SuiteResult:
    '''Checks the symmetrization identity to 1e-12 relative.'''
    rng = np.random.default_rng([seed, 0])
    worst, worst_case, count = math.inf, {}, 0
    for name, profile in catalog().items():
        for n in range(2, 6):
            x, y = _draw_pairs(rng, draws, n)
            residual = np.abs(kernelmath.identity_residual(profile, x, y))
            scale = np.maximum(np.abs(kernelmath.identity_lhs(profile, x, y)), 1.0)
            margin = IDENTITY_TOLERANCE - residual / scale
            i = int(np.argmin(margin))
            count += draws
            if margin[i] < worst:
                worst = float(margin[i])
                worst_case = _case(x, y, i, profile=name, n=n, relative_residual=float(residual[i] / scale[i]))
    return SuiteResult('identity', worst >= 0.0, count, worst, worst_case, {'tolerance': IDENTITY_TOLERANCE})


def monotone_bound_suite(seed: int, draws: int) -> SuiteResult:
    '''Checks the lower bound (chi(x) + chi(y)) / 2 >= chi(0) of the monotone chain.

    Margins are relative to the rounding scale of the chain quotient,
    (|chi(x)| |x| + |chi(y)| |y|) / |x - y|, or 1 if larger.
    '''
    rng = np.random.default_rng([seed, 1])
    worst, worst_case, count = math.inf, {}, 0
    flags = {}
    for index, (name, profile) in enumerate(catalog().items()):
        report = check_radial_monotone(profile, 4096, seed + index, n=2)
        flags[name] = report.holds
        if name == 'anisotropic':
            continue
        x, y = _draw_pairs(rng, draws, 2)
        gap = np.asarray(kernelmath.monotone_lower_bound_gap(profile, x, y))
        chain = np.asarray(kernelmath.monotone_chain_value(profile, x, y))
        cx = np.abs(np.asarray(profile.evaluate(x)))
        cy = np.abs(np.asarray(profile.evaluate(y)))
        quotient = (cx * np.linalg.norm(x, axis=1) + cy * np.linalg.norm(y, axis=1)) / np.linalg.norm(x - y, axis=1)
        scale = np.maximum(np.maximum(np.abs(chain), 1.0), quotient)
        margin = np.minimum(gap, chain - profile.chi_at_origin) / scale + BOUND_TOLERANCE
        i = int(np.argmin(margin))
        count += draws
        if margin[i] < worst:
            worst = float(margin[i])
            worst_case = _case(x, y, i, profile=name, gap=float(gap[i]), chain=float(chain[i]))
    flagged = not flags['anisotropic'] and all(v for k, v in flags.items() if k != 'anisotropic')
    details = {'monotone': flags, 'anisotropic_flagged': not flags['anisotropic']}
    return SuiteResult('monotone-bound', worst >= 0.0 and flagged, count, worst, worst_case, details)


def neta_suite(seed: int, draws: int) -> SuiteResult:
    '''Checks the Neta inequality for p in [2, 6] and its equality cases.'''
    rng = np.random.default_rng([seed, 2])
    worst, worst_case, count = math.inf, {}, 0

    def record(margin, x, y, **extra):
        nonlocal worst, worst_case, count
        i = int(np.argmin(margin))
        count += margin.size
        if margin[i] < worst:
            worst = float(margin[i])
            worst_case = _case(x, y, i, **{k: (float(v[i]) if np.ndim(v) else v) for k, v in extra.items()})

    for n in range(2, 6):
        x, y = _draw_pairs(rng, draws, n)
        p = rng.uniform(2.0, 6.0, size=draws)
        gap = np.asarray(kernelmath.neta_gap(p, x, y))
        scale = np.maximum(np.abs(np.asarray(kernelmath.neta_lhs(p, x, y))), 1.0)
        record(gap / scale + BOUND_TOLERANCE, x, y, p=p, n=n)

        equal = np.abs(np.asarray(kernelmath.neta_gap(2.0, x, y)))
        scale = np.maximum(np.abs(np.asarray(kernelmath.neta_lhs(2.0, x, y))), 1.0)
        record(BOUND_TOLERANCE - equal / scale, x, y, p=2.0, n=n, equality=True)

        equal = np.abs(np.asarray(kernelmath.neta_gap(4.0, x, -x)))
        scale = np.maximum(np.abs(np.asarray(kernelmath.neta_lhs(4.0, x, -x))), 1.0)
        record(BOUND_TOLERANCE - equal / scale, x, -x, p=4.0, n=n, equality=True)
    return SuiteResult('neta', worst >= 0.0, count, worst, worst_case, {'tolerance': BOUND_TOLERANCE})


def lemma32_suite(seed: int, draws: int) -> SuiteResult:
    '''Checks the moment inequality on the uniform ball and on random mixtures.

    The uniform unit ball in R^3 at p = 2 must reproduce J = 6/5 within 1%
    and the slack 1.2^{3/2} - 1 within 2% (Monte-Carlo); the slack of 100
    random Gaussian mixtures in R^3 or R^4, with 2 <= p < n, must stay
    above -3 standard errors.
    '''
    rng = np.random.default_rng([seed, 3])
    ball = SampleDensity.uniform_ball(3, 1.0, 1.0)
    slack = kernelmath.lemma32_slack(ball, 2.0, method='monte-carlo', samples=RIESZ_SAMPLES, seed=seed)
    j_error = abs(slack.riesz.value - UNIFORM_BALL_J) / UNIFORM_BALL_J
    slack_error = abs(slack.value - UNIFORM_BALL_SLACK) / UNIFORM_BALL_SLACK
    ball_ok = j_error <= 0.01 and slack_error <= 0.02

    worst, worst_case = math.inf, {}
    for index in range(MIXTURES):
        n = int(rng.integers(3, 5))
        p = float(rng.uniform(2.0, n))
        components = int(rng.integers(1, 4))
        density = SampleDensity.gaussian_mixture(
            rng, n, MIXTURE_POINTS,
            means=rng.uniform(-1.0, 1.0, size=(components, n)),
            scales=rng.uniform(0.1, 0.6, size=components),
            proportions=rng.uniform(0.2, 1.0, size=components),
            mass=float(rng.uniform(0.5, 5.0)))
        estimate = kernelmath.lemma32_slack(density, p, seed=seed + index)
        scale = estimate.moments.mass ** (2.0 + 0.5 * (n - p))
        margin = (estimate.value + 3.0 * estimate.stderr) / scale + BOUND_TOLERANCE
        if margin < worst:
            worst = float(margin)
            worst_case = {'mixture': index, 'n': n, 'p': p, 'slack': estimate.value, 'stderr': estimate.stderr}
    details = {
        'uniform_ball_J': slack.riesz.value,
        'uniform_ball_J_stderr': slack.riesz.stderr,
        'uniform_ball_slack': slack.value,
        'J_relative_error': j_error,
        'slack_relative_error': slack_error,
    }
    return SuiteResult('lemma32', ball_ok and worst >= 0.0, MIXTURES + 1, worst, worst_case, details)


def steady_residual_suite(seed: int, draws: int) -> SuiteResult:
    '''Checks the residual order of the supersolution and the grad v identity.'''
    study = residual_order(n=2, k=1.0, chi=1.0, L=1.0, sizes=(256, 512, 1024))
    worst = min(study.orders) - MIN_RESIDUAL_ORDER
    worst_case = {'sizes': study.sizes, 'orders': study.orders}

    identity_worst = math.inf
    for n, k, chi in ((2, 1.0, 1.0), (3, 2.5, 0.5)):
        profile = supersolution_profile(RadialGrid(1.0, 256), k, n, chi)
        for i in range(1, profile.grid.size):
            r = profile.grid.nodes[i]
            expected = 2.0 * n / chi * k * r / (1.0 + k * r ** n)
            error = abs(grad_v_magnitude(profile, i) - expected) / max(abs(expected), 1.0)
            identity_worst = min(identity_worst, BOUND_TOLERANCE - error)
    details = {'residuals': study.residuals, 'orders': study.orders, 'grad_v_margin': identity_worst}
    passed = worst >= 0.0 and identity_worst >= 0.0
    return SuiteResult('steady-residual', passed, len(study.sizes) + 2, worst, worst_case, details)


SUITES = {
    'identity': identity_suite,
    'monotone-bound': monotone_bound_suite,
    'neta': neta_suite,
    'lemma32': lemma32_suite,
    'steady-residual': steady_residual_suite,
}  # type: Dict[str, Callable[[int, int], SuiteResult]]


def run_suites(names: Optional[Sequence[str]] = None, seed: int = 0, draws: int = 10 ** 5) -> List[SuiteResult]:
    '''Runs the named suites (all by default) in a fixed order.'''
    names = list(SUITES) if names is None else list(names)
    results = []
    for name in SUITES:
        if name not in names:
            continue
        result = SUITES[name](seed, draws)
        logger.info('suite %s: %s (%d checks, worst %.3g)', name, 'pass' if result.passed else 'FAIL',
                    result.count, result.worst)
        results.append(result)
    return results
