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
from typing import NamedTuple, Tuple, Union

import numpy as np

from pykslab import utils
from pykslab.chi import ChiProfile, PointLike
from pykslab.density import SampleDensity
from pykslab.errors import DegenerateDensityError, DegeneratePairError, DomainError, SingularityError

logger = logging.getLogger(__name__)

Scalar = Union[float, np.ndarray]

PAIRWISE_BLOCK = 256
PAIRWISE_LIMIT = 4000


def _pair(x: PointLike, y: PointLike) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise DomainError('Points live in different dimensions.')
    if np.any(np.all(x == y, axis=-1)):
        raise DegeneratePairError('The points x and y must be distinct.')
    return x, y


def _scalar(value: np.ndarray) -> Scalar:
    return float(value) if np.ndim(value) == 0 else value


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def identity_residual(profile: ChiProfile, x: PointLike, y: PointLike) -> Scalar:
    '''Returns LHS - RHS of the symmetrization identity

        2 [chi(x) x - chi(y) y].(x - y)
            = (chi(x) + chi(y)) |x - y|^2 + (|x|^2 - |y|^2) (chi(x) - chi(y)).

    Accepts single points or arrays of points of shape (..., n).

    Raises:
        DegeneratePairError: If x = y for some pair.
    '''
    x, y = _pair(x, y)
    cx = np.asarray(profile.evaluate(x))
    cy = np.asarray(profile.evaluate(y))
    diff = x - y
    lhs = 2.0 * _dot(cx[..., None] * x - cy[..., None] * y, diff)
    rhs = (cx + cy) * _dot(diff, diff) + (_dot(x, x) - _dot(y, y)) * (cx - cy)
    return _scalar(lhs - rhs)


def identity_lhs(profile: ChiProfile, x: PointLike, y: PointLike) -> Scalar:
    '''Returns 2 [chi(x) x - chi(y) y].(x - y), the scale of :func:`identity_residual`.'''
    x, y = _pair(x, y)
    cx = np.asarray(profile.evaluate(x))
    cy = np.asarray(profile.evaluate(y))
    return _scalar(2.0 * _dot(cx[..., None] * x - cy[..., None] * y, x - y))


def monotone_chain_value(profile: ChiProfile, x: PointLike, y: PointLike) -> Scalar:
    '''Returns [chi(x) x - chi(y) y].(x - y) / |x - y|^2.

    For radially nondecreasing profiles this is bounded below by
    (chi(x) + chi(y)) / 2, itself bounded below by chi(0).
    '''
    x, y = _pair(x, y)
    cx = np.asarray(profile.evaluate(x))
    cy = np.asarray(profile.evaluate(y))
    diff = x - y
    return _scalar(_dot(cx[..., None] * x - cy[..., None] * y, diff) / _dot(diff, diff))


def monotone_lower_bound_gap(profile: ChiProfile, x: PointLike, y: PointLike) -> Scalar:
    '''Returns [chi(x) x - chi(y) y].(x - y) / |x - y|^2 - (chi(x) + chi(y)) / 2.

    Nonnegative up to rounding for radially nondecreasing profiles; callers
    check the hypothesis with :func:`pykslab.chi.check_radial_monotone`.
    '''
    chain = np.asarray(monotone_chain_value(profile, x, y))
    cx = np.asarray(profile.evaluate(np.asarray(x, dtype=float)))
    cy = np.asarray(profile.evaluate(np.asarray(y, dtype=float)))
    return _scalar(chain - 0.5 * (cx + cy))


def neta_gap(p: float, x: PointLike, y: PointLike) -> Scalar:
    '''Returns (|x|^{p-2} x - |y|^{p-2} y).(x - y) - 2^{2-p} |x - y|^p.

    An array of exponents broadcasts against the leading axes of the points.

    Raises:
        DomainError: If p < 2.
        DegeneratePairError: If x = y for some pair.
    '''
    if np.any(np.asarray(p) < 2.0):
        raise DomainError('The inequality needs p >= 2, got {}.'.format(p))
    x, y = _pair(x, y)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    diff = x - y
    lhs = _dot((nx ** (p - 2.0))[..., None] * x - (ny ** (p - 2.0))[..., None] * y, diff)
    rhs = 2.0 ** (2.0 - p) * np.linalg.norm(diff, axis=-1) ** p
    return _scalar(lhs - rhs)


def neta_lhs(p: float, x: PointLike, y: PointLike) -> Scalar:
    '''Returns (|x|^{p-2} x - |y|^{p-2} y).(x - y), the scale of :func:`neta_gap`.'''
    x, y = _pair(x, y)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    return _scalar(_dot((nx ** (p - 2.0))[..., None] * x - (ny ** (p - 2.0))[..., None] * y, x - y))


def _atoms(density: SampleDensity) -> Tuple[np.ndarray, np.ndarray]:
    cloud = density.as_point_cloud()
    keep = cloud.weights > 0.0
    positions = cloud.positions[keep]
    if np.unique(positions, axis=0).shape[0] < 2:
        raise DegenerateDensityError('Need at least two distinct atoms.')
    return positions, cloud.weights[keep]


def _pairwise_sum(positions: np.ndarray, weights: np.ndarray, block_kernel) -> float:
    '''Returns sum over pairs with x_i != x_j of w_i w_j k(x_i, x_j).

    `block_kernel(rows, diff, d2)` returns the kernel on a block of rows,
    given the pair differences and squared distances; coincident pairs are
    masked out afterwards. Rows are processed in index order and their
    totals combined with a compensated sum, so the result does not depend
    on the block size.
    '''
    totals = []
    for start in range(0, positions.shape[0], PAIRWISE_BLOCK):
        rows = slice(start, min(start + PAIRWISE_BLOCK, positions.shape[0]))
        diff = positions[rows, None, :] - positions[None, :, :]
        d2 = np.sum(diff * diff, axis=-1)
        off = d2 > 0.0
        values = np.where(off, block_kernel(rows, diff, np.where(off, d2, 1.0)), 0.0)
        totals.extend(weights[rows] * (values @ weights))
    return utils.compensated_sum(totals)


def interaction_integral(density: SampleDensity, profile: ChiProfile) -> float:
    '''Returns the off-diagonal double integral

        sum_{i != j} w_i w_j [chi(x_i) x_i - chi(x_j) x_j].(x_i - x_j) / |x_i - x_j|^2

    of the chemotactic interaction. The integrand is symmetric in (x, y).
    Radial grids are converted with :meth:`SampleDensity.as_point_cloud`.
    For constant chi0 the value is chi0 (M^2 - sum w_i^2).

    Raises:
        DegenerateDensityError: If the density has fewer than two distinct atoms.
    '''
    positions, weights = _atoms(density)
    scaled = np.asarray(profile.evaluate(positions))[:, None] * positions

    def block_kernel(rows, diff, d2):
        return np.sum((scaled[rows, None, :] - scaled[None, :, :]) * diff, axis=-1) / d2

    return _pairwise_sum(positions, weights, block_kernel)


def second_moment_rate_bound(density: SampleDensity, profile: ChiProfile) -> float:
    '''Returns 4 M - I / (2 pi), the planar rate of the second moment for a
    density in a star-shaped domain, where I is :func:`interaction_integral`.

    Raises:
        DomainError: If the density is not planar.
    '''
    if density.n != 2:
        raise DomainError('The planar moment rate needs n = 2, got {}.'.format(density.n))
    return 4.0 * density.total_mass - interaction_integral(density, profile) / (2.0 * math.pi)


class RieszEstimate(NamedTuple):
    '''Estimate of J = int int u(x) u(y) |x - y|^{p-n} dy dx.

    Attributes:
        value (float): The estimate.
        stderr (float): Monte-Carlo standard error, 0 for deterministic methods.
        samples (int): Number of pair samples used, 0 for deterministic methods.
        method (str): 'exact', 'pairs' or 'monte-carlo'.
    '''
    value: float
    stderr: float
    samples: int
    method: str


def riesz_double_integral(density: SampleDensity,
        p: float,
        method: str = 'auto',
        samples: int = 10 ** 6,
        seed: int = 0) -> RieszEstimate:
    '''Returns J = int int u(x) u(y) |x - y|^{p-n} dy dx.

    For p = n the kernel is identically one and J = M^2 exactly. Otherwise J
    is either the off-diagonal pairwise sum over a point cloud, rescaled so
    that the pair weights w_i w_j total M^2 ('pairs'), or
    the Monte-Carlo average of |x - y|^{p-n} over independent pairs drawn
    from the normalized density, times M^2 ('monte-carlo'). Coincident
    draws are discarded. 'auto' picks pairs for point clouds with at most
    4000 atoms.

    Args:
        density: The density, in R^n.
        p (float): Exponent with 2 <= p <= n.
        method (str): 'auto', 'pairs' or 'monte-carlo'.
        samples (int): Pair samples of the Monte-Carlo method.
        seed (int): Seed of the Monte-Carlo method.

    Raises:
        DomainError: If p lies outside [2, n] or `method` is unknown.
    '''
    n = density.n
    if p > n:
        raise DomainError('The Riesz integral needs p <= n, got p={} n={}.'.format(p, n))
    if p < 2.0:
        raise DomainError('The Riesz integral needs p >= 2, got {}.'.format(p))
    mass = density.total_mass
    if p == n:
        return RieszEstimate(mass * mass, 0.0, 0, 'exact')

    if method == 'auto':
        small = density.is_point_cloud and density.weights.size <= PAIRWISE_LIMIT
        method = 'pairs' if small else 'monte-carlo'

    exponent = 0.5 * (p - n)
    if method == 'pairs':
        positions, weights = _atoms(density)
        value = _pairwise_sum(positions, weights, lambda rows, diff, d2: d2 ** exponent)
        value *= mass * mass / (mass * mass - utils.compensated_sum(weights * weights))
        return RieszEstimate(value, 0.0, 0, 'pairs')

    if method != 'monte-carlo':
        raise DomainError('Unknown method: {}.'.format(method))

    rng = np.random.default_rng(seed)
    x = density.sample(samples, rng)
    y = density.sample(samples, rng)
    d2 = np.sum((x - y) ** 2, axis=1)
    d2 = d2[d2 > 0.0]
    if d2.size < 2:
        raise DegenerateDensityError('All sampled pairs coincide.')
    values = d2 ** exponent
    scale = mass * mass
    estimate = RieszEstimate(
        value=float(scale * np.mean(values)),
        stderr=float(scale * np.std(values, ddof=1) / math.sqrt(values.size)),
        samples=int(values.size),
        method='monte-carlo')
    logger.debug('riesz integral p=%g n=%d: %r', p, n, estimate)
    return estimate


class MomentSummary(NamedTuple):
    '''Mass, second moment and centroid of a density.

    Attributes:
        mass (float): M = int u dx.
        second_moment (float): m = int u |x|^2 dx.
        centroid (np.ndarray): int x u dx / M.
    '''
    mass: float
    second_moment: float
    centroid: np.ndarray


def moment_summary(density: SampleDensity) -> MomentSummary:
    '''Returns the exact mass, second moment and centroid of the representation.

    For radial grids the density is constant in each shell, so a shell
    (a, b] holding mass q contributes q n (b^{n+2} - a^{n+2}) / ((n+2)(b^n - a^n)).
    '''
    mass = density.total_mass
    if density.is_point_cloud:
        sq = np.sum(density.positions ** 2, axis=1)
        second = utils.compensated_sum(density.weights * sq)
        centroid = density.weights @ density.positions / mass
        return MomentSummary(mass, second, centroid)

    n = density.n
    a, b = density.edges[:-1], density.edges[1:]
    shell = n / (n + 2.0) * (b ** (n + 2) - a ** (n + 2)) / (b ** n - a ** n)
    second = utils.compensated_sum(density.cell_masses * shell)
    return MomentSummary(mass, second, np.zeros(n))


class SlackEstimate(NamedTuple):
    '''Slack J (2m)^{(n-p)/2} - M^{2+(n-p)/2} of the moment inequality.

    Attributes:
        value (float): The slack.
        stderr (float): Standard error inherited from the estimate of J.
        riesz (RieszEstimate): The estimate of J.
        moments (MomentSummary): Mass and second moment used.
    '''
    value: float
    stderr: float
    riesz: RieszEstimate
    moments: MomentSummary


def lemma32_slack(density: SampleDensity,
        p: float,
        method: str = 'auto',
        samples: int = 10 ** 6,
        seed: int = 0) -> SlackEstimate:
    '''Returns the slack of M^{2+(n-p)/2} <= J (2m)^{(n-p)/2}.

    Nonnegative for every density, up to the quadrature error of J.

    Raises:
        SingularityError: If all mass sits at the origin (m = 0).
        DomainError: If p lies outside [2, n].
    '''
    moments = moment_summary(density)
    if not moments.second_moment > 0.0:
        raise SingularityError('Second moment vanishes: all mass sits at the origin.')
    riesz = riesz_double_integral(density, p, method=method, samples=samples, seed=seed)
    e = 0.5 * (density.n - p)
    factor = (2.0 * moments.second_moment) ** e
    value = riesz.value * factor - moments.mass ** (2.0 + e)
    return SlackEstimate(value, riesz.stderr * factor, riesz, moments)
