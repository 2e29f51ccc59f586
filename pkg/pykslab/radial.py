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
from typing import Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from pykslab.errors import ConfigError, DomainError, InfeasibleError, HypothesisViolatedError, SingularityError
from pykslab.model import DimensionConstants

logger = logging.getLogger(__name__)

MIN_INTERIOR_NODES = 16
MIN_NODES_PER_WIDTH = 8

ArrayLike = Union[Sequence[float], np.ndarray]


class RadialGrid(object):
    '''Uniform grid on [0, L] with N interior nodes.

    Args:
        L: Domain radius.
        N: Interior node count, at least 16.

    Attributes:
        L (float): Domain radius.
        N (int): Interior node count.
        spacing (float): Grid spacing L / (N + 1).
        nodes (np.ndarray): Nodes r_i = i * spacing for i = 0..N+1.
    '''

    def __init__(self, L: float, N: int) -> None:
        if not L > 0.0:
            raise DomainError('Domain radius must be positive, got {}.'.format(L))
        if int(N) != N or N < MIN_INTERIOR_NODES:
            raise DomainError('Grid needs at least {} interior nodes, got {}.'.format(MIN_INTERIOR_NODES, N))
        self.L = float(L)
        self.N = int(N)
        self.spacing = self.L / (self.N + 1)
        self.nodes = np.arange(self.N + 2) * self.spacing
        self.nodes[-1] = self.L

    @property
    def size(self) -> int:
        return self.N + 2

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RadialGrid) and self.L == other.L and self.N == other.N

    def __repr__(self) -> str:
        return 'RadialGrid(L={}, N={})'.format(self.L, self.N)


class MassProfile(object):
    '''Cumulative mass M(r_i, t) on a radial grid at one time level.

    Args:
        grid: The radial grid.
        n: Ambient dimension.
        values: Nodal values of M.
        time: Time level.

    Attributes:
        grid (RadialGrid): The radial grid.
        n (int): Ambient dimension.
        values (np.ndarray): M(r_i, t), with M(r_0) = 0 and M(r_{N+1}) = theta.
        time (float): Time level.
    '''

    def __init__(self, grid: RadialGrid, n: int, values: ArrayLike, time: float = 0.0) -> None:
        values = np.array(values, dtype=float)
        if values.shape != (grid.size,):
            raise DomainError('Expected {} nodal values, got shape {}.'.format(grid.size, values.shape))
        if n < 2:
            raise DomainError('Dimension must be >= 2, got {}.'.format(n))
        self.grid = grid
        self.n = int(n)
        self.values = values
        self.time = float(time)

    @property
    def theta(self) -> float:
        '''Returns the total mass M(L, t).'''
        return float(self.values[-1])

    @property
    def constants(self) -> DimensionConstants:
        return DimensionConstants(self.n)

    def monotonicity_violation(self) -> float:
        '''Returns max_i (M_i - M_{i+1})_+.'''
        drops = self.values[:-1] - self.values[1:]
        return float(max(np.max(drops), 0.0))

    def advance(self, values: np.ndarray, dt: float) -> 'MassProfile':
        '''Returns the profile at time + dt with the given values.'''
        return MassProfile(self.grid, self.n, values, self.time + dt)

    def __repr__(self) -> str:
        return 'MassProfile(grid={}, n={}, theta={}, time={})'.format(self.grid, self.n, self.theta, self.time)


class InitialData(object):
    '''Radial initial density u0 with a prescribed total mass.

    Kinds are 'uniform', 'gaussian' (exp(-r^2 / (2 w^2))), 'annulus'
    (indicator of r_in <= r <= r_out) and 'table' (piecewise linear in r,
    zero beyond the last radius).

    Attributes:
        kind (str): Catalog entry.
        mass (float): Requested total mass theta.
        params (Dict[str, object]): Shape parameters.
    '''

    KINDS = ('uniform', 'gaussian', 'annulus', 'table')

    def __init__(self, kind: str, mass: float, **params: object) -> None:
        if kind not in self.KINDS:
            raise DomainError('Unknown initial data kind: {}.'.format(kind))
        if not mass >= 0.0:
            raise DomainError('Mass must be nonnegative, got {}.'.format(mass))
        self.kind = kind
        self.mass = float(mass)
        self.params = params
        self._validate()

    def _validate(self) -> None:
        if self.kind == 'gaussian' and not self.params['width'] > 0.0:
            raise DomainError('Gaussian width must be positive.')
        if self.kind == 'annulus' and not 0.0 <= self.params['r_in'] < self.params['r_out']:
            raise DomainError('Annulus needs 0 <= r_in < r_out.')
        if self.kind == 'table':
            radii, values = self.params['radii'], self.params['values']
            if radii.ndim != 1 or radii.shape != values.shape or radii.size < 2:
                raise DomainError('Table needs matching radii and values with at least two rows.')
            if np.any(np.diff(radii) <= 0.0) or radii[0] < 0.0:
                raise DomainError('Table radii must be nonnegative and strictly increasing.')
            if np.any(values < 0.0):
                raise DomainError('Initial density table has negative values.')

    @classmethod
    def uniform(cls, mass: float) -> 'InitialData':
        return cls('uniform', mass)

    @classmethod
    def gaussian(cls, mass: float, width: float) -> 'InitialData':
        return cls('gaussian', mass, width=float(width))

    @classmethod
    def annulus(cls, mass: float, r_in: float, r_out: float) -> 'InitialData':
        return cls('annulus', mass, r_in=float(r_in), r_out=float(r_out))

    @classmethod
    def table(cls, radii: ArrayLike, values: ArrayLike, mass: float) -> 'InitialData':
        return cls('table', mass,
                   radii=np.asarray(radii, dtype=float),
                   values=np.asarray(values, dtype=float))

    def with_mass(self, mass: float) -> 'InitialData':
        '''Returns the same shape with another total mass.'''
        return InitialData(self.kind, mass, **self.params)

    def shape(self, r: np.ndarray) -> np.ndarray:
        '''Returns the unnormalized density at radii `r`.'''
        r = np.asarray(r, dtype=float)
        if self.kind == 'uniform':
            return np.ones_like(r)
        if self.kind == 'gaussian':
            w = self.params['width']
            return np.exp(-r * r / (2.0 * w * w))
        if self.kind == 'annulus':
            inside = (r >= self.params['r_in']) & (r <= self.params['r_out'])
            return inside.astype(float)
        return np.interp(r, self.params['radii'], self.params['values'], right=0.0)

    def check_resolution(self, grid: RadialGrid) -> None:
        '''Raises InfeasibleError if the grid cannot resolve the data.'''
        if self.kind == 'gaussian':
            nodes = self.params['width'] / grid.spacing
            if nodes < MIN_NODES_PER_WIDTH:
                raise InfeasibleError(
                    'Bump width {} spans {:.2f} nodes, need at least {}.'.format(
                        self.params['width'], nodes, MIN_NODES_PER_WIDTH))
        elif self.kind == 'annulus':
            if self.params['r_out'] > grid.L:
                raise InfeasibleError('Annulus extends beyond the domain radius.')
            if (self.params['r_out'] - self.params['r_in']) / grid.spacing < 2.0:
                raise InfeasibleError('Annulus is thinner than two grid cells.')

    def to_document(self) -> Dict[str, object]:
        doc = {'kind': self.kind, 'mass': self.mass}
        for name, value in self.params.items():
            doc[name] = value.tolist() if isinstance(value, np.ndarray) else value
        return doc

    @classmethod
    def from_document(cls, doc: Dict[str, object], mass: float, key: str = 'initial') -> 'InitialData':
        '''Builds initial data from a validated scenario-document section.'''
        kind = doc.get('kind')
        try:
            if kind == 'uniform':
                return cls.uniform(mass)
            if kind == 'gaussian':
                return cls.gaussian(mass, doc['width'])
            if kind == 'annulus':
                return cls.annulus(mass, doc['r_in'], doc['r_out'])
            if kind == 'table':
                return cls.table(doc['radii'], doc['values'], mass)
        except KeyError as e:
            raise ConfigError('missing parameter {}'.format(e.args[0]), key='{}.{}'.format(key, e.args[0]))
        except (DomainError, TypeError) as e:
            raise ConfigError(str(e), key=key)
        raise ConfigError('unknown initial data kind {!r}'.format(kind), key='{}.kind'.format(key))

    def __repr__(self) -> str:
        return 'InitialData(kind={}, mass={})'.format(self.kind, self.mass)


def _normalized_cumulative(u0: InitialData, grid: RadialGrid, n: int):
    r = grid.nodes
    shape = u0.shape(r)
    omega = DimensionConstants(n).omega_n
    cumulative = cumulative_trapezoid(omega * shape * r ** (n - 1), r, initial=0.0)
    if u0.mass == 0.0:
        return np.zeros_like(r), 0.0, shape
    if not cumulative[-1] > 0.0:
        raise DomainError('Initial density {} carries no mass on {}.'.format(u0, grid))
    scale = u0.mass / cumulative[-1]
    return cumulative * scale, scale, shape


def init_mass_profile(u0: InitialData, grid: RadialGrid, n: int) -> MassProfile:
    '''Returns M(r, 0) = omega_n int_0^r u0(rho) rho^{n-1} drho.

    The integral is taken by the trapezoid rule on the grid and rescaled so
    that the discrete M(L, 0) equals the requested mass exactly.

    Raises:
        InfeasibleError: If the grid does not resolve the data.
        DomainError: If the density is negative or carries no mass on the grid.
    '''
    u0.check_resolution(grid)
    values, _, _ = _normalized_cumulative(u0, grid, n)
    values[0] = 0.0
    values[-1] = u0.mass
    return MassProfile(grid, n, values, 0.0)


def initial_density(u0: InitialData, grid: RadialGrid, n: int) -> np.ndarray:
    '''Returns the nodal values of u0 scaled to the requested mass.'''
    _, scale, shape = _normalized_cumulative(u0, grid, n)
    return shape * scale


def supersolution(r: Union[float, np.ndarray], k: float, n: int, chi: float) -> Union[float, np.ndarray]:
    '''Returns (2 n omega_n / chi) k r^n / (1 + k r^n).

    Raises:
        DomainError: If k <= 0 or any r < 0.
    '''
    if not k > 0.0:
        raise DomainError('k must be positive, got {}.'.format(k))
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise DomainError('Radius must be nonnegative.')
    ceiling = 2.0 * n * DimensionConstants(n).omega_n / chi
    y = k * r ** n
    value = ceiling * y / (1.0 + y)
    return float(value) if value.ndim == 0 else value


def supersolution_density(r: Union[float, np.ndarray], k: float, n: int, chi: float) -> Union[float, np.ndarray]:
    '''Returns the density of the supersolution, 2 n^2 k / (chi (1 + k r^n)^2).'''
    if not k > 0.0:
        raise DomainError('k must be positive, got {}.'.format(k))
    r = np.asarray(r, dtype=float)
    value = 2.0 * n * n * k / (chi * (1.0 + k * r ** n) ** 2)
    return float(value) if value.ndim == 0 else value


def supersolution_profile(grid: RadialGrid, k: float, n: int, chi: float) -> MassProfile:
    '''Returns the supersolution sampled on the grid.'''
    return MassProfile(grid, n, supersolution(grid.nodes, k, n, chi))


def choose_k(theta: float,
        u0_sup: float,
        L: float,
        n: int,
        chi: float,
        safety_factor: float = 2.0,
        nodes: Optional[np.ndarray] = None) -> float:
    '''Selects k so that the supersolution dominates the initial data.

    With T = 2 n omega_n / chi and C = alpha_n u0_sup, returns
    k = safety_factor * max(theta / (L^n (T - theta)), C / (T - C L^n)),
    then checks theta < M(L) and C r^n <= M(r) on `nodes` (a uniform
    sampling of [0, L] by default).

    Raises:
        HypothesisViolatedError: If theta >= T.
        InfeasibleError: If C L^n >= T, or if the barrier check fails.
        DomainError: If safety_factor <= 1 or u0_sup < 0.
    '''
    if not safety_factor > 1.0:
        raise DomainError('Safety factor must exceed 1, got {}.'.format(safety_factor))
    if u0_sup < 0.0:
        raise DomainError('Density supremum must be nonnegative.')
    constants = DimensionConstants(n)
    ceiling = 2.0 * n * constants.omega_n / chi
    if theta >= ceiling:
        raise HypothesisViolatedError(
            'Mass {} is not below the global-existence threshold {}.'.format(theta, ceiling))
    C = constants.alpha_n * u0_sup
    Ln = L ** n
    if C * Ln >= ceiling:
        raise InfeasibleError(
            'No supersolution dominates the data: C L^n = {} >= {}.'.format(C * Ln, ceiling))
    k = safety_factor * max(theta / (Ln * (ceiling - theta)), C / (ceiling - C * Ln))
    if k == 0.0:
        k = safety_factor / Ln

    r = np.linspace(0.0, L, 257) if nodes is None else np.asarray(nodes, dtype=float)
    barrier = supersolution(r, k, n, chi)
    if not (theta < supersolution(L, k, n, chi) and np.all(C * r ** n <= barrier * (1.0 + 1e-12))):
        raise InfeasibleError('Supersolution with k={} fails to dominate the data.'.format(k))
    logger.debug('chose k=%g for theta=%g u0_sup=%g', k, theta, u0_sup)
    return k


def comparison_violation(profile: MassProfile, k: float, chi: float) -> float:
    '''Returns max_i (M(r_i, t) - Mbar(r_i))_+.'''
    barrier = supersolution(profile.grid.nodes, k, profile.n, chi)
    return float(max(np.max(profile.values - barrier), 0.0))


def grad_v_magnitude(profile: MassProfile, i: int) -> float:
    '''Returns |grad v| = M(r_i, t) / (omega_n r_i^{n-1}).

    Raises:
        SingularityError: If i = 0.
        DomainError: If i is not a node index.
    '''
    if i == 0:
        raise SingularityError('grad v is not evaluated at r = 0.')
    if not 0 < i < profile.grid.size:
        raise DomainError('Node index {} outside 1..{}.'.format(i, profile.grid.size - 1))
    r = profile.grid.nodes[i]
    return float(profile.values[i] / (profile.constants.omega_n * r ** (profile.n - 1)))


def grad_v_max(profile: MassProfile) -> float:
    '''Returns max over r_i > 0 of |grad v|.'''
    r = profile.grid.nodes[1:]
    values = profile.values[1:] / (profile.constants.omega_n * r ** (profile.n - 1))
    return float(np.max(np.abs(values)))


def grad_v_bound(k: float, L: float, n: int, chi: float) -> float:
    '''Returns 2 n k L / chi, the bound on |grad v| under comparison.'''
    return 2.0 * n * k * L / chi


class DensityRecovery(NamedTuple):
    '''Nodal density recovered from a cumulative mass profile.

    Attributes:
        values (np.ndarray): u(r_i), clamped at zero.
        clamped (float): Largest magnitude removed by the clamp.
    '''
    values: np.ndarray
    clamped: float


def recover_density(profile: MassProfile) -> DensityRecovery:
    '''Inverts M(r) = omega_n int_0^r u rho^{n-1} drho by finite differences.

    Interior nodes use the central difference, r = 0 uses
    u(0) = M(r_1) / (alpha_n r_1^n) and r = L the second-order one-sided
    difference.
    '''
    M = profile.values
    r = profile.grid.nodes
    dr = profile.grid.spacing
    n = profile.n
    constants = profile.constants
    u = np.empty_like(M)
    u[1:-1] = (M[2:] - M[:-2]) / (2.0 * dr * constants.omega_n * r[1:-1] ** (n - 1))
    u[0] = M[1] / (constants.alpha_n * r[1] ** n)
    u[-1] = (3.0 * M[-1] - 4.0 * M[-2] + M[-3]) / (2.0 * dr * constants.omega_n * r[-1] ** (n - 1))
    clamped = float(max(-np.min(u), 0.0))
    return DensityRecovery(np.maximum(u, 0.0), clamped)


def recovered_mass(profile: MassProfile) -> float:
    '''Returns omega_n int_0^L u r^{n-1} dr for the recovered density.'''
    r = profile.grid.nodes
    u = recover_density(profile).values
    return float(profile.constants.omega_n * trapezoid(u * r ** (profile.n - 1), r))


def second_moment_of(profile: MassProfile) -> float:
    '''Returns m = L^2 theta - 2 int_0^L r M(r) dr (trapezoid rule).

    Nonnegative up to quadrature error.
    '''
    r = profile.grid.nodes
    return float(profile.grid.L ** 2 * profile.theta - 2.0 * trapezoid(r * profile.values, r))


def steady_residual(profile: MassProfile, chi: float) -> float:
    '''Returns the max norm of the centered discrete steady operator.

    The operator is M_rr + (chi M / (omega_n r) - (n - 1) / r) M_r with
    second-order central differences at the interior nodes.
    '''
    M = profile.values
    r = profile.grid.nodes[1:-1]
    dr = profile.grid.spacing
    drift = chi * M[1:-1] / (profile.constants.omega_n * r) - (profile.n - 1) / r
    second = (M[2:] - 2.0 * M[1:-1] + M[:-2]) / (dr * dr)
    first = (M[2:] - M[:-2]) / (2.0 * dr)
    return float(np.max(np.abs(second + drift * first)))


class ResidualStudy(NamedTuple):
    '''Steady residual of the supersolution under refinement.

    Attributes:
        sizes (List[int]): Interior node counts.
        residuals (List[float]): Max-norm residual per size.
        orders (List[float]): Observed orders between successive sizes.
    '''
    sizes: List[int]
    residuals: List[float]
    orders: List[float]


def residual_order(n: int = 2,
        k: float = 1.0,
        chi: float = 1.0,
        L: float = 1.0,
        sizes: Sequence[int] = (256, 512, 1024)) -> ResidualStudy:
    '''Measures the steady residual on the sampled supersolution.'''
    residuals = []
    spacings = []
    for N in sizes:
        grid = RadialGrid(L, N)
        residuals.append(steady_residual(supersolution_profile(grid, k, n, chi), chi))
        spacings.append(grid.spacing)
    orders = []
    for i in range(1, len(residuals)):
        orders.append(math.log(residuals[i - 1] / residuals[i]) / math.log(spacings[i - 1] / spacings[i]))
    logger.info('steady residual orders %s', orders)
    return ResidualStudy(list(sizes), residuals, orders)
