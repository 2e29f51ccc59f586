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


import io
import logging
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from pykslab import utils
from pykslab.errors import DegenerateDensityError, DomainError
from pykslab.model import ball_volume

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]

POINT_CLOUD = 'point-cloud'
RADIAL_GRID = 'radial-grid'


class SampleDensity(object):
    '''Nonnegative density used as quadrature input.

    Two representations are supported. A point cloud is a set of positions
    with nonnegative weights. A radial grid is a radially symmetric density
    given by cell edges and the mass of each spherical shell; the density is
    constant inside each shell.

    Note:
        Use the class-method constructors rather than calling this
        constructor directly.

    Args:
        representation: One of 'point-cloud' or 'radial-grid'.
        n: Ambient dimension.
        positions: Atom positions, shape (k, n) (point cloud only).
        weights: Atom weights, shape (k,) (point cloud only).
        edges: Shell edges, shape (K+1,) (radial grid only).
        cell_masses: Shell masses, shape (K,) (radial grid only).

    Attributes:
        representation (str): 'point-cloud' or 'radial-grid'.
        n (int): Ambient dimension.
        total_mass (float): Total mass, cached.
    '''

    def __init__(self,
            representation: str,
            n: int,
            positions: Optional[np.ndarray] = None,
            weights: Optional[np.ndarray] = None,
            edges: Optional[np.ndarray] = None,
            cell_masses: Optional[np.ndarray] = None) -> None:
        self.representation = representation
        self.n = int(n)
        self.positions = positions
        self.weights = weights
        self.edges = edges
        self.cell_masses = cell_masses

        masses = weights if representation == POINT_CLOUD else cell_masses
        if np.any(masses < 0.0):
            raise DomainError('Density weights must be nonnegative.')
        self.total_mass = utils.compensated_sum(masses)
        if not self.total_mass > 0.0:
            raise DegenerateDensityError('Density has no mass.')

    @classmethod
    def from_points(cls, positions: ArrayLike, weights: Optional[ArrayLike] = None) -> 'SampleDensity':
        '''Returns a point cloud; unit weights when `weights` is None.'''
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        if weights is None:
            weights = np.ones(positions.shape[0])
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if weights.shape[0] != positions.shape[0]:
            raise DomainError('Got {} positions but {} weights.'.format(positions.shape[0], weights.shape[0]))
        return cls(POINT_CLOUD, positions.shape[1], positions=positions, weights=weights)

    @classmethod
    def from_table(cls, source: Union[str, TextIO]) -> 'SampleDensity':
        '''Reads a point cloud from a plain-text table.

        Each row holds the coordinates of a point followed by its weight.
        Blank lines and lines starting with '#' are ignored.

        Args:
            source: A file path or an open text stream.
        '''
        table = np.loadtxt(source, dtype=float, ndmin=2, comments='#')
        if table.shape[1] < 3:
            raise DomainError('Table rows need at least two coordinates and a weight.')
        return cls.from_points(table[:, :-1], table[:, -1])

    @classmethod
    def from_table_text(cls, text: str) -> 'SampleDensity':
        '''Reads a point cloud from the text of a plain-text table.'''
        return cls.from_table(io.StringIO(text))

    @classmethod
    def from_cell_masses(cls, edges: ArrayLike, cell_masses: ArrayLike, n: int) -> 'SampleDensity':
        '''Returns a radial-grid density from shell edges and shell masses.'''
        edges = np.asarray(edges, dtype=float)
        cell_masses = np.asarray(cell_masses, dtype=float)
        if edges.ndim != 1 or edges.size != cell_masses.size + 1:
            raise DomainError('Need one more edge than shells.')
        if edges[0] < 0.0 or np.any(np.diff(edges) <= 0.0):
            raise DomainError('Shell edges must be nonnegative and strictly increasing.')
        return cls(RADIAL_GRID, n, edges=edges, cell_masses=cell_masses)

    @classmethod
    def from_radial_nodes(cls, radii: ArrayLike, values: ArrayLike, n: int) -> 'SampleDensity':
        '''Returns a radial-grid density from nodal density values.

        The density of each shell is the mean of its two nodal values.
        '''
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(values < 0.0):
            raise DomainError('Density values must be nonnegative.')
        shell_volumes = ball_volume(n) * np.diff(radii ** n)
        masses = 0.5 * (values[1:] + values[:-1]) * shell_volumes
        return cls.from_cell_masses(radii, masses, n)

    @classmethod
    def from_mass_profile(cls, profile) -> 'SampleDensity':
        '''Returns the radial-grid density whose shell masses are the increments of M(r, t).

        Negative increments (non-monotone profiles) are clamped to zero.
        '''
        increments = np.clip(np.diff(profile.values), 0.0, None)
        return cls.from_cell_masses(profile.grid.nodes, increments, profile.n)

    @classmethod
    def uniform_ball(cls, n: int, radius: float = 1.0, mass: float = 1.0, cells: int = 256) -> 'SampleDensity':
        '''Returns the uniform density of given `mass` on the ball of given `radius`.'''
        edges = np.linspace(0.0, radius, cells + 1)
        masses = mass * np.diff(edges ** n) / radius ** n
        return cls.from_cell_masses(edges, masses, n)

    @classmethod
    def gaussian_mixture(cls,
            rng: np.random.Generator,
            n: int,
            count: int,
            means: ArrayLike,
            scales: ArrayLike,
            proportions: Optional[ArrayLike] = None,
            mass: float = 1.0) -> 'SampleDensity':
        '''Returns an equal-weight point cloud drawn from an isotropic Gaussian mixture.'''
        means = np.atleast_2d(np.asarray(means, dtype=float))
        scales = np.asarray(scales, dtype=float).reshape(-1)
        if proportions is None:
            proportions = np.full(means.shape[0], 1.0 / means.shape[0])
        proportions = np.asarray(proportions, dtype=float)
        proportions = proportions / proportions.sum()
        labels = rng.choice(means.shape[0], size=count, p=proportions)
        positions = means[labels] + scales[labels, None] * rng.standard_normal((count, n))
        return cls.from_points(positions, np.full(count, mass / count))

    @property
    def is_point_cloud(self) -> bool:
        return self.representation == POINT_CLOUD

    @property
    def support_radius(self) -> float:
        '''Returns the radius of the smallest origin-centred ball holding the mass.'''
        if self.is_point_cloud:
            return float(np.max(np.linalg.norm(self.positions[self.weights > 0.0], axis=1)))
        occupied = np.nonzero(self.cell_masses > 0.0)[0]
        return float(self.edges[occupied[-1] + 1])

    @property
    def cell_densities(self) -> np.ndarray:
        '''Returns the constant density value of each shell (radial grid only).'''
        return self.cell_masses / (ball_volume(self.n) * np.diff(self.edges ** self.n))

    def as_point_cloud(self, angular: int = 64, seed: int = 0) -> 'SampleDensity':
        '''Returns a point cloud carrying the same shell masses.

        Each shell contributes `angular` equal atoms on the sphere of its
        mid radius, so no two atoms coincide. In two dimensions the atoms
        are equally spaced, with a half-step offset on every other shell; in
        higher dimensions seeded random directions are used.
        '''
        if self.is_point_cloud:
            return self
        mids = 0.5 * (self.edges[1:] + self.edges[:-1])
        if self.n == 2:
            base = 2.0 * np.pi * np.arange(angular) / angular
            shift = np.pi / angular
            rings = []
            for i, r in enumerate(mids):
                theta = base + (shift if i % 2 else 0.0)
                rings.append(r * np.stack([np.cos(theta), np.sin(theta)], axis=1))
            positions = np.concatenate(rings)
        else:
            directions = utils.random_directions(np.random.default_rng(seed), angular, self.n)
            positions = (mids[:, None, None] * directions[None, :, :]).reshape(-1, self.n)
        weights = np.repeat(self.cell_masses / angular, angular)
        keep = weights > 0.0
        return SampleDensity.from_points(positions[keep], weights[keep])

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        '''Returns `count` independent draws from the normalized density.

        Point clouds are sampled atom-wise; radial grids are sampled
        continuously, with density constant inside each shell.
        '''
        if self.is_point_cloud:
            idx = rng.choice(self.weights.size, size=count, p=self.weights / self.total_mass)
            return self.positions[idx]
        cells = rng.choice(self.cell_masses.size, size=count, p=self.cell_masses / self.total_mass)
        lo = self.edges[cells] ** self.n
        hi = self.edges[cells + 1] ** self.n
        r = (lo + rng.random(count) * (hi - lo)) ** (1.0 / self.n)
        return utils.random_directions(rng, count, self.n) * r[:, None]

    def __repr__(self) -> str:
        size = self.weights.size if self.is_point_cloud else self.cell_masses.size
        return 'SampleDensity({}, n={}, size={}, mass={!r})'.format(
            self.representation, self.n, size, self.total_mass)
