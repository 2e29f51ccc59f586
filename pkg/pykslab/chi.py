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
from typing import Dict, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from pykslab import utils
from pykslab.errors import ConfigError, DomainError, RangeError

logger = logging.getLogger(__name__)

PointLike = Union[Sequence[float], np.ndarray]

KINDS = ('constant', 'saturating', 'arctan', 'power', 'anisotropic', 'tabulated-radial')

MONOTONE_TOLERANCE = 1e-12


class ChiProfile(object):
    '''Chemotactic coefficient chi(x) from a fixed catalog.

    Catalog:
        constant:          chi(x) = chi0 > 0.
        saturating:        chi(x) = |x|^2 / (1 + |x|^2) + 1.
        arctan:            chi(x) = arctan(|x|^2).
        power:             chi(x) = strength |x|^{exponent - 2}, exponent >= 2.
        anisotropic:       chi(x) = x_1^2 / |x|, and 0 at the origin.
        tabulated-radial:  piecewise-linear in |x| through sorted (radius, value) pairs.

    Note:
        Use the class-method constructors (e.g. :meth:`ChiProfile.power`)
        rather than passing raw parameters.

    Args:
        kind: One of the catalog names.
        params: Parameters of the given kind.

    Attributes:
        kind (str): Catalog name.
        params (Dict[str, object]): Validated parameters.
    '''

    def __init__(self, kind: str, params: Optional[Dict[str, object]] = None) -> None:
        if kind not in KINDS:
            raise DomainError('Unknown chi profile kind: {}.'.format(kind))
        self.kind = kind
        self.params = self._validate(kind, dict(params or {}))

    @classmethod
    def constant(cls, chi0: float) -> 'ChiProfile':
        return cls('constant', {'chi0': chi0})

    @classmethod
    def saturating(cls) -> 'ChiProfile':
        return cls('saturating')

    @classmethod
    def arctan(cls) -> 'ChiProfile':
        return cls('arctan')

    @classmethod
    def power(cls, strength: float, exponent: float) -> 'ChiProfile':
        return cls('power', {'strength': strength, 'exponent': exponent})

    @classmethod
    def anisotropic(cls) -> 'ChiProfile':
        return cls('anisotropic')

    @classmethod
    def tabulated(cls, radii: Sequence[float], values: Sequence[float]) -> 'ChiProfile':
        return cls('tabulated-radial', {'radii': radii, 'values': values})

    @classmethod
    def _validate(cls, kind: str, params: Dict[str, object]) -> Dict[str, object]:
        expected = {
            'constant': {'chi0'},
            'saturating': set(),
            'arctan': set(),
            'power': {'strength', 'exponent'},
            'anisotropic': set(),
            'tabulated-radial': {'radii', 'values'},
        }[kind]
        if set(params) != expected:
            raise DomainError('Profile {} expects parameters {}, got {}.'.format(
                kind, sorted(expected), sorted(params)))

        if kind == 'constant':
            chi0 = float(params['chi0'])
            if not chi0 > 0.0:
                raise DomainError('Constant chi must be positive, got {}.'.format(chi0))
            return {'chi0': chi0}

        if kind == 'power':
            strength = float(params['strength'])
            exponent = float(params['exponent'])
            if not strength > 0.0:
                raise DomainError('Power strength must be positive, got {}.'.format(strength))
            if not exponent >= 2.0:
                raise DomainError('Power exponent must be >= 2, got {}.'.format(exponent))
            return {'strength': strength, 'exponent': exponent}

        if kind == 'tabulated-radial':
            radii = np.asarray(params['radii'], dtype=float)
            values = np.asarray(params['values'], dtype=float)
            if radii.ndim != 1 or radii.shape != values.shape or radii.size < 2:
                raise DomainError('Table needs at least two (radius, value) pairs.')
            if radii[0] < 0.0 or np.any(np.diff(radii) <= 0.0):
                raise DomainError('Table radii must be nonnegative and strictly increasing.')
            if np.any(values < 0.0):
                raise DomainError('Table values must be nonnegative.')
            return {'radii': radii, 'values': values}

        return {}

    @property
    def declared_monotone(self) -> bool:
        '''Returns True if the profile is radially nondecreasing by construction.'''
        if self.kind == 'anisotropic':
            return False
        if self.kind == 'tabulated-radial':
            return bool(np.all(np.diff(self.params['values']) >= 0.0))
        return True

    @property
    def domain_radius(self) -> Optional[float]:
        '''Returns the largest admissible |x|, or None if unbounded.'''
        if self.kind == 'tabulated-radial':
            return float(self.params['radii'][-1])
        return None

    @property
    def chi_at_origin(self) -> float:
        '''Returns chi(0).'''
        return float(self.evaluate(np.zeros(2)))

    def power_law(self) -> Optional[Tuple[float, float]]:
        '''Returns (strength, exponent) if chi(x) = strength |x|^{exponent-2}, else None.'''
        if self.kind == 'constant':
            return (self.params['chi0'], 2.0)
        if self.kind == 'power':
            return (self.params['strength'], self.params['exponent'])
        return None

    def evaluate(self, x: PointLike) -> Union[float, np.ndarray]:
        '''Returns chi at the point(s) `x`.

        Args:
            x: A point of shape (n,) or an array of points of shape (..., n).

        Returns:
            A float for a single point, an array of shape (...) otherwise.

        Raises:
            RangeError: If a tabulated profile is queried outside its table.
        '''
        x = np.asarray(x, dtype=float)
        norm = np.linalg.norm(x, axis=-1)

        if self.kind == 'constant':
            value = np.full_like(norm, self.params['chi0'])
        elif self.kind == 'saturating':
            sq = norm ** 2
            value = sq / (1.0 + sq) + 1.0
        elif self.kind == 'arctan':
            value = np.arctan(norm ** 2)
        elif self.kind == 'power':
            value = self.params['strength'] * norm ** (self.params['exponent'] - 2.0)
        elif self.kind == 'anisotropic':
            first = x[..., 0] ** 2
            value = np.divide(first, norm, out=np.zeros_like(norm), where=norm > 0.0)
        else:
            radii = self.params['radii']
            if np.any(norm < radii[0]) or np.any(norm > radii[-1]):
                raise RangeError('Radius outside table range [{}, {}].'.format(radii[0], radii[-1]))
            value = np.interp(norm, radii, self.params['values'])

        if np.ndim(value) == 0:
            return float(value)
        return value

    __call__ = evaluate

    def to_document(self) -> Dict[str, object]:
        '''Returns a JSON-compatible description of the profile.'''
        doc = {'kind': self.kind}
        for name, value in self.params.items():
            doc[name] = value.tolist() if isinstance(value, np.ndarray) else value
        return doc

    @classmethod
    def from_document(cls, doc: Union[float, int, Dict[str, object]], key: str = 'model.chi') -> 'ChiProfile':
        '''Builds a profile from a scenario-document value.

        A bare number denotes the constant profile.

        Raises:
            ConfigError: If the value does not describe a catalog profile.
        '''
        if isinstance(doc, bool):
            raise ConfigError('expected a number or a profile object', key)
        if isinstance(doc, (int, float)):
            doc = {'kind': 'constant', 'chi0': doc}
        if not isinstance(doc, dict) or 'kind' not in doc:
            raise ConfigError('expected a number or an object with a "kind"', key)
        params = {name: value for name, value in doc.items() if name != 'kind'}
        try:
            return cls(doc['kind'], params)
        except DomainError as error:
            raise ConfigError(str(error), key)

    def __repr__(self) -> str:
        params = ', '.join('{}={}'.format(k, v) for k, v in self.to_document().items() if k != 'kind')
        return 'ChiProfile({}{})'.format(self.kind, ', ' + params if params else '')


def chi_eval(profile: ChiProfile, x: PointLike) -> Union[float, np.ndarray]:
    '''Returns chi(x) for the given profile. See :meth:`ChiProfile.evaluate`.'''
    return profile.evaluate(x)


class MonotonicityReport(NamedTuple):
    '''Outcome of a random radial-monotonicity check.

    Attributes:
        holds (bool): True if no sampled pair violates the condition.
        worst_gap (float): min of chi(x) - chi(y) over sampled pairs with |x| >= |y|.
        worst_pair (Tuple[np.ndarray, np.ndarray]): The pair attaining `worst_gap`.
    '''
    holds: bool
    worst_gap: float
    worst_pair: Tuple[np.ndarray, np.ndarray]


def _sample_points(profile: ChiProfile, rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    if profile.kind == 'tabulated-radial':
        radii = profile.params['radii']
        r = rng.uniform(radii[0], radii[-1], count)
        return utils.random_directions(rng, count, n) * r[:, None]
    return utils.uniform_ball_points(rng, count, n, radius=2.0)


def check_radial_monotone(profile: ChiProfile,
        sample_count: int,
        seed: int,
        n: int = 2) -> MonotonicityReport:
    '''Checks chi(x) >= chi(y) whenever |x| >= |y| on random pairs.

    Args:
        profile: The profile to check.
        sample_count (int): Number of random pairs, at least 2.
        seed (int): Seed of the random generator.
        n (int): Ambient dimension of the sampled points.

    Returns:
        MonotonicityReport: The most violating pair and the verdict.

    Raises:
        DomainError: If `sample_count` < 2.
    '''
    if sample_count < 2:
        raise DomainError('At least two samples are required, got {}.'.format(sample_count))

    rng = np.random.default_rng(seed)
    x = _sample_points(profile, rng, sample_count, n)
    y = _sample_points(profile, rng, sample_count, n)

    swap = np.linalg.norm(x, axis=1) < np.linalg.norm(y, axis=1)
    x[swap], y[swap] = y[swap].copy(), x[swap].copy()

    gaps = np.asarray(profile.evaluate(x)) - np.asarray(profile.evaluate(y))
    worst = int(np.argmin(gaps))
    report = MonotonicityReport(
        holds=bool(gaps[worst] >= -MONOTONE_TOLERANCE),
        worst_gap=float(gaps[worst]),
        worst_pair=(x[worst], y[worst]))
    logger.debug('monotonicity check of %r: holds=%s worst_gap=%g', profile, report.holds, report.worst_gap)
    return report
