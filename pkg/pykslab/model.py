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


import math
from typing import Optional

from scipy import special

from pykslab.errors import DomainError, RegimeError


def ball_volume(n: int) -> float:
    '''Returns the volume of the unit n-ball, pi^{n/2} / Gamma(n/2 + 1).

    Args:
        n (int): Ambient dimension.

    Returns:
        float: The volume alpha_n.

    Raises:
        DomainError: If `n` < 1.
    '''
    if int(n) != n or n < 1:
        raise DomainError('Dimension must be an integer >= 1, got {}.'.format(n))
    return float(math.pi ** (n / 2.0) / special.gamma(n / 2.0 + 1.0))


def sphere_area(n: int) -> float:
    '''Returns the surface area of the unit sphere in R^n, n * alpha_n.'''
    return n * ball_volume(n)


class DimensionConstants(object):
    '''Dimensional constants of R^n.

    Formulas written for blow-up bind to `alpha_n` (ball volume); formulas
    written for the cumulative mass in a ball bind to `omega_n` (sphere area).

    Args:
        n: Ambient dimension, at least 2.

    Attributes:
        n (int): Ambient dimension.
        alpha_n (float): Volume of the unit n-ball.
        omega_n (float): Surface area of the unit sphere.
    '''

    def __init__(self, n: int) -> None:
        if int(n) != n or n < 2:
            raise DomainError('Dimension must be an integer >= 2, got {}.'.format(n))
        self.n = int(n)
        self.alpha_n = ball_volume(self.n)
        self.omega_n = self.n * self.alpha_n

    @property
    def kernel_gradient_constant(self) -> float:
        '''Returns 1/(n alpha_n), the constant of grad K_n = -c (x / |x|^n).'''
        return 1.0 / (self.n * self.alpha_n)

    def __repr__(self) -> str:
        return 'DimensionConstants(n={}, alpha_n={!r}, omega_n={!r})'.format(
            self.n, self.alpha_n, self.omega_n)


def critical_mass_blowup(n: int, chi0: float, p: Optional[float] = None) -> float:
    '''Returns the mass above which no global solution exists.

    For n = 2 the threshold is 8 pi / chi(0) for any radially nondecreasing
    coefficient; `p` is ignored. For n >= 3 it is 2^n n alpha_n / chi for the
    coefficient chi |x|^{n-2}, i.e. p = n.

    Args:
        n (int): Ambient dimension.
        chi0 (float): chi(0) when n = 2, the strength chi when n >= 3.
        p (Optional[float]): Exponent of the |x|^{p-2} weight (n >= 3 only).

    Returns:
        float: The threshold mass.

    Raises:
        DomainError: If `chi0` is not positive or `n` < 2.
        RegimeError: If n >= 3 and p != n (the p < n case is governed by
            a moment threshold, see :func:`pykslab.momentflow.cb_threshold`).
    '''
    if chi0 <= 0.0:
        raise DomainError('Chemotactic coefficient must be positive, got {}.'.format(chi0))
    constants = DimensionConstants(n)
    if constants.n == 2:
        return 8.0 * math.pi / chi0
    if p is None or p != constants.n:
        raise RegimeError(
            'No mass threshold for n={} and p={}: use the moment threshold.'.format(n, p))
    return 2.0 ** constants.n * constants.n * constants.alpha_n / chi0


def critical_mass_global(n: int, chi: float) -> float:
    '''Returns the mass below which radial solutions in a ball exist globally.

    Args:
        n (int): Ambient dimension, at least 2.
        chi (float): Strength of the coefficient chi |x|^{n-2}.

    Returns:
        float: 2 n omega_n / chi.

    Raises:
        DomainError: If `chi` is not positive or `n` < 2.
    '''
    if chi <= 0.0:
        raise DomainError('Chemotactic coefficient must be positive, got {}.'.format(chi))
    constants = DimensionConstants(n)
    return 2.0 * constants.n * constants.omega_n / chi
