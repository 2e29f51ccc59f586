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


from typing import Optional


class KSLabError(Exception):
    '''Base class of every error raised by pykslab.'''


class DomainError(KSLabError, ValueError):
    '''Argument outside the mathematical domain of an operation.'''


class RangeError(DomainError):
    '''Tabulated profile queried outside its table.'''


class DegeneratePairError(DomainError):
    '''A pair of points that must be distinct coincides.'''


class DegenerateDensityError(DomainError):
    '''A density has fewer than two distinct atoms.'''


class SingularityError(DomainError):
    '''A quantity diverges for the given input.'''


class RegimeError(DomainError):
    '''The pair (n, p) lies outside the regime of an operation.'''


class HypothesisViolatedError(KSLabError):
    '''A hypothesis of a certificate does not hold.'''


class InfeasibleError(KSLabError):
    '''A configuration cannot be realised by the numerical machinery.'''


class SolverError(KSLabError):
    '''Internal numerical failure of the radial solver.'''


class ConfigError(KSLabError, ValueError):
    '''Invalid scenario document.

    Args:
        message: Human readable diagnostic.
        key (Optional[str]): Dotted path of the offending key.

    Attributes:
        key (Optional[str]): Dotted path of the offending key.
    '''

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        if key is not None:
            message = '{}: {}'.format(key, message)
        super().__init__(message)
        self.key = key
