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
from typing import Iterable

import numpy as np


def compensated_sum(values: Iterable[float]) -> float:
    '''Returns the correctly rounded sum of `values`.

    Partial sums are accumulated in index order, so the result does not
    depend on how the terms were produced.
    '''
    return math.fsum(float(v) for v in values)


def format_float(value: float) -> str:
    '''Returns the shortest string that round-trips `value`.'''
    return repr(float(value))


def random_directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    '''Returns `count` unit vectors uniformly distributed on the sphere in R^n.'''
    directions = rng.standard_normal((count, n))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return directions / norms


def uniform_ball_points(rng: np.random.Generator,
        count: int,
        n: int,
        radius: float = 1.0) -> np.ndarray:
    '''Returns `count` points drawn uniformly from the ball of given `radius` in R^n.'''
    directions = random_directions(rng, count, n)
    radii = radius * rng.random(count) ** (1.0 / n)
    return directions * radii[:, None]
