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
import unittest

import numpy as np
import pytest
from hypothesis import assume, given, settings
import hypothesis.strategies as st

from pykslab import kernelmath
from pykslab.chi import ChiProfile
from pykslab.density import SampleDensity
from pykslab.errors import DegenerateDensityError, DegeneratePairError, DomainError, SingularityError


def points(n):
    return st.lists(st.floats(min_value=-2.0, max_value=2.0, allow_nan=False), min_size=n, max_size=n)


MONOTONE = [
    ChiProfile.constant(1.5),
    ChiProfile.saturating(),
    ChiProfile.arctan(),
    ChiProfile.power(1.0, 3.0),
    ChiProfile.tabulated([0.0, 1.0, 4.0], [1.0, 1.5, 2.0]),
]


class TestPointwise(unittest.TestCase):

    def test_identity_example(self):
        chi = ChiProfile.constant(1.0)
        self.assertAlmostEqual(kernelmath.identity_residual(chi, [1.0, 0.0], [0.0, 1.0]), 0.0, places=14)
        self.assertAlmostEqual(kernelmath.identity_lhs(chi, [1.0, 0.0], [0.0, 1.0]), 4.0, places=14)

    def test_coincident_points(self):
        chi = ChiProfile.saturating()
        with self.assertRaises(DegeneratePairError):
            kernelmath.identity_residual(chi, [1.0, 2.0], [1.0, 2.0])
        with self.assertRaises(DegeneratePairError):
            kernelmath.neta_gap(3.0, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0])

    def test_dimension_mismatch(self):
        with self.assertRaises(DomainError):
            kernelmath.identity_residual(ChiProfile.saturating(), [1.0, 0.0], [1.0, 0.0, 0.0])

    def test_vectorized(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((50, 3))
        y = rng.standard_normal((50, 3))
        residual = kernelmath.identity_residual(ChiProfile.saturating(), x, y)
        self.assertEqual(residual.shape, (50,))
        self.assertLess(np.max(np.abs(residual)), 1e-12)

    def test_constant_chain_value(self):
        chi = ChiProfile.constant(2.0)
        self.assertAlmostEqual(kernelmath.monotone_chain_value(chi, [3.0, 1.0], [-1.0, 0.5]), 2.0, places=14)

    def test_neta_example(self):
        self.assertAlmostEqual(kernelmath.neta_gap(3.0, [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]), 2.5, places=14)

    def test_neta_equality_cases(self):
        x, y = [0.3, -1.2, 0.7], [1.1, 0.4, -0.2]
        self.assertAlmostEqual(kernelmath.neta_gap(2.0, x, y), 0.0, places=13)
        self.assertAlmostEqual(kernelmath.neta_gap(4.0, x, [-v for v in x]), 0.0, places=13)

    def test_neta_small_exponent(self):
        with self.assertRaises(DomainError):
            kernelmath.neta_gap(1.5, [1.0, 0.0], [0.0, 1.0])
        with self.assertRaises(DomainError):
            kernelmath.neta_gap(np.array([2.0, 1.9]), [[1.0, 0.0], [2.0, 0.0]], [[0.0, 1.0], [0.0, 2.0]])

    def test_neta_array_exponent(self):
        x = np.array([[2.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        y = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        gap = kernelmath.neta_gap(np.array([2.0, 3.0]), x, y)
        self.assertTrue(np.allclose(gap, [0.0, 2.5]))


@given(points(3), points(3), st.sampled_from(MONOTONE + [ChiProfile.anisotropic()]))
@settings(deadline=None)
def test_identity_holds(x, y, chi):
    if x == y:
        return
    residual = kernelmath.identity_residual(chi, x, y)
    scale = max(abs(kernelmath.identity_lhs(chi, x, y)), 1.0)
    assert abs(residual) <= 1e-12 * scale


@given(points(2), points(2), st.sampled_from(MONOTONE))
@settings(deadline=None)
def test_monotone_lower_bound(x, y, chi):
    assume(np.linalg.norm(np.subtract(x, y)) >= 1e-2)
    scale = max(abs(kernelmath.monotone_chain_value(chi, x, y)), 1.0)
    assert kernelmath.monotone_lower_bound_gap(chi, x, y) >= -1e-10 * scale
    assert kernelmath.monotone_chain_value(chi, x, y) >= chi.chi_at_origin - 1e-10 * scale


@given(points(4), points(4), st.floats(min_value=2.0, max_value=6.0))
@settings(deadline=None)
def test_neta_inequality(x, y, p):
    if x == y:
        return
    scale = max(abs(kernelmath.neta_lhs(p, x, y)), 1.0)
    assert kernelmath.neta_gap(p, x, y) >= -1e-12 * scale


class TestInteraction(unittest.TestCase):

    def setUp(self):
        self.pair = SampleDensity.from_points([[1.0, 0.0], [-1.0, 0.0]])

    def test_two_points(self):
        self.assertAlmostEqual(kernelmath.interaction_integral(self.pair, ChiProfile.constant(1.0)), 2.0, places=14)

    def test_second_moment_rate(self):
        rate = kernelmath.second_moment_rate_bound(self.pair, ChiProfile.constant(1.0))
        self.assertAlmostEqual(rate, 8.0 - 1.0 / math.pi, places=13)

    def test_constant_coefficient(self):
        rng = np.random.default_rng(4)
        weights = rng.uniform(0.1, 1.0, 7)
        density = SampleDensity.from_points(rng.standard_normal((7, 3)), weights)
        value = kernelmath.interaction_integral(density, ChiProfile.constant(2.0))
        expected = 2.0 * (weights.sum() ** 2 - np.sum(weights ** 2))
        self.assertAlmostEqual(value, expected, places=11)

    def test_block_size_does_not_matter(self):
        rng = np.random.default_rng(9)
        density = SampleDensity.from_points(rng.standard_normal((600, 2)))
        chi = ChiProfile.saturating()
        first = kernelmath.interaction_integral(density, chi)
        block = kernelmath.PAIRWISE_BLOCK
        try:
            kernelmath.PAIRWISE_BLOCK = 97
            second = kernelmath.interaction_integral(density, chi)
        finally:
            kernelmath.PAIRWISE_BLOCK = block
        self.assertAlmostEqual(first, second, delta=1e-9 * abs(first))

    def test_rate_needs_planar_density(self):
        density = SampleDensity.from_points([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        with self.assertRaises(DomainError):
            kernelmath.second_moment_rate_bound(density, ChiProfile.constant(1.0))

    def test_single_atom(self):
        density = SampleDensity.from_points([[1.0, 0.0], [1.0, 0.0]])
        with self.assertRaises(DegenerateDensityError):
            kernelmath.interaction_integral(density, ChiProfile.constant(1.0))


class TestRiesz(unittest.TestCase):

    def test_exact_when_p_equals_n(self):
        density = SampleDensity.uniform_ball(3, mass=2.0)
        estimate = kernelmath.riesz_double_integral(density, 3.0)
        self.assertEqual(estimate.method, 'exact')
        self.assertAlmostEqual(estimate.value, 4.0, places=12)

    def test_pairs(self):
        density = SampleDensity.from_points([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
        estimate = kernelmath.riesz_double_integral(density, 2.0)
        self.assertEqual(estimate.method, 'pairs')
        self.assertAlmostEqual(estimate.value, 2.0, places=14)

    def test_exponent_range(self):
        density = SampleDensity.uniform_ball(3)
        with self.assertRaises(DomainError):
            kernelmath.riesz_double_integral(density, 3.5)
        with self.assertRaises(DomainError):
            kernelmath.riesz_double_integral(density, 1.5)
        with self.assertRaises(DomainError):
            kernelmath.riesz_double_integral(density, 2.5, method='quadrature')

    def test_uniform_ball(self):
        density = SampleDensity.uniform_ball(3)
        estimate = kernelmath.riesz_double_integral(density, 2.0, method='monte-carlo', seed=1)
        self.assertEqual(estimate.method, 'monte-carlo')
        self.assertAlmostEqual(estimate.value, 1.2, delta=0.012)
        self.assertLess(estimate.stderr, 0.01)

    def test_seeded(self):
        density = SampleDensity.uniform_ball(3)
        first = kernelmath.riesz_double_integral(density, 2.5, method='monte-carlo', samples=1000, seed=3)
        second = kernelmath.riesz_double_integral(density, 2.5, method='monte-carlo', samples=1000, seed=3)
        self.assertEqual(first, second)


class TestSlack(unittest.TestCase):

    def test_uniform_ball(self):
        slack = kernelmath.lemma32_slack(SampleDensity.uniform_ball(3), 2.0, method='monte-carlo', seed=2)
        self.assertAlmostEqual(slack.value, 1.2 * math.sqrt(1.2) - 1.0, delta=0.02 * 0.3145)
        self.assertAlmostEqual(slack.moments.second_moment, 0.6, places=12)

    def test_mass_at_origin(self):
        density = SampleDensity.from_points([[0.0, 0.0, 0.0]], [2.0])
        with self.assertRaises(SingularityError):
            kernelmath.lemma32_slack(density, 2.0)

    def test_mixtures(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            density = SampleDensity.gaussian_mixture(rng, 3, 400, rng.uniform(-1.0, 1.0, (2, 3)), [0.3, 0.5])
            p = float(rng.uniform(2.0, 3.0))
            self.assertGreaterEqual(kernelmath.lemma32_slack(density, p).value, 0.0)


@pytest.mark.parametrize('n', [2, 3, 4])
def test_moment_summary_point_cloud(n):
    positions = np.eye(n) * 2.0
    moments = kernelmath.moment_summary(SampleDensity.from_points(positions))
    assert moments.mass == n
    assert moments.second_moment == pytest.approx(4.0 * n)
    assert moments.centroid == pytest.approx(np.full(n, 2.0 / n))
