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

from pykslab import radial
from pykslab.errors import (ConfigError, DomainError, HypothesisViolatedError, InfeasibleError,
    SingularityError)
from pykslab.radial import InitialData, MassProfile, RadialGrid


class TestRadialGrid(unittest.TestCase):

    def test_nodes(self):
        grid = RadialGrid(2.0, 63)
        self.assertEqual(grid.size, 65)
        self.assertEqual(grid.spacing, 2.0 / 64)
        self.assertEqual(grid.nodes[0], 0.0)
        self.assertEqual(grid.nodes[-1], 2.0)
        self.assertTrue(np.all(np.diff(grid.nodes) > 0.0))

    def test_equality(self):
        self.assertEqual(RadialGrid(1.0, 31), RadialGrid(1.0, 31))
        self.assertNotEqual(RadialGrid(1.0, 31), RadialGrid(1.0, 32))

    def test_invalid(self):
        with self.assertRaises(DomainError):
            RadialGrid(1.0, 15)
        with self.assertRaises(DomainError):
            RadialGrid(0.0, 31)


class TestInitialData(unittest.TestCase):

    def test_uniform_planar(self):
        grid = RadialGrid(1.0, 63)
        profile = radial.init_mass_profile(InitialData.uniform(1.0), grid, 2)
        self.assertTrue(np.allclose(profile.values, grid.nodes ** 2, rtol=0.0, atol=1e-12))
        self.assertEqual(profile.theta, 1.0)
        self.assertEqual(profile.time, 0.0)

    def test_uniform_three_d(self):
        grid = RadialGrid(1.0, 255)
        profile = radial.init_mass_profile(InitialData.uniform(2.0), grid, 3)
        self.assertTrue(np.allclose(profile.values, 2.0 * grid.nodes ** 3, rtol=0.0, atol=1e-4))
        self.assertEqual(profile.monotonicity_violation(), 0.0)

    def test_zero_mass(self):
        profile = radial.init_mass_profile(InitialData.gaussian(0.0, 0.2), RadialGrid(1.0, 63), 2)
        self.assertTrue(np.all(profile.values == 0.0))

    def test_gaussian(self):
        grid = RadialGrid(1.0, 4095)
        profile = radial.init_mass_profile(InitialData.gaussian(1.0, 0.02), grid, 2)
        self.assertEqual(profile.values[0], 0.0)
        self.assertEqual(profile.theta, 1.0)
        self.assertTrue(np.all(profile.values[grid.nodes >= 0.2] >= 1.0 - 1e-6))

    def test_unresolved_bump(self):
        with self.assertRaises(InfeasibleError):
            radial.init_mass_profile(InitialData.gaussian(1.0, 0.01), RadialGrid(1.0, 63), 2)

    def test_annulus(self):
        grid = RadialGrid(1.0, 127)
        profile = radial.init_mass_profile(InitialData.annulus(3.0, 0.25, 0.5), grid, 2)
        self.assertTrue(np.all(profile.values[grid.nodes < 0.24] == 0.0))
        self.assertTrue(np.allclose(profile.values[grid.nodes > 0.51], 3.0))
        with self.assertRaises(InfeasibleError):
            radial.init_mass_profile(InitialData.annulus(3.0, 0.5, 1.5), grid, 2)
        with self.assertRaises(InfeasibleError):
            radial.init_mass_profile(InitialData.annulus(3.0, 0.5, 0.505), grid, 2)

    def test_table(self):
        grid = RadialGrid(1.0, 63)
        u0 = InitialData.table([0.0, 0.5], [1.0, 1.0], 2.0)
        profile = radial.init_mass_profile(u0, grid, 2)
        self.assertAlmostEqual(profile.theta, 2.0)
        density = radial.initial_density(u0, grid, 2)
        self.assertEqual(density[-1], 0.0)

    def test_invalid(self):
        with self.assertRaises(DomainError):
            InitialData.table([0.0, 1.0], [1.0, -1.0], 1.0)
        with self.assertRaises(DomainError):
            InitialData.gaussian(-1.0, 0.2)
        with self.assertRaises(DomainError):
            InitialData.gaussian(1.0, 0.0)
        with self.assertRaises(DomainError):
            InitialData.annulus(1.0, 0.5, 0.4)

    def test_no_mass_on_grid(self):
        u0 = InitialData.table([0.0, 1.0], [0.0, 0.0], 1.0)
        with self.assertRaises(DomainError):
            radial.init_mass_profile(u0, RadialGrid(1.0, 31), 2)

    def test_with_mass(self):
        u0 = InitialData.gaussian(1.0, 0.2).with_mass(5.0)
        self.assertEqual(u0.mass, 5.0)
        self.assertEqual(u0.params['width'], 0.2)

    def test_document(self):
        u0 = InitialData.from_document({'kind': 'gaussian', 'width': 0.1}, 4.0)
        self.assertEqual(u0.to_document(), {'kind': 'gaussian', 'mass': 4.0, 'width': 0.1})
        with self.assertRaises(ConfigError) as context:
            InitialData.from_document({'kind': 'annulus', 'r_in': 0.1}, 1.0)
        self.assertEqual(context.exception.key, 'initial.r_out')
        with self.assertRaises(ConfigError) as context:
            InitialData.from_document({'kind': 'spike'}, 1.0)
        self.assertEqual(context.exception.key, 'initial.kind')


class TestSupersolution(unittest.TestCase):

    def test_values(self):
        self.assertEqual(radial.supersolution(0.0, 1.0, 2, 1.0), 0.0)
        self.assertAlmostEqual(radial.supersolution(1.0, 1.0, 2, 1.0), 4.0 * math.pi, places=12)
        value = radial.supersolution(0.5, 1e12, 2, 1.0)
        self.assertLess(value, 8.0 * math.pi)
        self.assertAlmostEqual(value, 8.0 * math.pi, places=9)

    def test_density(self):
        self.assertAlmostEqual(radial.supersolution_density(1.0, 1.0, 2, 1.0), 2.0, places=14)

    def test_invalid(self):
        with self.assertRaises(DomainError):
            radial.supersolution(1.0, 0.0, 2, 1.0)
        with self.assertRaises(DomainError):
            radial.supersolution(-0.1, 1.0, 2, 1.0)

    def test_choose_k(self):
        k = radial.choose_k(4.0 * math.pi, 4.0, 1.0, 2, 1.0, safety_factor=2.0)
        self.assertAlmostEqual(k, 2.0, places=12)

    def test_choose_k_zero_data(self):
        self.assertEqual(radial.choose_k(0.0, 0.0, 2.0, 2, 1.0), 0.5)

    def test_choose_k_above_threshold(self):
        with self.assertRaises(HypothesisViolatedError):
            radial.choose_k(8.0 * math.pi, 1.0, 1.0, 2, 1.0)

    def test_choose_k_infeasible(self):
        with self.assertRaises(InfeasibleError):
            radial.choose_k(math.pi, 10.0, 1.0, 2, 1.0)

    def test_choose_k_safety(self):
        with self.assertRaises(DomainError):
            radial.choose_k(math.pi, 1.0, 1.0, 2, 1.0, safety_factor=1.0)

    def test_comparison(self):
        grid = RadialGrid(1.0, 63)
        barrier = radial.supersolution_profile(grid, 2.0, 2, 1.0)
        self.assertEqual(radial.comparison_violation(barrier, 2.0, 1.0), 0.0)
        data = radial.init_mass_profile(InitialData.uniform(4.0 * math.pi), grid, 2)
        self.assertEqual(radial.comparison_violation(data, 2.0, 1.0), 0.0)
        self.assertGreater(radial.comparison_violation(data, 0.1, 1.0), 0.0)


class TestGradV(unittest.TestCase):

    def setUp(self):
        self.grid = RadialGrid(1.0, 63)
        self.barrier = radial.supersolution_profile(self.grid, 1.0, 2, 1.0)

    def test_identity(self):
        for i in range(1, self.grid.size):
            r = self.grid.nodes[i]
            expected = 4.0 * r / (1.0 + r * r)
            self.assertAlmostEqual(radial.grad_v_magnitude(self.barrier, i), expected, places=12)

    def test_bound(self):
        self.assertLessEqual(radial.grad_v_max(self.barrier), radial.grad_v_bound(1.0, 1.0, 2, 1.0))
        self.assertEqual(radial.grad_v_bound(2.0, 1.5, 3, 0.5), 36.0)

    def test_origin(self):
        with self.assertRaises(SingularityError):
            radial.grad_v_magnitude(self.barrier, 0)
        with self.assertRaises(DomainError):
            radial.grad_v_magnitude(self.barrier, self.grid.size)

    def test_boundary_value(self):
        profile = MassProfile(self.grid, 2, self.grid.nodes ** 2 * 3.0)
        self.assertAlmostEqual(radial.grad_v_magnitude(profile, self.grid.size - 1), 3.0 / (2.0 * math.pi))


class TestDensityRecovery(unittest.TestCase):

    def test_uniform(self):
        grid = RadialGrid(1.0, 63)
        recovery = radial.recover_density(MassProfile(grid, 2, grid.nodes ** 2))
        self.assertTrue(np.allclose(recovery.values, 1.0 / math.pi, rtol=1e-10))
        self.assertEqual(recovery.clamped, 0.0)

    def test_supersolution(self):
        grid = RadialGrid(1.0, 1023)
        recovery = radial.recover_density(radial.supersolution_profile(grid, 1.0, 2, 1.0))
        self.assertAlmostEqual(recovery.values[-1], 2.0, delta=1e-4)
        self.assertAlmostEqual(recovery.values[0], 8.0, delta=1e-4)

    def test_clamp(self):
        grid = RadialGrid(1.0, 31)
        values = grid.nodes ** 2
        values[10] = values[12] + 0.1
        recovery = radial.recover_density(MassProfile(grid, 2, values))
        self.assertGreater(recovery.clamped, 0.0)
        self.assertTrue(np.all(recovery.values >= 0.0))

    def test_zero(self):
        grid = RadialGrid(1.0, 31)
        recovery = radial.recover_density(MassProfile(grid, 3, np.zeros(grid.size)))
        self.assertTrue(np.all(recovery.values == 0.0))

    def test_recovered_mass(self):
        grid = RadialGrid(1.0, 511)
        profile = radial.init_mass_profile(InitialData.gaussian(2.0, 0.2), grid, 2)
        self.assertAlmostEqual(radial.recovered_mass(profile), 2.0, delta=1e-3)


class TestSecondMoment(unittest.TestCase):

    def test_point_mass(self):
        grid = RadialGrid(1.0, 63)
        values = np.full(grid.size, 5.0)
        values[0] = 0.0
        self.assertAlmostEqual(radial.second_moment_of(MassProfile(grid, 2, values)), 0.0, places=12)

    def test_uniform_disk(self):
        grid = RadialGrid(1.0, 1023)
        profile = MassProfile(grid, 2, 3.0 * grid.nodes ** 2)
        self.assertAlmostEqual(radial.second_moment_of(profile), 1.5, delta=1e-5)

    def test_zero(self):
        grid = RadialGrid(1.0, 31)
        self.assertEqual(radial.second_moment_of(MassProfile(grid, 2, np.zeros(grid.size))), 0.0)


class TestSteadyResidual(unittest.TestCase):

    def test_order(self):
        study = radial.residual_order()
        self.assertEqual(study.sizes, [256, 512, 1024])
        self.assertTrue(all(order >= 1.8 for order in study.orders))
        self.assertTrue(all(a > b for a, b in zip(study.residuals, study.residuals[1:])))


@pytest.mark.parametrize('n,k,chi', [(2, 1.0, 1.0), (3, 2.5, 0.5), (4, 0.5, 2.0)])
def test_supersolution_below_ceiling(n, k, chi):
    grid = RadialGrid(3.0, 127)
    profile = radial.supersolution_profile(grid, k, n, chi)
    ceiling = 2.0 * n * n * math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) / chi
    assert np.all(profile.values < ceiling)
    assert profile.monotonicity_violation() == 0.0
