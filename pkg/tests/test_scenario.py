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
import os
import unittest

import pytest

from pykslab.parser import MassMultiple
from pykslab.scenario import (
    CLASSIFY, DEFAULT_OUTPUT, OUTPUT_ENV, SIMULATE, SUITES, SWEEP, VERIFY, ScenarioConfig, SweepSpec)
from pykslab.errors import ConfigError


SCENARIOS_DIR = os.path.join(os.path.dirname(__file__), '..', 'scenarios')

SIMULATE_TEXT = '''
// planar bump
{
  "scenario": "simulate-radial",
  "model": {"n": 2, "chi": 1.0},
  "domain": {"L": 1.0, "N": 255},
  "initial": {"kind": "gaussian", "mass": 0.5x, "width": 0.3},
  "time": {"t_end": 0.01},
  "output": "from-document"
}
'''


def _simulate(**sections):
    doc = {
        'scenario': 'simulate-radial',
        'model': {'n': 2, 'chi': 1.0},
        'domain': {'N': 255},
        'initial': {'kind': 'gaussian', 'mass': MassMultiple(0.5), 'width': 0.3},
    }
    doc.update(sections)
    return doc


class TestScenarioConfig(unittest.TestCase):

    def assertConfigError(self, document, key, **overrides):
        with self.assertRaises(ConfigError) as context:
            ScenarioConfig(document, environ={}, **overrides)
        self.assertEqual(context.exception.key, key)
        return context.exception

    def test_simulate(self):
        config = ScenarioConfig.from_text(SIMULATE_TEXT, environ={})
        self.assertEqual(config.scenario, SIMULATE)
        self.assertEqual(config.n, 2)
        self.assertTrue(config.simulates)
        self.assertAlmostEqual(config.threshold, 8.0 * math.pi)
        self.assertAlmostEqual(config.mass, 4.0 * math.pi)
        self.assertEqual(str(config.mass_spec), '0.5x')
        self.assertEqual(config.grid.N, 255)
        self.assertEqual(config.solver.t_end, 0.01)
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.samples, 200)
        self.assertEqual(config.initial.kind, 'gaussian')

    def test_output_precedence(self):
        self.assertEqual(ScenarioConfig.from_text(SIMULATE_TEXT, environ={}).output, 'from-document')
        env = {OUTPUT_ENV: 'from-env'}
        self.assertEqual(ScenarioConfig.from_text(SIMULATE_TEXT, environ=env).output, 'from-env')
        self.assertEqual(ScenarioConfig.from_text(SIMULATE_TEXT, environ=env, output='flag').output, 'flag')
        self.assertEqual(ScenarioConfig(_simulate(), environ={}).output, DEFAULT_OUTPUT)

    def test_seed_override(self):
        self.assertEqual(ScenarioConfig(_simulate(seed=4), environ={}).seed, 4)
        self.assertEqual(ScenarioConfig(_simulate(seed=4), environ={}, seed=9).seed, 9)

    def test_unknown_keys(self):
        self.assertConfigError(_simulate(domain={'M': 3}), 'domain.M')
        self.assertConfigError(_simulate(extra=1), 'extra')
        self.assertConfigError(_simulate(time={'dt': 1e-3}), 'time.dt')

    def test_not_a_document(self):
        with self.assertRaises(ConfigError):
            ScenarioConfig([1, 2], environ={})

    def test_scenario_name(self):
        doc = _simulate()
        del doc['scenario']
        self.assertConfigError(doc, 'scenario')
        self.assertConfigError(_simulate(scenario='simulate'), 'scenario')

    def test_model_errors(self):
        self.assertConfigError(_simulate(model={'chi': 1.0}), 'model.n')
        self.assertConfigError(_simulate(model={'n': 1, 'chi': 1.0}), 'model.n')
        self.assertConfigError(_simulate(model={'n': 2.5, 'chi': 1.0}), 'model.n')
        self.assertConfigError(_simulate(model={'n': 2}), 'model.chi')
        self.assertConfigError(_simulate(model={'n': 2, 'chi': -1.0}), 'model.chi')
        self.assertConfigError(_simulate(model={'n': 2, 'chi': {'kind': 'cubic'}}), 'model.chi')

    def test_exponent_range(self):
        model = {'n': 3, 'chi': {'kind': 'power', 'strength': 1.0, 'exponent': 3}, 'p': 4}
        self.assertConfigError(_simulate(model=model), 'model.p')
        model = {'n': 3, 'chi': {'kind': 'saturating'}}
        self.assertConfigError(_simulate(model=model), 'model.p')

    def test_simulate_needs_power_law(self):
        self.assertConfigError(_simulate(model={'n': 2, 'chi': {'kind': 'saturating'}}), 'model.chi')
        model = {'n': 3, 'chi': {'kind': 'power', 'strength': 1.0, 'exponent': 2}}
        self.assertConfigError(_simulate(model=model), 'model.chi')

    def test_three_dimensional_simulate(self):
        model = {'n': 3, 'chi': {'kind': 'power', 'strength': 2.0, 'exponent': 3}}
        config = ScenarioConfig(_simulate(model=model), environ={})
        self.assertEqual(config.p, 3)
        self.assertAlmostEqual(config.strength, 2.0)
        self.assertAlmostEqual(config.threshold, 12.0 * math.pi)
        self.assertAlmostEqual(config.mass, 6.0 * math.pi)

    def test_mass_errors(self):
        initial = {'kind': 'gaussian', 'mass': -1.0, 'width': 0.3}
        self.assertConfigError(_simulate(initial=initial), 'initial.mass')
        initial = {'kind': 'gaussian', 'mass': 'heavy', 'width': 0.3}
        self.assertConfigError(_simulate(initial=initial), 'initial.mass')
        initial = {'kind': 'gaussian', 'width': 0.3}
        self.assertConfigError(_simulate(initial=initial), 'initial.mass')
        self.assertConfigError(_simulate(initial={'mass': 1.0}), 'initial.kind')

    def test_initial_errors(self):
        self.assertConfigError(_simulate(initial={'kind': 'gaussian', 'mass': 1.0}), 'initial.width')
        self.assertConfigError(_simulate(initial={'kind': 'gaussian', 'mass': 1.0, 'width': -0.1}), 'initial')
        self.assertConfigError(_simulate(initial={'kind': 'cone', 'mass': 1.0}), 'initial.kind')

    def test_grid_and_solver_errors(self):
        self.assertConfigError(_simulate(domain={'N': 1}), 'domain')
        self.assertConfigError(_simulate(domain={'L': -1.0}), 'domain')
        self.assertConfigError(_simulate(domain={'N': 'many'}), 'domain.N')
        self.assertConfigError(_simulate(time={'t_end': 0.0}), 'time.t_end')
        self.assertConfigError(_simulate(detectors={'blowup_factor': 10}), 'detectors.blowup_factor')
        self.assertConfigError(_simulate(detectors={'safety': 1.5}), 'detectors.safety')
        self.assertConfigError(_simulate(samples=50), 'samples')

    def test_to_dict(self):
        doc = ScenarioConfig.from_text(SIMULATE_TEXT, environ={}).to_dict()
        self.assertEqual(doc['scenario'], SIMULATE)
        self.assertAlmostEqual(doc['mass'], 4.0 * math.pi)
        self.assertEqual(doc['mass_spec'], '0.5x')
        self.assertEqual(doc['domain'], {'L': 1.0, 'N': 255})
        self.assertEqual(doc['model']['n'], 2)
        self.assertIn('solver', doc)
        self.assertEqual(doc['initial']['kind'], 'gaussian')


class TestClassifyScenario(unittest.TestCase):

    def test_multiple_resolves_against_blowup_threshold(self):
        doc = {
            'scenario': 'classify',
            'model': {'n': 3, 'chi': {'kind': 'power', 'strength': 1.0, 'exponent': 3}},
            'initial': {'mass': MassMultiple(1.25)},
            'classify': {'radial': True},
        }
        config = ScenarioConfig(doc, environ={})
        self.assertEqual(config.scenario, CLASSIFY)
        self.assertAlmostEqual(config.threshold, 32.0 * math.pi)
        self.assertAlmostEqual(config.mass, 40.0 * math.pi)
        self.assertTrue(config.radial)
        self.assertIsNone(config.m0)
        self.assertEqual(config.monotone_samples, 4096)
        self.assertEqual(config.to_dict()['mass_spec'], '1.25x')

    def test_multiple_needs_a_threshold(self):
        doc = {
            'scenario': 'classify',
            'model': {'n': 4, 'chi': {'kind': 'power', 'strength': 1.0, 'exponent': 3}},
            'initial': {'mass': MassMultiple(1.0)},
        }
        with self.assertRaises(ConfigError) as context:
            ScenarioConfig(doc, environ={})
        self.assertEqual(context.exception.key, 'initial.mass')

        doc['initial'] = {'mass': 50.0}
        doc['classify'] = {'m0': 0.5}
        config = ScenarioConfig(doc, environ={})
        self.assertEqual(config.p, 3)
        self.assertEqual(config.mass, 50.0)

    def test_classify_errors(self):
        base = {'scenario': 'classify', 'model': {'n': 2, 'chi': 1.0}}
        for extra, key in (({'initial': {'mass': 0.0}}, 'initial.mass'),
                           ({'initial': {'mass': 1.0}, 'classify': {'m0': -1.0}}, 'classify.m0'),
                           ({'initial': {'mass': 1.0}, 'classify': {'radial': 1}}, 'classify.radial'),
                           ({'initial': {'mass': 1.0}, 'classify': {'monotone_samples': 1}},
                            'classify.monotone_samples')):
            doc = dict(base, **extra)
            with self.assertRaises(ConfigError, msg=key) as context:
                ScenarioConfig(doc, environ={})
            self.assertEqual(context.exception.key, key)

    def test_classify_accepts_non_power_profiles(self):
        doc = {'scenario': 'classify', 'model': {'n': 2, 'chi': {'kind': 'saturating'}},
               'initial': {'mass': 30.0}}
        config = ScenarioConfig(doc, environ={})
        self.assertFalse(config.radial)
        self.assertIsNone(config.threshold)


class TestVerifyScenario(unittest.TestCase):

    def test_defaults(self):
        config = ScenarioConfig({'scenario': 'verify-inequalities'}, environ={})
        self.assertEqual(config.scenario, VERIFY)
        self.assertEqual(config.suites, list(SUITES))
        self.assertEqual(config.draws, 10 ** 5)
        self.assertEqual(config.to_dict()['verify']['draws'], 10 ** 5)

    def test_errors(self):
        for section, key in (({'draws': 1}, 'verify.draws'),
                             ({'suites': []}, 'verify.suites'),
                             ({'suites': ['identity', 'triangle']}, 'verify.suites'),
                             ({'rounds': 3}, 'verify.rounds')):
            with self.assertRaises(ConfigError, msg=key) as context:
                ScenarioConfig({'scenario': 'verify-inequalities', 'verify': section}, environ={})
            self.assertEqual(context.exception.key, key)


def _sweep(masses, **kwargs):
    doc = {
        'scenario': 'sweep-mass',
        'model': {'n': 2, 'chi': 1.0},
        'domain': {'N': 127},
        'initial': {'kind': 'gaussian', 'width': 0.3},
        'sweep': {'masses': masses},
    }
    doc.update(kwargs)
    return doc


def test_sweep_masses_resolve():
    config = ScenarioConfig(_sweep([MassMultiple(0.5), 6.0 * math.pi, MassMultiple(1.1)]), environ={})
    assert config.scenario == SWEEP
    assert config.masses == pytest.approx([4.0 * math.pi, 6.0 * math.pi, 8.8 * math.pi])
    assert config.parallelism == 1


@pytest.mark.parametrize('masses', [[1.0, 1.0], [2.0, 1.0], [], [MassMultiple(1.0), 1.0]])
def test_sweep_masses_must_increase(masses):
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig(_sweep(masses), environ={})
    assert excinfo.value.key == 'sweep.masses'


def test_sweep_workers_override():
    doc = _sweep([1.0, 2.0], sweep={'masses': [1.0, 2.0], 'parallelism': 3})
    assert ScenarioConfig(doc, environ={}).parallelism == 3
    assert ScenarioConfig(doc, environ={}, workers=2).parallelism == 2
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig(doc, environ={}, workers=0)
    assert excinfo.value.key == 'sweep.parallelism'


def test_sweep_spec():
    config = ScenarioConfig(_sweep([1.0, 2.0, 3.0]), environ={})
    spec = SweepSpec(config)
    assert spec.mass_grid == [1.0, 2.0, 3.0]
    assert spec.parallelism == 1
    assert SweepSpec(config, mass_grid=[0.5], parallelism=4).parallelism == 4
    for kwargs in ({'mass_grid': []}, {'mass_grid': [2.0, 1.0]}, {'parallelism': 0}):
        with pytest.raises(ConfigError):
            SweepSpec(config, **kwargs)


@pytest.mark.parametrize('name', sorted(os.listdir(SCENARIOS_DIR)))
def test_bundled_scenarios_validate(name):
    config = ScenarioConfig.load(os.path.join(SCENARIOS_DIR, name), environ={})
    assert config.scenario in (SIMULATE, CLASSIFY, VERIFY, SWEEP)
