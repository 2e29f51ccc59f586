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
import os
from typing import Dict, List, Mapping, Optional, Sequence, Union

from pykslab.chi import ChiProfile
from pykslab.errors import ConfigError, DomainError, RegimeError
from pykslab.model import critical_mass_blowup, critical_mass_global
from pykslab.parser import MassMultiple, load_document, parse_document
from pykslab.radial import InitialData, RadialGrid
from pykslab.solver import SolverConfig

logger = logging.getLogger(__name__)

SIMULATE = 'simulate-radial'
VERIFY = 'verify-inequalities'
CLASSIFY = 'classify'
SWEEP = 'sweep-mass'
SCENARIOS = (SIMULATE, VERIFY, CLASSIFY, SWEEP)

SUITES = ('identity', 'monotone-bound', 'neta', 'lemma32', 'steady-residual')

OUTPUT_ENV = 'PYKSLAB_OUT'
DEFAULT_OUTPUT = 'out'

SCHEMA = {
    '': {'scenario', 'model', 'domain', 'initial', 'time', 'detectors', 'classify',
         'sweep', 'verify', 'output', 'seed', 'samples'},
    'model': {'n', 'chi', 'p'},
    'domain': {'L', 'N'},
    'initial': {'kind', 'mass', 'width', 'r_in', 'r_out', 'radii', 'values'},
    'time': {'dt_init', 'dt_min', 't_end'},
    'detectors': {'blowup_factor', 'safety'},
    'classify': {'m0', 'radial', 'monotone_samples'},
    'sweep': {'masses', 'parallelism'},
    'verify': {'suites', 'draws'},
}

Number = Union[int, float]


def _join(path: str, key: str) -> str:
    return '{}.{}'.format(path, key) if path else key


def _section(doc: Mapping[str, object], name: str) -> Dict[str, object]:
    section = doc.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError('expected an object', key=name)
    unknown = sorted(set(section) - SCHEMA[name])
    if unknown:
        raise ConfigError('unknown key', key=_join(name, unknown[0]))
    return section


def _number(section: Mapping[str, object], path: str, key: str, default: Optional[Number] = None,
        integer: bool = False) -> Optional[Number]:
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError('expected a number, got {!r}'.format(value), key=_join(path, key))
    if integer and not isinstance(value, int):
        raise ConfigError('expected an integer, got {!r}'.format(value), key=_join(path, key))
    return value


def _required(section: Mapping[str, object], path: str, key: str) -> object:
    if key not in section:
        raise ConfigError('missing required key', key=_join(path, key))
    return section[key]


def _solver_key(message: str) -> str:
    for name, key in (('blowup_factor', 'detectors.blowup_factor'), ('safety', 'detectors.safety'),
                      ('samples', 'samples'), ('t_end', 'time.t_end'), ('dt_', 'time')):
        if name in message:
            return key
    return 'model.chi'


def _mass_value(value: object, key: str) -> Union[float, MassMultiple]:
    if isinstance(value, MassMultiple):
        if not value.factor >= 0.0:
            raise ConfigError('mass multiple must be nonnegative', key=key)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError('expected a mass or a threshold multiple, got {!r}'.format(value), key=key)
    if value < 0.0:
        raise ConfigError('mass must be nonnegative, got {}'.format(value), key=key)
    return float(value)


class ScenarioConfig(object):
    '''Validated scenario document.

    Every precondition of the modules the scenario uses is checked on
    construction; threshold multiples are resolved to absolute masses.

    Args:
        document: Parsed scenario document.
        seed: Overrides the top-level `seed`.
        output: Overrides the output directory.
        workers: Overrides `sweep.parallelism`.
        environ: Environment consulted for PYKSLAB_OUT.

    Attributes:
        scenario (str): Scenario name.
        n (int): Ambient dimension.
        chi (ChiProfile): Coefficient profile.
        p (Optional[float]): Exponent of the |x|^{p-2} weight.
        mass (Optional[float]): Total mass in absolute units.
        mass_spec (object): Mass as written in the document.
        masses (List[float]): Sweep masses in absolute units.
        threshold (Optional[float]): Threshold that multiples resolve against.
        output (str): Output directory.
        seed (int): Seed of every random draw.
    '''

    def __init__(self,
            document: object,
            seed: Optional[int] = None,
            output: Optional[str] = None,
            workers: Optional[int] = None,
            environ: Optional[Mapping[str, str]] = None) -> None:
        if not isinstance(document, dict):
            raise ConfigError('scenario document must be an object')
        unknown = sorted(set(document) - SCHEMA[''])
        if unknown:
            raise ConfigError('unknown key', key=unknown[0])
        self.document = document
        environ = os.environ if environ is None else environ

        self.scenario = _required(document, '', 'scenario')
        if self.scenario not in SCENARIOS:
            raise ConfigError('expected one of {}, got {!r}'.format(', '.join(SCENARIOS), self.scenario),
                              key='scenario')
        self.seed = seed if seed is not None else _number(document, '', 'seed', 0, integer=True)
        self.samples = _number(document, '', 'samples', 200, integer=True)
        self.output = output or environ.get(OUTPUT_ENV) or document.get('output') or DEFAULT_OUTPUT
        if not isinstance(self.output, str):
            raise ConfigError('expected a directory path', key='output')

        self.mass = None  # type: Optional[float]
        self.mass_spec = None  # type: object
        self.masses = []  # type: List[float]
        self.threshold = None  # type: Optional[float]
        self.parallelism = 1

        if self.scenario == VERIFY:
            self._build_verify(workers)
            return
        self._build_model()
        if self.scenario == CLASSIFY:
            self._build_classify()
            return
        self._build_radial()
        if self.scenario == SWEEP:
            self._build_sweep(workers)
        logger.debug('validated %s scenario', self.scenario)

    @classmethod
    def load(cls, path: str, **overrides) -> 'ScenarioConfig':
        '''Reads, parses and validates the scenario document at `path`.'''
        return cls(load_document(path), **overrides)

    @classmethod
    def from_text(cls, text: str, **overrides) -> 'ScenarioConfig':
        return cls(parse_document(text), **overrides)

    def _build_verify(self, workers: Optional[int]) -> None:
        section = _section(self.document, 'verify')
        suites = section.get('suites', list(SUITES))
        if not isinstance(suites, list) or not suites or any(s not in SUITES for s in suites):
            raise ConfigError('expected a nonempty list drawn from {}'.format(', '.join(SUITES)),
                              key='verify.suites')
        self.suites = suites
        self.draws = _number(section, 'verify', 'draws', 10 ** 5, integer=True)
        if self.draws < 2:
            raise ConfigError('need at least 2 draws', key='verify.draws')

    def _build_model(self) -> None:
        section = _section(self.document, 'model')
        self.n = _number(section, 'model', 'n', integer=True)
        if self.n is None:
            raise ConfigError('missing required key', key='model.n')
        if self.n < 2:
            raise ConfigError('dimension must be >= 2, got {}'.format(self.n), key='model.n')
        try:
            self.chi = ChiProfile.from_document(_required(section, 'model', 'chi'), key='model.chi')
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e), key='model.chi')
        self.p = _number(section, 'model', 'p')
        if self.p is None and self.n > 2:
            law = self.chi.power_law()
            self.p = law[1] if law is not None else None
        if self.n > 2 and (self.p is None or not 2.0 <= self.p <= self.n):
            raise ConfigError('need 2 <= p <= n for n >= 3, got {}'.format(self.p), key='model.p')

    @property
    def simulates(self) -> bool:
        '''True if the radial solver applies, i.e. chi = strength |x|^{n-2}.'''
        law = self.chi.power_law()
        return law is not None and law[1] == self.n

    @property
    def strength(self) -> float:
        '''Returns the coefficient strength used for thresholds.'''
        law = self.chi.power_law()
        if law is not None:
            return law[0]
        return self.chi.chi_at_origin

    def _build_radial(self) -> None:
        if self.scenario == SIMULATE and not self.simulates:
            raise ConfigError('radial runs need chi = strength |x|^(n-2)', key='model.chi')
        try:
            self.threshold = critical_mass_global(self.n, self.strength)
        except DomainError as e:
            raise ConfigError(str(e), key='model.chi')

        domain = _section(self.document, 'domain')
        L = _number(domain, 'domain', 'L', 1.0)
        N = _number(domain, 'domain', 'N', 512, integer=True)
        try:
            self.grid = RadialGrid(L, N)
        except DomainError as e:
            raise ConfigError(str(e), key='domain')

        time = _section(self.document, 'time')
        detectors = _section(self.document, 'detectors')
        try:
            self.solver = SolverConfig(
                chi=self.strength,
                t_end=_number(time, 'time', 't_end', 1.0),
                dt_init=_number(time, 'time', 'dt_init', 1e-4),
                dt_min=_number(time, 'time', 'dt_min', 1e-12),
                blowup_factor=_number(detectors, 'detectors', 'blowup_factor', 1e3),
                safety=_number(detectors, 'detectors', 'safety', 0.9),
                samples=self.samples)
        except DomainError as e:
            raise ConfigError(str(e), key=_solver_key(str(e)))

        self.initial_doc = _section(self.document, 'initial')
        _required(self.initial_doc, 'initial', 'kind')
        if self.scenario == SIMULATE:
            self.mass_spec = _mass_value(_required(self.initial_doc, 'initial', 'mass'), 'initial.mass')
            self.mass = self.resolve(self.mass_spec)
        self.initial = self.initial_data(self.mass if self.mass is not None else 1.0)

    def _build_classify(self) -> None:
        initial = _section(self.document, 'initial')
        section = _section(self.document, 'classify')
        self.initial_doc = initial
        self.mass_spec = _mass_value(_required(initial, 'initial', 'mass'), 'initial.mass')
        if isinstance(self.mass_spec, MassMultiple):
            try:
                self.threshold = critical_mass_blowup(self.n, self.strength, self.p)
            except RegimeError:
                raise ConfigError('no mass threshold when p < n; give an absolute mass', key='initial.mass')
            except DomainError as e:
                raise ConfigError(str(e), key='model.chi')
        self.mass = self.resolve(self.mass_spec)
        if not self.mass > 0.0:
            raise ConfigError('mass must be positive', key='initial.mass')
        self.m0 = _number(section, 'classify', 'm0')
        if self.m0 is not None and not self.m0 > 0.0:
            raise ConfigError('second moment must be positive', key='classify.m0')
        self.radial = section.get('radial', False)
        if not isinstance(self.radial, bool):
            raise ConfigError('expected true or false', key='classify.radial')
        self.monotone_samples = _number(section, 'classify', 'monotone_samples', 4096, integer=True)
        if self.monotone_samples < 2:
            raise ConfigError('need at least 2 samples', key='classify.monotone_samples')

    def _build_sweep(self, workers: Optional[int]) -> None:
        section = _section(self.document, 'sweep')
        masses = _required(section, 'sweep', 'masses')
        if not isinstance(masses, list) or not masses:
            raise ConfigError('expected a nonempty list of masses', key='sweep.masses')
        specs = [_mass_value(m, 'sweep.masses[{}]'.format(i)) for i, m in enumerate(masses)]
        self.masses = [self.resolve(m) for m in specs]
        if any(b <= a for a, b in zip(self.masses[:-1], self.masses[1:])):
            raise ConfigError('masses must be strictly increasing', key='sweep.masses')
        self.mass_spec = specs
        parallelism = workers if workers is not None else _number(section, 'sweep', 'parallelism', 1, integer=True)
        if parallelism < 1:
            raise ConfigError('need at least one worker', key='sweep.parallelism')
        self.parallelism = parallelism

    def resolve(self, mass: Union[float, MassMultiple]) -> float:
        '''Returns `mass` in absolute units.'''
        if isinstance(mass, MassMultiple):
            return mass.resolve(self.threshold)
        return float(mass)

    def initial_data(self, mass: float) -> InitialData:
        '''Returns the initial data of the document with the given mass.'''
        return InitialData.from_document(self.initial_doc, mass)

    def to_dict(self) -> Dict[str, object]:
        '''Returns the configuration echo with masses in absolute units.'''
        doc = {'scenario': self.scenario, 'seed': self.seed, 'output': self.output}
        if self.scenario == VERIFY:
            doc['verify'] = {'suites': list(self.suites), 'draws': self.draws}
            return doc
        doc['model'] = {'n': self.n, 'chi': self.chi.to_document(), 'p': self.p}
        doc['threshold'] = self.threshold
        if self.scenario == CLASSIFY:
            doc['mass'] = self.mass
            doc['mass_spec'] = str(self.mass_spec)
            doc['classify'] = {'m0': self.m0, 'radial': self.radial, 'monotone_samples': self.monotone_samples}
            return doc
        doc['domain'] = {'L': self.grid.L, 'N': self.grid.N}
        doc['initial'] = self.initial_data(self.mass if self.mass is not None else 0.0).to_document()
        doc['solver'] = self.solver.to_dict()
        if self.scenario == SWEEP:
            doc['sweep'] = {'masses': list(self.masses), 'parallelism': self.parallelism}
        else:
            doc['mass'] = self.mass
            doc['mass_spec'] = str(self.mass_spec)
        return doc

    def __repr__(self) -> str:
        return 'ScenarioConfig(scenario={}, seed={})'.format(self.scenario, self.seed)


class SweepSpec(object):
    '''Mass grid and worker count of a sweep.

    Args:
        base: The validated sweep-mass scenario.
        mass_grid: Total masses, strictly increasing; defaults to the scenario's.
        parallelism: Worker count; defaults to the scenario's.

    Raises:
        ConfigError: If the grid is empty or not strictly increasing.
    '''

    def __init__(self, base: ScenarioConfig, mass_grid: Optional[Sequence[float]] = None,
            parallelism: Optional[int] = None) -> None:
        self.base = base
        self.mass_grid = [float(m) for m in (base.masses if mass_grid is None else mass_grid)]
        self.parallelism = base.parallelism if parallelism is None else int(parallelism)
        if not self.mass_grid:
            raise ConfigError('mass grid is empty', key='sweep.masses')
        if any(b <= a for a, b in zip(self.mass_grid[:-1], self.mass_grid[1:])):
            raise ConfigError('masses must be strictly increasing', key='sweep.masses')
        if self.parallelism < 1:
            raise ConfigError('need at least one worker', key='sweep.parallelism')

    def __repr__(self) -> str:
        return 'SweepSpec(cells={}, parallelism={})'.format(len(self.mass_grid), self.parallelism)
