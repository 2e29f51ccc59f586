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


import argparse
import logging
import sys
from typing import List, Optional

import pykslab
from pykslab.errors import ConfigError, DomainError, HypothesisViolatedError, InfeasibleError, KSLabError
from pykslab.harness import EXIT_CONFIG, EXIT_INFEASIBLE, run_scenario
from pykslab.scenario import SUITES, SWEEP, VERIFY, ScenarioConfig

logger = logging.getLogger('pykslab')


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    description = 'Numerical laboratory for chemotaxis with variable sensitivity.'
    parser = argparse.ArgumentParser(prog='pykslab', description=description)
    parser.add_argument('-v', '--verbose', action='count', default=0, help='verbosity mode (repeat for debug)')
    parser.add_argument('--log-file', help='also write log records to this file')
    parser.add_argument('--version', action='version', version='%(prog)s {}'.format(pykslab.__version__))

    commands = parser.add_subparsers(dest='command')
    commands.required = True

    run = commands.add_parser('run', help='run a scenario document')
    run.add_argument('config', help='scenario document filepath')

    sweep = commands.add_parser('sweep', help='run a sweep-mass scenario document')
    sweep.add_argument('config', help='scenario document filepath')
    sweep.add_argument('--workers', type=int, help='worker processes (overrides sweep.parallelism)')

    verify = commands.add_parser('verify', help='run the verification suites')
    verify.add_argument('--suite', action='append', choices=SUITES, help='suite to run (repeatable)')
    verify.add_argument('--draws', type=int, help='random draws per suite')

    for command in (run, sweep, verify):
        command.add_argument('--seed', type=int, help='seed (overrides the document)')
        command.add_argument('--out', help='output directory (overrides PYKSLAB_OUT and the document)')

    return parser.parse_args(argv)


def configure_logging(verbose: int, log_file: Optional[str] = None) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    if log_file:
        handler = logging.FileHandler(log_file)
        handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
        logging.getLogger().addHandler(handler)


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    if args.command == 'verify':
        document = {'scenario': VERIFY, 'verify': {'suites': args.suite or list(SUITES)}}
        if args.draws is not None:
            document['verify']['draws'] = args.draws
        return ScenarioConfig(document, seed=args.seed, output=args.out)
    workers = getattr(args, 'workers', None)
    config = ScenarioConfig.load(args.config, seed=args.seed, output=args.out, workers=workers)
    if args.command == 'sweep' and config.scenario != SWEEP:
        raise ConfigError('the sweep command needs a {} document'.format(SWEEP), key='scenario')
    return config


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    configure_logging(args.verbose, args.log_file)
    try:
        config = load_config(args)
        return run_scenario(config)
    except ConfigError as e:
        logger.error('invalid scenario: %s', e)
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, HypothesisViolatedError) as e:
        logger.error('infeasible: %s', e)
        print('infeasible: {}'.format(e), file=sys.stderr)
        return EXIT_INFEASIBLE
    except DomainError as e:
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG
    except KSLabError as e:
        print('failure: {}'.format(e), file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == '__main__':
    sys.exit(main())
