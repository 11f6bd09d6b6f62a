"""Command line surface.

usage::

    sqcontrol solve <config> [--out-dir DIR] [--seed N] [--refine K]
    sqcontrol verify <config> <control.csv> [--out-dir DIR] [--refine K]
    sqcontrol check <config> [--which SUITE] [--refine K]

Exit codes: 0 success, 1 failed verification, 2 solver stopped without
convergence, 64 config error, 65 invalid control file, 70 numerical
failure.
"""

import argparse
import logging
import sys

import pandas as pd

from .analysis import full_report
from .checks import SUITES, run_suite
from .dynamics import propagate_forward
from .errors import ConfigError, ControlFileError, SQControlError
from .optimizer import STATUS_CONVERGED, multistart, solve
from .protocol import Protocol
from .solution import CheckOutput, SolveOutput, VerifyOutput
from .version_info import VERSION

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG = 64
EXIT_CONTROL = 65
EXIT_NUMERICAL = 70


def load_protocol(args):
    """Protocol of the config named on the command line, with the
    command line overrides applied.

    :raises ConfigError: for an unreadable or invalid config
    """
    try:
        protocol = Protocol(args.config)
    except OSError as err:
        raise ConfigError(f'cannot read config: {err.strerror}') from None
    except (TypeError, KeyError) as err:
        raise ConfigError(str(err)) from None
    if getattr(args, 'seed', None) is not None:
        protocol.set_seed(args.seed)
    return protocol


def load_problem(protocol, refine, space=True):
    """Problem instance refined ``refine`` times, in time only when
    ``space`` is false.

    :raises ConfigError: if a profile rejects its parameters
    """
    try:
        return protocol.generate_problem(refine, space)
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None


def output_dir(protocol, args):
    return args.out_dir or protocol.params['output']['dir']


def read_control(path, spec):
    """Control values from the ``u`` column of a CSV file.

    :raises ControlFileError: if the file is unreadable, has no ``u``
        column, or its length or values do not fit the problem
    :rtype: Control
    """
    try:
        table = pd.read_csv(path)
    except (OSError, ValueError) as err:
        raise ControlFileError(f'cannot read {path}: {err}') from None
    if 'u' not in table.columns:
        raise ControlFileError(f'{path} has no column "u"')
    values = table['u'].to_numpy(dtype=float)
    if len(values) != spec.tgrid.n_t:
        raise ControlFileError(f'{path} has {len(values)} values, the '
                               f'problem has n_t = {spec.tgrid.n_t}')
    try:
        return spec.control(values)
    except ValueError as err:
        raise ControlFileError(str(err)) from None


def cmd_solve(args):
    protocol = load_protocol(args)
    spec = load_problem(protocol, args.refine)
    opts = protocol.generate_solver_options()
    if protocol.n_starts > 1:
        result = multistart(spec, opts, protocol.n_starts)
    else:
        result = solve(spec, opts)
    psi = propagate_forward(spec, result.u_opt)
    report = full_report(spec, result.u_opt,
                         protocol.generate_analysis_options())
    SolveOutput(spec, result, psi, report,
                protocol.params['output']['plots']).output(
                    output_dir(protocol, args))
    print(f'{spec.name}: {result.status} after {result.iterations} '
          f'iterations, cost {result.final_cost:.10e}')
    if result.status != STATUS_CONVERGED:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_verify(args):
    protocol = load_protocol(args)
    spec = load_problem(protocol, args.refine)
    u = read_control(args.control, spec)
    report = full_report(spec, u, protocol.generate_analysis_options())
    VerifyOutput(spec, report, protocol.params['output']['plots']).output(
        output_dir(protocol, args))
    for key, passed in report.verdicts.items():
        print(f'{key:24s} {"pass" if passed else "FAIL"}')
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_check(args):
    protocol = load_protocol(args)
    levels = range(args.refine + 1)
    specs = [load_problem(protocol, level) for level in levels]
    # the Goh gap is a time discretization error
    time_specs = [load_problem(protocol, level, space=False)
                  for level in levels]
    suites = SUITES if args.which == 'all' else (args.which,)
    analysis = protocol.params['analysis']
    table = pd.concat(
        [run_suite(suite, time_specs if suite == 'goh' else specs,
                   analysis['seed'], analysis['commutator'])
         for suite in suites], ignore_index=True)
    print(table.to_string(index=False))
    CheckOutput(table).output(output_dir(protocol, args))
    return EXIT_OK if table['passed'].all() else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(
        prog='sqcontrol',
        description='Optimal control of the bilinear Schroedinger '
                    'equation: solve, verify optimality, check '
                    'derivatives.')
    parser.add_argument('--version', action='version', version=VERSION)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true',
                           help='log every iteration')
    verbosity.add_argument('-q', '--quiet', action='store_true',
                           help='log warnings and errors only')
    commands = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('config', help='JSON config file')
    common.add_argument('--out-dir', help='overrides output.dir')

    p = commands.add_parser('solve', parents=[common],
                            help='run the projected gradient method')
    p.add_argument('--seed', type=int, help='overrides every seed')
    p.add_argument('--refine', type=int, default=0,
                   help='number of grid doublings')
    p.set_defaults(handler=cmd_solve)

    p = commands.add_parser('verify', parents=[common],
                            help='check optimality of a given control')
    p.add_argument('control', help='CSV file with a column "u"')
    p.add_argument('--seed', type=int, help='overrides every seed')
    p.add_argument('--refine', type=int, default=0,
                   help='number of grid doublings')
    p.set_defaults(handler=cmd_verify)

    p = commands.add_parser('check', parents=[common],
                            help='run the verification suites')
    p.add_argument('--which', choices=SUITES + ('all',), default='all')
    p.add_argument('--seed', type=int, help='overrides every seed')
    p.add_argument('--refine', type=int, default=1,
                   help='number of refinement levels after the config grid')
    p.set_defaults(handler=cmd_check)
    return parser


def configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s: '
                               '%(message)s')


def main(argv=None):
    """Runs one command and returns its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args)
    if args.refine < 0:
        logger.error('--refine should be at least 0')
        return EXIT_CONFIG
    try:
        return args.handler(args)
    except ConfigError as err:
        logger.error('config %s: %s', args.config, err)
        return EXIT_CONFIG
    except ControlFileError as err:
        logger.error('control: %s', err)
        return EXIT_CONTROL
    except SQControlError as err:
        logger.error('numerical failure: %s', err)
        return EXIT_NUMERICAL


def run():
    sys.exit(main())


if __name__ == '__main__':
    run()
