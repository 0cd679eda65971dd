#!/usr/bin/env python

# =============================================================================
# IMPORTS
# =============================================================================
import argparse
import logging
import sys
import textwrap

from qkdsim.errors import QkdError
from qkdsim.lab import run_scenario, sweep
from qkdsim.scripts.useful_functions import read_in_scenario, \
    write_out_report, write_out_bundle, write_out_transcripts

logger = logging.getLogger(__name__)

# =============================================================================
# FUNCTIONS
# =============================================================================


def add_common_arguments(parser):
    parser.add_argument(
        '--scenario',
        type=str,
        metavar='FILE',
        help=textwrap.dedent(('Flat key = value scenario file.\n') +
                             ('  Default: the built in SARG04 scenario')),
        default=None)

    parser.add_argument(
        '--set',
        dest='overrides',
        action='append',
        metavar='KEY=VALUE',
        help=textwrap.dedent(('Override one scenario value, e.g.\n') +
                             ('  --set eve.kind=intercept. Repeatable.')),
        default=[])

    parser.add_argument(
        '--out',
        dest='output_dir',
        type=str,
        metavar='DIR',
        required=True,
        help='Directory in which to save the report files.')

    parser.add_argument(
        '--transcripts',
        action='store_true',
        help=textwrap.dedent(('Also write one transcript_<seed>.log per\n') +
                             ('  trial, transcript_<value>_<seed>.log\n') +
                             ('  in a sweep.')))

    parser.add_argument(
        '--wall-time',
        dest='wall_time',
        action='store_true',
        help=textwrap.dedent(('Report measured wall-clock time instead of \
the virtual\n') + ('clock. Reports are then no longer reproducible.')))

    parser.add_argument(
        '-j', '--n_jobs',
        type=int,
        metavar='n_jobs',
        help=textwrap.dedent(('Number of worker processes.\n') +
                             ('  Default: 1')),
        default=1)

    parser.add_argument(
        '-v', '--verbose',
        action='count',
        default=0,
        help='Log progress (-v) or every step (-vv).')


def configure_logging(verbose):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s '
                               '%(message)s')


def setup_argparser(argv=None):
    '''
    Code to read in arguments from the command line
    Also allows you to change some settings
    '''
    help_text = (('Run seeded batches of QKD sessions described by a\n')
                 + ('scenario file and write report.csv and report.json.'))

    parser = argparse.ArgumentParser(
        prog='qkd',
        description=help_text,
        formatter_class=argparse.RawTextHelpFormatter)
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    run_parser = subparsers.add_parser(
        'run',
        help='Run every trial of one scenario.',
        formatter_class=argparse.RawTextHelpFormatter)
    add_common_arguments(run_parser)

    sweep_parser = subparsers.add_parser(
        'sweep',
        help='Run a scenario once per value of one parameter.',
        formatter_class=argparse.RawTextHelpFormatter)
    add_common_arguments(sweep_parser)
    sweep_parser.add_argument(
        '--param',
        dest='parameter',
        type=str,
        metavar='NAME',
        required=True,
        help='Dotted scenario key to sweep, e.g. eve.fraction')
    sweep_parser.add_argument(
        '--values',
        type=str,
        metavar='a,b,c',
        required=True,
        help='Comma separated values of the swept parameter.')

    arguments = parser.parse_args(argv)

    return arguments, parser


def split_values(text):
    return [v.strip() for v in text.split(',') if v.strip()]


def qkd_from_scenario(command, scenario, output_dir, parameter=None,
                      values=None, n_jobs=1, wall_time=False,
                      transcripts=False):
    '''
    Run a scenario or a sweep and write the reports.

    Returns
    -------
    bool
        True when every trial completed
    '''
    kwargs = dict(n_jobs=n_jobs, wall_time=wall_time,
                  keep_transcripts=transcripts)
    if command == 'sweep':
        bundle = sweep(scenario, parameter, values, **kwargs)
        write_out_bundle(bundle, output_dir)
        reports = list(bundle.values())
        if transcripts:
            for value, report in bundle.items():
                write_out_transcripts(report, output_dir,
                                      'transcript_{}'.format(value))
    else:
        report = run_scenario(scenario, **kwargs)
        write_out_report(report, output_dir)
        reports = [report]
        if transcripts:
            write_out_transcripts(report, output_dir)
    return all(len(r) == r.scenario.trials for r in reports)


def main(argv=None):
    arguments, parser = setup_argparser(argv)
    configure_logging(arguments.verbose)
    try:
        scenario = read_in_scenario(arguments.scenario, arguments.overrides)
        complete = qkd_from_scenario(
            arguments.command, scenario, arguments.output_dir,
            parameter=getattr(arguments, 'parameter', None),
            values=split_values(getattr(arguments, 'values', '') or ''),
            n_jobs=arguments.n_jobs,
            wall_time=arguments.wall_time,
            transcripts=arguments.transcripts)
    except QkdError as e:
        logger.error('%s', e)
        return 2
    return 0 if complete else 1


if __name__ == "__main__":
    sys.exit(main())
