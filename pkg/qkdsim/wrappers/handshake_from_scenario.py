#!/usr/bin/env python

# =============================================================================
# IMPORTS
# =============================================================================
import argparse
import logging
import sys

from qkdsim.errors import QkdError
from qkdsim.lab import run_scenario
from qkdsim.scripts.useful_functions import read_in_scenario, \
    write_out_report, write_out_transcripts
from qkdsim.wrappers.qkd_from_scenario import add_common_arguments, \
    configure_logging

logger = logging.getLogger(__name__)

# =============================================================================
# FUNCTIONS
# =============================================================================


def setup_argparser(argv=None):
    '''
    Code to read in arguments from the command line
    Also allows you to change some settings
    '''
    help_text = (('Run seeded handshakes between an authenticator and a\n')
                 + ('supplicant. By default the PTK comes from QKD and is\n')
                 + ('confirmed with a Q-MIC.'))

    parser = argparse.ArgumentParser(
        prog='handshake',
        description=help_text,
        formatter_class=argparse.RawTextHelpFormatter)
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    run_parser = subparsers.add_parser(
        'run',
        help='Run every trial of one scenario as a handshake.',
        formatter_class=argparse.RawTextHelpFormatter)
    add_common_arguments(run_parser)
    run_parser.add_argument(
        '--standard',
        action='store_true',
        help='Run the nonce based 4-way handshake instead.')

    arguments = parser.parse_args(argv)

    return arguments, parser


def handshake_from_scenario(scenario, output_dir, standard=False, n_jobs=1,
                            wall_time=False, transcripts=False):
    '''
    Run `scenario` as full handshakes and write the report.

    Returns
    -------
    bool
        True when every trial completed
    '''
    scenario = scenario.with_value('mode', 'full_handshake')
    if standard:
        scenario = scenario.with_value('handshake.kind', 'standard')
    report = run_scenario(scenario, n_jobs=n_jobs, wall_time=wall_time,
                          keep_transcripts=transcripts)
    write_out_report(report, output_dir)
    if transcripts:
        write_out_transcripts(report, output_dir)
    counts = report.rows['handshake_outcome'].value_counts().to_dict()
    logger.info('handshake outcomes: %s', counts)
    return len(report) == scenario.trials


def main(argv=None):
    arguments, parser = setup_argparser(argv)
    configure_logging(arguments.verbose)
    try:
        scenario = read_in_scenario(arguments.scenario, arguments.overrides)
        complete = handshake_from_scenario(
            scenario, arguments.output_dir,
            standard=arguments.standard,
            n_jobs=arguments.n_jobs,
            wall_time=arguments.wall_time,
            transcripts=arguments.transcripts)
    except QkdError as e:
        logger.error('%s', e)
        return 2
    return 0 if complete else 1


if __name__ == "__main__":
    sys.exit(main())
