#!/usr/bin/env python

import logging
import os

from qkdsim.classes import Scenario
from qkdsim.errors import ConfigInvalid

logger = logging.getLogger(__name__)


def read_in_flat(scenario_file):
    '''
    Read a flat ``key = value`` text file.

    Blank lines and everything after a ``#`` are ignored.

    Parameters
    ----------
    scenario_file : str
        path to the file

    Returns
    -------
    dict
        dotted key -> value string, in file order

    Raises
    ------
    ConfigInvalid
        on a line without ``=``
    '''
    flat = {}
    errors = []
    with open(scenario_file) as f:
        for number, line in enumerate(f, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                errors.append('line {}: expected key = value, got {!r}'
                              .format(number, line))
                continue
            key, value = line.split('=', 1)
            flat[key.strip()] = value.strip()
    if errors:
        raise ConfigInvalid(errors)
    return flat


def parse_overrides(overrides):
    '''
    Turn ``["key=value", ...]`` command line overrides into a dict.
    '''
    flat = {}
    for item in overrides or []:
        if '=' not in item:
            raise ConfigInvalid('--set: expected key=value, got {!r}'
                                .format(item))
        key, value = item.split('=', 1)
        flat[key.strip()] = value.strip()
    return flat


def read_in_scenario(scenario_file=None, overrides=None):
    '''
    Read in a scenario from a file path, with command line overrides
    applied on top.

    Parameters
    ----------
    scenario_file : str, optional
        path to a flat ``key = value`` file. If omitted the default
        :class:`qkdsim.classes.Scenario` is the base.
    overrides : list of str, optional
        ``key=value`` strings taking precedence over the file

    Returns
    -------
    :class:`qkdsim.classes.Scenario`
        validated

    Raises
    ------
    ConfigInvalid
    UnknownParameter
    '''
    flat = read_in_flat(scenario_file) if scenario_file is not None else {}
    flat.update(parse_overrides(overrides))
    return Scenario.from_flat(flat).validate()


def write_out_report(report, output_dir, name='report'):
    '''
    Write a run report as ``<name>.csv`` and ``<name>.json``.

    Parameters
    ----------
    report : :class:`qkdsim.classes.RunReport`
    output_dir : str
        created if it does not exist
    name : str, optional

    Returns
    -------
    (str, str)
        paths of the CSV and JSON files
    '''
    # Make the output directory if it doesn't exist already
    if not os.path.isdir(output_dir):
        os.makedirs(output_dir)

    csv_file = os.path.join(output_dir, name + '.csv')
    json_file = os.path.join(output_dir, name + '.json')
    report.to_csv(csv_file)
    report.to_json(json_file)
    logger.info('wrote %s and %s', csv_file, json_file)
    return csv_file, json_file


def write_out_bundle(bundle, output_dir):
    '''
    Write every report of a sweep as ``report_<value>.csv/json`` plus a
    combined ``report.csv`` keyed by the swept value.

    Returns
    -------
    str
        path of the combined CSV
    '''
    if not os.path.isdir(output_dir):
        os.makedirs(output_dir)
    for value, report in bundle.items():
        write_out_report(report, output_dir, 'report_{}'.format(value))
    combined_file = os.path.join(output_dir, 'report.csv')
    bundle.combined().to_csv(combined_file, index=False,
                             float_format='%.6f', lineterminator='\n')
    logger.info('wrote %s', combined_file)
    return combined_file


def write_out_transcripts(report, output_dir, name='transcript'):
    '''
    Write one ``<name>_<seed>.log`` per trial kept in
    :attr:`qkdsim.classes.RunReport.transcripts`.

    Parameters
    ----------
    report : :class:`qkdsim.classes.RunReport`
    output_dir : str
    name : str, optional
        file name prefix; a sweep passes ``transcript_<value>`` so the
        runs of different values, which share seeds, keep separate files

    Returns
    -------
    list of str
        the paths written
    '''
    if not os.path.isdir(output_dir):
        os.makedirs(output_dir)
    paths = []
    for seed, text in sorted(report.transcripts.items()):
        path = os.path.join(output_dir, '{}_{}.log'.format(name, seed))
        with open(path, 'w') as f:
            f.write(text)
        paths.append(path)
    return paths
