#! /usr/bin/env python

from os.path import dirname, abspath, join
from qkdsim.scripts.useful_functions import read_in_scenario

"""Example scenarios"""

TITLE       = """Example QKD scenarios"""
DESCRSHORT  = """Scenario files for the qkd and handshake commands"""
DESCRLONG   = """
default           SARG04 quantum handshake, ideal channel, single photons
intercept_resend  BB84 against a full intercept-resend eavesdropper
pns_weak_laser    SARG04 with a weak laser source under a PNS attack
noisy_cascade     BB84 over a 5% flip channel, corrected with Cascade
"""

filepath = dirname(abspath(__file__))
SCENARIOS = ('default', 'intercept_resend', 'pns_weak_laser',
             'noisy_cascade')


def _data():
    return tuple(scenario_file(name) for name in SCENARIOS)


def scenario_file(name):
    if name not in SCENARIOS:
        raise KeyError('no shipped scenario named {!r}'.format(name))
    return join(filepath, name + '.txt')


def import_scenario(name='default', overrides=None):
    return read_in_scenario(scenario_file(name), overrides=overrides)
