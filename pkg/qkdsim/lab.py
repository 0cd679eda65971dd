#!/usr/bin/env python
"""
Experiment runner: seeded batches of QKD sessions or handshakes collected
into :class:`qkdsim.classes.RunReport` tables, and parameter sweeps.
"""
# Essential package imports
import logging
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from qkdsim.classes import SCENARIO_KEYS, ReportBundle, RunReport
from qkdsim.errors import ConfigInvalid, UnknownParameter
from qkdsim.handshake import PMK_BITS, run_quantum_handshake, \
    run_standard_handshake
from qkdsim.session import run_qkd_session

logger = logging.getLogger(__name__)

NO_HANDSHAKE = 'skipped'


def _row(seed, session, outcome, clock_ms):
    stats = session.statistics if session is not None else {}
    return {
        'seed': seed,
        'sift_fraction': stats.get('sift_fraction', np.nan),
        'qber': stats.get('qber', np.nan),
        'verdict': stats.get('verdict', 'none'),
        'leaked_bits': stats.get('leaked_bits', 0),
        'final_key_length': stats.get('final_key_length', 0),
        'eve_resolved_bits': stats.get('eve_resolved_bits', 0),
        'handshake_outcome': outcome,
        'wall_time_ms': clock_ms,
    }


def run_trial(scenario, seed, wall_time=False):
    '''
    Run one trial of `scenario` with its own random stream.

    Parameters
    ----------
    scenario : :class:`qkdsim.classes.Scenario`
    seed : int
    wall_time : bool, optional
        report measured wall-clock time instead of the virtual clock

    Returns
    -------
    (dict, str)
        the report row and the transcript text
    '''
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    if scenario.mode == 'qkd_only':
        session = run_qkd_session(scenario.qkd_params(),
                                  scenario.channel_config(), scenario.eve(),
                                  rng)
        outcome, clock_ms, log = NO_HANDSHAKE, session.clock_ms, \
            session.to_log()
    else:
        pmk = rng.integers(0, 2, size=PMK_BITS, dtype=np.uint8)
        if scenario.handshake_kind == 'standard':
            result = run_standard_handshake(pmk, rng,
                                            timeout_ms=scenario.timeout_ms)
        else:
            result = run_quantum_handshake(
                pmk, scenario.channel_config(), scenario.eve(),
                scenario.qkd_params(), rng, timeout_ms=scenario.timeout_ms,
                max_retries=scenario.max_retries)
        session = result.sessions[-1] if result.sessions else None
        outcome, clock_ms, log = result.outcome, result.clock_ms, \
            result.to_log()
    if wall_time:
        clock_ms = (time.perf_counter() - start) * 1000.0
    logger.debug('trial seed %d: %s', seed, outcome)
    return _row(seed, session, outcome, clock_ms), log


def _run_trial_args(args):
    return run_trial(*args)


def run_scenario(scenario, n_jobs=1, wall_time=False, keep_transcripts=False):
    '''
    Run every trial of a scenario.

    Trial ``i`` uses seed ``scenario.seed + i``, so the same scenario
    always gives the same report. Aborted QKD sessions and handshakes are
    recorded as outcomes, not raised.

    Parameters
    ----------
    scenario : :class:`qkdsim.classes.Scenario`
    n_jobs : int, optional
        number of worker processes; rows stay ordered by seed
    wall_time : bool, optional
        see :func:`run_trial`
    keep_transcripts : bool, optional
        store each trial's transcript in :attr:`RunReport.transcripts`

    Returns
    -------
    :class:`qkdsim.classes.RunReport`

    Raises
    ------
    ConfigInvalid
        if the scenario fails validation
    '''
    scenario.validate()
    seeds = [scenario.seed + i for i in range(scenario.trials)]
    jobs = [(scenario, seed, wall_time) for seed in seeds]
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as executor:
            results = list(executor.map(_run_trial_args, jobs))
    else:
        results = [_run_trial_args(job) for job in jobs]

    report = RunReport([row for row, _ in results], scenario)
    if keep_transcripts:
        report.transcripts = {seed: log
                              for seed, (_, log) in zip(seeds, results)}
    logger.info('ran %d trials of %s (%s)', len(report), scenario.protocol,
                scenario.mode)
    return report


def sweep(scenario, parameter, values, **kwargs):
    '''
    Run `scenario` once per value of one dotted scenario key.

    Every run shares the scenario's base seed.

    Parameters
    ----------
    scenario : :class:`qkdsim.classes.Scenario`
    parameter : str
        a key of :data:`qkdsim.classes.SCENARIO_KEYS`, e.g. ``"eve.fraction"``
    values : list
    **kwargs
        passed to :func:`run_scenario`

    Returns
    -------
    :class:`qkdsim.classes.ReportBundle`

    Raises
    ------
    UnknownParameter
        if `parameter` is not a scenario key
    ConfigInvalid
        if two values are the same once read as the key's type, e.g.
        ``0`` and ``0.0`` for ``eve.fraction``
    '''
    if parameter not in SCENARIO_KEYS:
        raise UnknownParameter(parameter)
    swept = [scenario.with_value(parameter, value) for value in values]
    keys = [s.value_of(parameter) for s in swept]
    repeated = sorted(set(str(k) for k in keys if keys.count(k) > 1))
    if repeated:
        raise ConfigInvalid('{}: swept value {} given more than once'
                            .format(parameter, ', '.join(repeated)))
    bundle = ReportBundle(parameter)
    for key, run in zip(keys, swept):
        bundle[key] = run_scenario(run, **kwargs)
    return bundle
