#!/usr/bin/env python
"""
Container classes for experiments: the :class:`Scenario` describing a
batch of runs, the :class:`RunReport` holding one row per trial and the
:class:`ReportBundle` collecting the reports of a sweep.
"""
# Essential package imports
import dataclasses
import json
import math
from dataclasses import dataclass

import pandas as pd

from qkdsim.channel import ChannelConfig, EveStrategy
from qkdsim.errors import ConfigInvalid, UnknownParameter, \
    ReportIntegrityError
from qkdsim.quantum_core import SourceModel
from qkdsim.session import QkdParams
from qkdsim.stats_functions import summarise

MODES = ('qkd_only', 'full_handshake')
HANDSHAKE_KINDS = ('quantum', 'standard')

# dotted scenario key -> (Scenario attribute, type)
SCENARIO_KEYS = {
    'protocol': ('protocol', str),
    'mode': ('mode', str),
    'n_pulses': ('n_pulses', int),
    'source.kind': ('source_kind', str),
    'source.mu': ('source_mu', float),
    'channel.flip': ('flip_probability', float),
    'channel.loss': ('loss_probability', float),
    'eve.kind': ('eve_kind', str),
    'eve.fraction': ('eve_fraction', float),
    'sample_fraction': ('sample_fraction', float),
    'qber_threshold': ('qber_threshold', float),
    'reconciliation': ('reconciliation', str),
    'reconciliation.cascade_passes': ('cascade_passes', int),
    'reconciliation.winnow_passes': ('winnow_passes', int),
    'security_parameter': ('security_parameter', int),
    'handshake.kind': ('handshake_kind', str),
    'handshake.timeout_ms': ('timeout_ms', float),
    'handshake.max_retries': ('max_retries', int),
    'seed': ('seed', int),
    'trials': ('trials', int),
}

_ALIASES = {
    'eve.kind': {'intercept': 'intercept_resend', 'intercept-resend':
                 'intercept_resend', 'photon_number_splitting': 'pns'},
    'source.kind': {'weak-laser': 'weak_laser', 'single-photon':
                    'single_photon'},
    'mode': {'qkdonly': 'qkd_only', 'fullhandshake': 'full_handshake'},
}


def _coerce(key, value):
    attribute, kind = SCENARIO_KEYS[key]
    if isinstance(value, str):
        value = value.strip()
    try:
        if kind is int:
            number = float(value)
            if number != int(number):
                raise ValueError
            value = int(number)
        elif kind is float:
            value = float(value)
        else:
            value = str(value).lower()
            value = _ALIASES.get(key, {}).get(value, value)
    except (TypeError, ValueError):
        raise ConfigInvalid('{}: cannot read {!r} as {}'.format(
            key, value, kind.__name__))
    return attribute, value


@dataclass(frozen=True)
class Scenario:
    '''
    A batch of seeded runs with one configuration.

    A scenario is usually read from a flat text file of dotted
    ``key = value`` lines, see :data:`SCENARIO_KEYS` and
    :func:`qkdsim.scripts.useful_functions.read_in_scenario`. The defaults
    describe a SARG04 quantum handshake over an ideal channel with a single
    photon source.

    Trial ``i`` uses seed ``seed + i``.
    '''
    protocol: str = 'sarg04'
    mode: str = 'full_handshake'
    n_pulses: int = 20000
    source_kind: str = 'single_photon'
    source_mu: float = 0.5
    flip_probability: float = 0.0
    loss_probability: float = 0.0
    eve_kind: str = 'none'
    eve_fraction: float = 1.0
    sample_fraction: float = 0.25
    qber_threshold: float = 0.11
    reconciliation: str = 'cascade'
    cascade_passes: int = 4
    winnow_passes: int = 1
    security_parameter: int = 32
    handshake_kind: str = 'quantum'
    timeout_ms: float = 1000.0
    max_retries: int = 3
    seed: int = 0
    trials: int = 1

    @classmethod
    def from_flat(cls, flat, base=None):
        '''
        Build a scenario from a mapping of dotted keys to values.

        Parameters
        ----------
        flat : dict
            e.g. ``{"eve.kind": "intercept", "eve.fraction": "0.5"}``
        base : :class:`Scenario`, optional
            values not in `flat` are taken from here

        Returns
        -------
        :class:`Scenario`

        Raises
        ------
        UnknownParameter
            on a key not in :data:`SCENARIO_KEYS`
        ConfigInvalid
            if a value cannot be read as its field's type
        '''
        changes = {}
        errors = []
        for key, value in flat.items():
            if key not in SCENARIO_KEYS:
                raise UnknownParameter(key)
            try:
                attribute, value = _coerce(key, value)
            except ConfigInvalid as e:
                errors.extend(e.errors)
                continue
            changes[attribute] = value
        if errors:
            raise ConfigInvalid(errors)
        return dataclasses.replace(base if base is not None else cls(),
                                   **changes)

    def to_flat(self):
        return {key: getattr(self, attribute)
                for key, (attribute, _) in SCENARIO_KEYS.items()}

    def with_value(self, key, value):
        '''
        Return a copy with the dotted `key` set to `value`.
        '''
        return Scenario.from_flat({key: value}, base=self)

    def value_of(self, key):
        if key not in SCENARIO_KEYS:
            raise UnknownParameter(key)
        return getattr(self, SCENARIO_KEYS[key][0])

    # ============== Derived configuration ================

    def source(self):
        if self.source_kind == 'weak_laser':
            return SourceModel.weak_laser(self.source_mu)
        return SourceModel(self.source_kind)

    def channel_config(self):
        return ChannelConfig(self.flip_probability, self.loss_probability,
                             self.source())

    def eve(self):
        return EveStrategy(self.eve_kind, self.eve_fraction)

    def qkd_params(self):
        return QkdParams(protocol=self.protocol,
                         n_pulses=self.n_pulses,
                         sample_fraction=self.sample_fraction,
                         qber_threshold=self.qber_threshold,
                         reconciliation=self.reconciliation,
                         security_parameter=self.security_parameter,
                         cascade_passes=self.cascade_passes,
                         winnow_passes=self.winnow_passes)

    def validate(self):
        '''
        Check every field against its documented range.

        Returns
        -------
        :class:`Scenario`
            self, so calls can be chained

        Raises
        ------
        ConfigInvalid
            listing every offending field
        '''
        errors = []
        for build in (self.channel_config, self.eve, self.qkd_params):
            try:
                build()
            except ConfigInvalid as e:
                errors.extend(e.errors)
        if self.mode not in MODES:
            errors.append('mode: must be qkd_only or full_handshake, got {!r}'
                          .format(self.mode))
        if self.handshake_kind not in HANDSHAKE_KINDS:
            errors.append('handshake.kind: must be quantum or standard, '
                          'got {!r}'.format(self.handshake_kind))
        if self.timeout_ms <= 0:
            errors.append('handshake.timeout_ms: must be positive, got {}'
                          .format(self.timeout_ms))
        if self.max_retries < 0:
            errors.append('handshake.max_retries: must not be negative, '
                          'got {}'.format(self.max_retries))
        if self.seed < 0:
            errors.append('seed: must not be negative, got {}'
                          .format(self.seed))
        if self.trials < 0:
            errors.append('trials: must not be negative, got {}'
                          .format(self.trials))
        if errors:
            raise ConfigInvalid(errors)
        return self


# ==================== Reports =======================


REPORT_COLUMNS = ['seed', 'sift_fraction', 'qber', 'verdict', 'leaked_bits',
                  'final_key_length', 'eve_resolved_bits',
                  'handshake_outcome', 'wall_time_ms']
NUMERIC_COLUMNS = ['sift_fraction', 'qber', 'leaked_bits',
                   'final_key_length', 'eve_resolved_bits', 'wall_time_ms']
FLOAT_FORMAT = '%.6f'


def _empty_aggregates():
    return {'mean': {c: None for c in NUMERIC_COLUMNS},
            'std': {c: None for c in NUMERIC_COLUMNS}}


class RunReport:
    '''
    One row per trial plus aggregate means and standard deviations.

    Parameters
    ----------
    rows : list of dict, optional
        each with the keys of :data:`REPORT_COLUMNS`
    scenario : :class:`Scenario`, optional

    Attributes
    ----------
    rows : :class:`pandas.DataFrame`
        ordered by seed
    transcripts : dict
        seed -> transcript text, filled when the runner was asked to keep
        them
    '''
    def __init__(self, rows=None, scenario=None):
        self.rows = pd.DataFrame(list(rows or []), columns=REPORT_COLUMNS)
        if len(self.rows):
            self.rows = self.rows.sort_values('seed').reset_index(drop=True)
        self.scenario = scenario
        self.transcripts = {}

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return '<RunReport {} trials>'.format(len(self))

    @property
    def aggregates(self):
        '''
        ``{"mean": {...}, "std": {...}}`` over :data:`NUMERIC_COLUMNS`.
        Every value is ``None`` for an empty report.
        '''
        if len(self.rows) == 0:
            return _empty_aggregates()
        return summarise(self.rows, NUMERIC_COLUMNS)

    def report_aggregates(self):
        '''
        The aggregates as a :class:`pandas.DataFrame` with one row per
        statistic.
        '''
        return pd.DataFrame.from_dict(self.aggregates, orient='index')

    @property
    def completed_trials(self):
        return len(self.rows)

    def to_csv(self, path=None):
        '''
        Write the rows as CSV with the fixed header of
        :data:`REPORT_COLUMNS`.

        Parameters
        ----------
        path : str, optional
            if omitted the CSV text is returned

        Returns
        -------
        str or None
        '''
        return self.rows.to_csv(path, index=False, columns=REPORT_COLUMNS,
                                float_format=FLOAT_FORMAT,
                                lineterminator='\n')

    def to_json(self, path=None):
        '''
        Write the scenario, rows and aggregates as a JSON document.

        Parameters
        ----------
        path : str, optional
            if omitted the JSON text is returned
        '''
        document = {
            'scenario': (self.scenario.to_flat()
                         if self.scenario is not None else None),
            'columns': REPORT_COLUMNS,
            'rows': json.loads(self.rows.to_json(orient='records',
                                                 double_precision=15)),
            'aggregates': self.aggregates,
        }
        text = json.dumps(document, indent=2, sort_keys=True) + '\n'
        if path is None:
            return text
        with open(path, 'w') as f:
            f.write(text)

    @classmethod
    def from_json(cls, text):
        '''
        Load a report written by :meth:`to_json` and check that its
        aggregates agree with its rows.

        Raises
        ------
        ReportIntegrityError
            if an aggregate differs from its recomputation, or the number of
            rows differs from the scenario's trial count
        '''
        document = json.loads(text)
        scenario = None
        if document.get('scenario') is not None:
            scenario = Scenario.from_flat(document['scenario'])
        report = cls(document['rows'], scenario)
        if scenario is not None and len(report) != scenario.trials:
            raise ReportIntegrityError(
                '{} rows for {} trials'.format(len(report), scenario.trials))

        recomputed = report.aggregates
        for statistic, values in document['aggregates'].items():
            for column, stored in values.items():
                fresh = recomputed[statistic].get(column)
                if stored is None and fresh is None:
                    continue
                if stored is None or fresh is None or not math.isclose(
                        stored, fresh, rel_tol=1e-9, abs_tol=1e-9):
                    raise ReportIntegrityError(
                        '{} of {} is {} but the rows give {}'.format(
                            statistic, column, stored, fresh))
        return report


class ReportBundle(dict):
    '''
    ReportBundle is a subclass of :class:`dict` mapping each value of a
    swept scenario key to its :class:`RunReport`.

    Parameters
    ----------
    parameter : str
        the dotted scenario key that was swept

    See Also
    --------
    :func:`qkdsim.lab.sweep`
    '''
    def __init__(self, parameter, reports=None):
        dict.__init__(self)
        self.parameter = parameter
        if reports is not None:
            self.update(reports)

    def apply(self, report_function):
        '''
        Apply a function to each report and return the results keyed by
        swept value.
        '''
        return {value: report_function(report)
                for value, report in self.items()}

    def report_aggregates(self, statistic='mean'):
        '''
        One row per swept value with the chosen aggregate of every numeric
        column.

        Parameters
        ----------
        statistic : str, optional
            ``"mean"`` or ``"std"``

        Returns
        -------
        :class:`pandas.DataFrame`
        '''
        table = self.apply(lambda r: r.aggregates[statistic])
        df = pd.DataFrame.from_dict(table, orient='index',
                                    columns=NUMERIC_COLUMNS)
        df.index.name = self.parameter
        return df

    def combined(self):
        '''
        All rows of all reports in one table, keyed by the swept value in
        the first column.

        Returns
        -------
        :class:`pandas.DataFrame`
        '''
        columns = [self.parameter] + REPORT_COLUMNS
        frames = []
        for value, report in self.items():
            df = report.rows.copy()
            df.insert(0, self.parameter, value)
            frames.append(df)
        if not frames:
            return pd.DataFrame(columns=columns)
        return pd.concat(frames, ignore_index=True)[columns]
