#!/usr/bin/env python
"""
One complete QKD session: raw key exchange, sifting, the eavesdropper's
use of the public announcements, error estimation, reconciliation and
privacy amplification.
"""
# Essential package imports
import logging
from dataclasses import dataclass, field

import numpy as np

from qkdsim.channel import ClassicalChannel, EveKnowledge, \
    eve_resolve_intercepts, eve_resolve_pns, eve_correct_bits
from qkdsim.errors import ConfigInvalid, KeyTooShort, KeyExhausted
from qkdsim.postprocessing import ABORT, estimate_error, reconcile, \
    privacy_amplify
from qkdsim.protocols import PROTOCOLS, exchange, sift
from qkdsim.stats_functions import binary_entropy

logger = logging.getLogger(__name__)

KEY_TOO_SHORT = 'key_too_short'
QBER_THRESHOLD_EXCEEDED = 'qber_threshold_exceeded'
KEY_EXHAUSTED = 'key_exhausted'

RECONCILIATION_STRATEGIES = ('cascade', 'winnow')


@dataclass(frozen=True)
class QkdParams:
    '''
    Protocol settings of a QKD session.

    Parameters
    ----------
    protocol : str, optional
        ``"bb84"`` or ``"sarg04"`` (default)
    n_pulses : int, optional
    sample_fraction : float, optional
        share of the sifted key disclosed for error estimation
    qber_threshold : float, optional
        abort when the estimated QBER is strictly above it
    reconciliation : str, optional
        ``"cascade"`` (default) or ``"winnow"``
    security_parameter : int, optional
        bits removed by privacy amplification on top of the leakage
    cascade_passes, winnow_passes : int, optional
    classical_latency_ms : float, optional
        virtual time each classical message takes

    Raises
    ------
    ConfigInvalid
    '''
    protocol: str = 'sarg04'
    n_pulses: int = 20000
    sample_fraction: float = 0.25
    qber_threshold: float = 0.11
    reconciliation: str = 'cascade'
    security_parameter: int = 32
    cascade_passes: int = 4
    winnow_passes: int = 1
    classical_latency_ms: float = 0.5

    def __post_init__(self):
        errors = []
        if self.protocol not in PROTOCOLS:
            errors.append('protocol: must be one of {}, got {!r}'
                          .format(', '.join(PROTOCOLS), self.protocol))
        if self.n_pulses < 1:
            errors.append('n_pulses: must be at least 1, got {}'
                          .format(self.n_pulses))
        if not 0 < self.sample_fraction < 1:
            errors.append('sample_fraction: must lie in (0, 1), got {}'
                          .format(self.sample_fraction))
        if not 0 < self.qber_threshold < 1:
            errors.append('qber_threshold: must lie in (0, 1), got {}'
                          .format(self.qber_threshold))
        if self.reconciliation not in RECONCILIATION_STRATEGIES:
            errors.append('reconciliation: must be cascade or winnow, '
                          'got {!r}'.format(self.reconciliation))
        if self.security_parameter < 1:
            errors.append('security_parameter: must be a positive integer, '
                          'got {}'
                          .format(self.security_parameter))
        if self.cascade_passes < 1 or self.winnow_passes < 1:
            errors.append('passes: must be at least 1')
        if errors:
            raise ConfigInvalid(errors)


@dataclass
class SessionTranscript:
    '''
    Everything one QKD session produced.

    Attributes
    ----------
    protocol : str
    messages : tuple of :class:`qkdsim.channel.ClassicalMessage`
        the full classical transcript in order
    decisions : list of str
        one line per pipeline stage
    statistics : dict
        pulses, detected, sifted, sift_fraction, qber, verdict,
        leaked_bits, transcript_leaked_bits, final_key_length,
        eve_tagged_bits, eve_resolved_bits, eve_correct_bits,
        residual_errors, keys_match, shannon_bound_bits
    sender_key, receiver_key : :class:`qkdsim.postprocessing.FinalKey`
        ``None`` when the session aborted
    estimate : :class:`qkdsim.postprocessing.ErrorEstimate`
    reconciliation : :class:`qkdsim.postprocessing.ReconciliationResult`
    eve_knowledge : :class:`qkdsim.channel.EveKnowledge`
    leakage_ledger : list of (str, int)
        the working key's leakage count after each stage
    abort_reason : str or None
        ``"key_too_short"``, ``"qber_threshold_exceeded"`` or
        ``"key_exhausted"``
    clock_ms : float
        virtual time spent on the classical channel
    '''
    protocol: str
    messages: tuple = ()
    decisions: list = field(default_factory=list)
    statistics: dict = field(default_factory=dict)
    sender_key: object = None
    receiver_key: object = None
    estimate: object = None
    reconciliation: object = None
    eve_knowledge: EveKnowledge = field(default_factory=EveKnowledge)
    leakage_ledger: list = field(default_factory=list)
    abort_reason: str = None
    clock_ms: float = 0.0

    @property
    def aborted(self):
        return self.abort_reason is not None

    @property
    def completed(self):
        return not self.aborted

    def to_log(self):
        '''
        Render the transcript as text: the decisions, then one line per
        classical message with its virtual send time, sender, tag and
        payload size. Payload values are not written.

        Returns
        -------
        str
        '''
        lines = ['# protocol {}'.format(self.protocol)]
        lines += ['# {}'.format(d) for d in self.decisions]
        for key in sorted(self.statistics):
            lines.append('# {} = {}'.format(key, self.statistics[key]))
        for i, message in enumerate(self.messages):
            lines.append('{:6d} {:>8s} {:<28s} {}'.format(
                i, message.sender, message.tag, message.size))
        return '\n'.join(lines) + '\n'


def _eve_statistics(knowledge, sifted):
    tagged = set(knowledge.intercepted) | set(knowledge.stored_photons)
    kept = [int(i) for i in sifted.kept_indices]
    return {
        'eve_tagged_bits': sum(1 for i in kept if i in tagged),
        'eve_resolved_bits': sum(1 for i in kept
                                 if i in knowledge.resolved_bits),
        'eve_correct_bits': eve_correct_bits(
            knowledge, sifted.kept_indices, sifted.sender_bits),
    }


def run_qkd_session(params, cfg, eve, rng):
    '''
    Run a QKD session from pulse emission to the final key.

    Protocol failures do not raise: the transcript carries
    ``abort_reason`` and the statistics gathered up to that point.

    Parameters
    ----------
    params : :class:`QkdParams`
    cfg : :class:`qkdsim.channel.ChannelConfig`
    eve : :class:`qkdsim.channel.EveStrategy`
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    :class:`SessionTranscript`
    '''
    classical = ClassicalChannel(latency_ms=params.classical_latency_ms)
    transcript = SessionTranscript(params.protocol)
    stats = transcript.statistics

    def finish(reason=None):
        transcript.abort_reason = reason
        transcript.messages = classical.messages
        transcript.clock_ms = classical.clock_ms
        if reason is not None:
            transcript.decisions.append('abort: {}'.format(reason))
            logger.info('%s session aborted: %s', params.protocol, reason)
        return transcript

    record = exchange(params.protocol, params.n_pulses, cfg, eve, rng)
    detected = record.detected
    stats.update(pulses=len(record), detected=len(detected))

    sifted = sift(record, classical, rng)
    stats['sifted'] = len(sifted)
    stats['sift_fraction'] = len(sifted) / float(len(record))
    transcript.leakage_ledger.append(('sift', sifted.leakage_bits))
    transcript.decisions.append('sift: kept {} of {} pulses'.format(
        len(sifted), len(record)))

    announcements = classical.eve_view()
    knowledge = eve_resolve_intercepts(record.eve_knowledge, announcements,
                                       params.protocol)
    knowledge = eve_resolve_pns(knowledge, announcements, params.protocol,
                                rng)
    transcript.eve_knowledge = knowledge
    stats.update(_eve_statistics(knowledge, sifted))

    try:
        estimate, working = estimate_error(
            sifted, params.sample_fraction, params.qber_threshold,
            classical, rng)
    except KeyTooShort:
        return finish(KEY_TOO_SHORT)
    transcript.estimate = estimate
    transcript.leakage_ledger.append(('estimate', working.leakage_bits))
    stats.update(qber=estimate.qber, verdict=estimate.verdict)
    transcript.decisions.append('estimate: qber {:.4f} on {} bits, {}'.format(
        estimate.qber, len(estimate.sampled_indices), estimate.verdict))
    if estimate.verdict == ABORT:
        return finish(QBER_THRESHOLD_EXCEEDED)

    try:
        result = reconcile(params.reconciliation, working.sender_bits,
                           working.receiver_bits, estimate.qber, classical,
                           rng, cascade_passes=params.cascade_passes,
                           winnow_passes=params.winnow_passes)
    except KeyTooShort:
        return finish(KEY_TOO_SHORT)
    transcript.reconciliation = result
    working = working.disclose(result.parity_bits_leaked)
    transcript.leakage_ledger.append(('reconcile', working.leakage_bits))
    stats['leaked_bits'] = working.leakage_bits
    stats['shannon_bound_bits'] = int(np.ceil(
        len(working) * binary_entropy(estimate.qber)))
    stats['transcript_leaked_bits'] = classical.key_correlated_bits()
    stats['residual_errors'] = result.residual_errors
    if stats['leaked_bits'] != stats['transcript_leaked_bits']:
        logger.warning('leakage ledger %d differs from transcript recount %d',
                       stats['leaked_bits'], stats['transcript_leaked_bits'])
    transcript.decisions.append(
        'reconcile: {} over {} bits, {} corrections, {} bits leaked'.format(
            result.strategy, len(result.reference_key), result.corrections,
            result.parity_bits_leaked))

    try:
        sender_key = privacy_amplify(
            result.reference_key, working.leakage_bits,
            params.security_parameter, classical, rng)
    except KeyExhausted:
        stats['final_key_length'] = 0
        return finish(KEY_EXHAUSTED)
    seed = classical.last('amplify.seed').payload
    receiver_key = privacy_amplify(
        result.corrected_key, working.leakage_bits,
        params.security_parameter, classical, rng, seed=seed)

    transcript.sender_key = sender_key
    transcript.receiver_key = receiver_key
    stats['final_key_length'] = sender_key.length
    stats['keys_match'] = bool(np.array_equal(sender_key.bits,
                                              receiver_key.bits))
    transcript.decisions.append('amplify: {} -> {} bits'.format(
        len(result.reference_key), sender_key.length))
    logger.debug('%s session produced %d key bits', params.protocol,
                 sender_key.length)
    return finish()
