#!/usr/bin/env python
"""
The quantum channel between the two parties, the eavesdropper sitting on
it, and the authenticated classical channel they talk over.
"""
# Essential package imports
import logging
from dataclasses import dataclass, field

import numpy as np

from qkdsim.errors import ConfigInvalid
from qkdsim.quantum_core import SourceModel, PulseTrain, Polarization, \
    measure_train, encode_states, state_bases, conclusive_candidate

logger = logging.getLogger(__name__)

SENDER = 'sender'
RECEIVER = 'receiver'

# Tags whose payload bits are correlated with the key and therefore count
# as leakage. Sampled bits from error estimation are destroyed afterwards
# and are not listed.
KEY_CORRELATED_TAGS = ('cascade.parity', 'winnow.parity', 'winnow.syndrome')

SARG04_PNS_RESOLUTION = 1 - 1 / np.sqrt(2)


# ==================== Configuration =======================


@dataclass(frozen=True)
class ChannelConfig:
    '''
    Physical behaviour of the quantum channel for one run.

    Parameters
    ----------
    flip_probability : float, optional
        probability that a pulse's polarization is rotated to the opposite
        state of its basis. Must lie in [0, 0.5].
    loss_probability : float, optional
        probability that a whole pulse is absorbed. Must lie in [0, 1).
    source : :class:`qkdsim.quantum_core.SourceModel`, optional
        single photon source by default

    Raises
    ------
    ConfigInvalid
        if a probability is out of range
    '''
    flip_probability: float = 0.0
    loss_probability: float = 0.0
    source: SourceModel = field(default_factory=SourceModel.single_photon)

    def __post_init__(self):
        errors = []
        if not 0 <= self.flip_probability <= 0.5:
            errors.append('channel.flip: must lie in [0, 0.5], got {}'
                          .format(self.flip_probability))
        if not 0 <= self.loss_probability < 1:
            errors.append('channel.loss: must lie in [0, 1), got {}'
                          .format(self.loss_probability))
        if errors:
            raise ConfigInvalid(errors)


@dataclass(frozen=True)
class EveStrategy:
    '''
    What the eavesdropper does to the pulses she sees.

    Parameters
    ----------
    kind : str
        ``"none"``, ``"intercept_resend"`` or ``"pns"``
    fraction : float, optional
        share of pulses attacked by intercept-resend, in [0, 1]
    '''
    kind: str = 'none'
    fraction: float = 1.0

    def __post_init__(self):
        errors = []
        if self.kind not in ('none', 'intercept_resend', 'pns'):
            errors.append(
                'eve.kind: must be none, intercept_resend or pns, got {!r}'
                .format(self.kind))
        if not 0 <= self.fraction <= 1:
            errors.append('eve.fraction: must lie in [0, 1], got {}'
                          .format(self.fraction))
        if errors:
            raise ConfigInvalid(errors)

    @classmethod
    def none(cls):
        return cls('none')

    @classmethod
    def intercept_resend(cls, fraction=1.0):
        return cls('intercept_resend', float(fraction))

    @classmethod
    def photon_number_splitting(cls):
        return cls('pns')


@dataclass
class EveKnowledge:
    '''
    Everything the eavesdropper holds about one session, keyed by pulse
    index.

    Attributes
    ----------
    intercepted : dict
        pulse index -> (basis used, bit obtained) for intercept-resend
    stored_photons : dict
        pulse index -> :class:`qkdsim.quantum_core.Polarization` of the
        photon split off a multi-photon pulse
    resolved_bits : dict
        pulse index -> bit, filled after listening to the sifting messages
    '''
    intercepted: dict = field(default_factory=dict)
    stored_photons: dict = field(default_factory=dict)
    resolved_bits: dict = field(default_factory=dict)

    def copy(self):
        return EveKnowledge(dict(self.intercepted),
                            dict(self.stored_photons),
                            dict(self.resolved_bits))


# ==================== Classical channel =======================


@dataclass(frozen=True, eq=False)
class ClassicalMessage:
    sender: str
    tag: str
    payload: np.ndarray

    @property
    def size(self):
        return int(np.size(self.payload))


class ClassicalChannel:
    '''
    Authenticated, tamper-free two-way channel. Messages are delivered
    unmodified and in order, and every message is kept in the transcript.
    The eavesdropper gets a read-only copy.

    Parameters
    ----------
    latency_ms : float, optional
        virtual time each message adds to :attr:`clock_ms`
    '''
    def __init__(self, latency_ms=0.5):
        self.latency_ms = latency_ms
        self.clock_ms = 0.0
        self._messages = []

    def send(self, sender, tag, payload):
        '''
        Deliver a message and return it.

        Parameters
        ----------
        sender : str
            ``SENDER`` or ``RECEIVER``
        tag : str
            message kind, e.g. ``"sift.bases"``
        payload : array_like

        Returns
        -------
        :class:`ClassicalMessage`
        '''
        payload = np.array(payload, copy=True)
        payload.setflags(write=False)
        message = ClassicalMessage(sender, tag, payload)
        self._messages.append(message)
        self.clock_ms += self.latency_ms
        return message

    @property
    def messages(self):
        return tuple(self._messages)

    def eve_view(self):
        '''
        The eavesdropper's copy of the transcript so far.
        '''
        return tuple(self._messages)

    def find(self, tag):
        return [m for m in self._messages if m.tag == tag]

    def last(self, tag):
        found = self.find(tag)
        return found[-1] if found else None

    def key_correlated_bits(self):
        '''
        Recount the key-correlated bits exposed in the transcript.

        Returns
        -------
        int
        '''
        return sum(m.size for m in self._messages
                   if m.tag in KEY_CORRELATED_TAGS)

    def __len__(self):
        return len(self._messages)


# ==================== Quantum channel =======================


def transmit_train(train, cfg, eve, rng, knowledge=None, offset=0):
    '''
    Send a pulse train through the quantum channel.

    Effects are applied in the order eavesdropper, loss, polarization flip.
    The input train is left untouched.

    Parameters
    ----------
    train : :class:`qkdsim.quantum_core.PulseTrain`
    cfg : :class:`ChannelConfig`
    eve : :class:`EveStrategy`
    rng : :class:`numpy.random.Generator`
    knowledge : :class:`EveKnowledge`, optional
        updated in place; a new one is created when None
    offset : int, optional
        pulse index of the first pulse of `train`

    Returns
    -------
    (:class:`qkdsim.quantum_core.PulseTrain`, :class:`EveKnowledge`)
        the pulses as received and the eavesdropper's knowledge
    '''
    if knowledge is None:
        knowledge = EveKnowledge()
    received = train.copy()
    n = len(received)

    if eve.kind == 'intercept_resend':
        targeted = rng.random(n) < eve.fraction
        eve_bases = rng.integers(0, 2, size=n, dtype=np.uint8)
        hit = np.flatnonzero(targeted & (received.photon_count > 0))
        if len(hit):
            grabbed = PulseTrain(received.photon_count[hit],
                                 received.polarization[hit])
            bits = measure_train(grabbed, eve_bases[hit], rng)
            # Re-emit exactly one photon in the measured state
            received.photon_count[hit] = 1
            received.polarization[hit] = encode_states(bits, eve_bases[hit])
            for i, b, x in zip(hit, eve_bases[hit], bits):
                knowledge.intercepted[int(i) + offset] = (int(b), int(x))
    elif eve.kind == 'pns':
        tagged = np.flatnonzero(received.photon_count >= 2)
        received.photon_count[tagged] -= 1
        for i in tagged:
            knowledge.stored_photons[int(i) + offset] = Polarization(
                int(received.polarization[i]))

    lost = rng.random(n) < cfg.loss_probability
    received.photon_count[lost] = 0

    flipped = rng.random(n) < cfg.flip_probability
    received.polarization = np.where(
        flipped, received.polarization ^ 1,
        received.polarization).astype(np.uint8)

    return received, knowledge


def transmit(pulse, cfg, eve, rng, knowledge=None, index=0):
    '''
    Send one pulse through the quantum channel. See :func:`transmit_train`.

    Returns
    -------
    (:class:`qkdsim.quantum_core.PhotonPulse`, :class:`EveKnowledge`)
    '''
    received, knowledge = transmit_train(
        PulseTrain.from_pulses([pulse]), cfg, eve, rng,
        knowledge=knowledge, offset=index)
    return received[0], knowledge


# ==================== Eavesdropper post-processing =======================


def _sifted_view(announcements, protocol):
    '''
    Reconstruct from public messages the kept pulse indices and, for BB84,
    the announced basis of each; for SARG04 the announced candidate pairs.
    '''
    by_tag = {}
    for message in announcements:
        by_tag[message.tag] = message.payload
    if 'sift.detected' not in by_tag:
        return np.zeros(0, dtype=np.int64), None
    detected = np.asarray(by_tag['sift.detected'], dtype=np.int64)
    if protocol == 'bb84':
        verdicts = np.asarray(by_tag['sift.verdicts'], dtype=bool)
        bases = np.asarray(by_tag['sift.bases'], dtype=np.uint8)
        return detected[verdicts], bases[verdicts]
    accepted = np.asarray(by_tag['sift.accepted'], dtype=bool)
    candidates = np.asarray(by_tag['sarg04.candidates'],
                            dtype=np.uint8).reshape(-1, 2)
    return detected[accepted], candidates[accepted]


def eve_resolve_pns(knowledge, sift_announcements, protocol, rng):
    '''
    Turn stored photons into key bits using the sifting announcements.

    For BB84 the basis announcement lets the eavesdropper measure every
    stored photon of a kept pulse in the right basis, so every one is
    resolved. For SARG04 she has to discriminate between the two announced
    non-orthogonal candidates and succeeds only with probability
    ``1 - 1/sqrt(2)``.

    Parameters
    ----------
    knowledge : :class:`EveKnowledge`
    sift_announcements : sequence of :class:`ClassicalMessage`
    protocol : str
        ``"bb84"`` or ``"sarg04"``
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    :class:`EveKnowledge`
        a copy with :attr:`EveKnowledge.resolved_bits` extended
    '''
    knowledge = knowledge.copy()
    if not knowledge.stored_photons:
        return knowledge
    kept, detail = _sifted_view(sift_announcements, protocol)
    position = {int(i): k for k, i in enumerate(kept)}
    stored = sorted(i for i in knowledge.stored_photons if i in position)
    if not stored:
        return knowledge
    states = np.array([int(knowledge.stored_photons[i]) for i in stored],
                      dtype=np.uint8)

    if protocol == 'bb84':
        bases = detail[[position[i] for i in stored]]
        photons = PulseTrain(np.ones(len(stored), dtype=np.int64), states)
        bits = measure_train(photons, bases, rng)
        for i, bit in zip(stored, bits):
            knowledge.resolved_bits[i] = int(bit)
    else:
        success = rng.random(len(stored)) < SARG04_PNS_RESOLUTION
        # The SARG04 bit is the basis of the sent state
        for i, ok, bit in zip(stored, success, state_bases(states)):
            if ok:
                knowledge.resolved_bits[i] = int(bit)

    logger.debug('Eve resolved %d of %d stored photons (%s)',
                 len(knowledge.resolved_bits), len(stored), protocol)
    return knowledge


def eve_resolve_intercepts(knowledge, sift_announcements, protocol):
    '''
    Decide which intercepted pulses give the eavesdropper a sure key bit.

    For BB84 those are the kept pulses she measured in the announced basis.
    For SARG04 she applies the receiver's exclusion rule to her own result
    against the announced pair.

    Parameters
    ----------
    knowledge : :class:`EveKnowledge`
    sift_announcements : sequence of :class:`ClassicalMessage`
    protocol : str

    Returns
    -------
    :class:`EveKnowledge`
    '''
    knowledge = knowledge.copy()
    if not knowledge.intercepted:
        return knowledge
    kept, detail = _sifted_view(sift_announcements, protocol)
    for k, i in enumerate(kept):
        record = knowledge.intercepted.get(int(i))
        if record is None:
            continue
        basis, bit = record
        if protocol == 'bb84':
            if basis == int(detail[k]):
                knowledge.resolved_bits[int(i)] = bit
        else:
            measured = encode_states([bit], [basis])
            inferred = conclusive_candidate(measured, detail[k])[0]
            if inferred >= 0:
                knowledge.resolved_bits[int(i)] = int(
                    state_bases([inferred])[0])
    return knowledge


def eve_correct_bits(knowledge, kept_indices, sender_bits):
    '''
    Count how many of the eavesdropper's resolved bits match the sender's
    sifted key.

    Parameters
    ----------
    knowledge : :class:`EveKnowledge`
    kept_indices : array of int
    sender_bits : array of 0/1

    Returns
    -------
    int
    '''
    correct = 0
    for i, bit in zip(kept_indices, sender_bits):
        guess = knowledge.resolved_bits.get(int(i))
        if guess is not None and guess == int(bit):
            correct += 1
    return correct
