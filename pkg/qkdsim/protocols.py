#!/usr/bin/env python
"""
BB84 and SARG04: raw key exchange over the quantum channel and key sifting
over the classical channel.
"""
# Essential package imports
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from qkdsim.channel import EveKnowledge, SENDER, RECEIVER, transmit_train
from qkdsim.quantum_core import NO_DETECTION, emit_train, measure_train, \
    encode_states, state_bases, conclusive_candidate

logger = logging.getLogger(__name__)

PROTOCOLS = ('bb84', 'sarg04')


@dataclass
class RawKeyRecord:
    '''
    Per-pulse record of one raw key exchange. Every array has one entry
    per pulse sent.

    Attributes
    ----------
    sender_bits : :class:`numpy.ndarray`
        the logical key bit of each pulse
    sender_bases : :class:`numpy.ndarray`
    sender_states : :class:`numpy.ndarray`
        the prepared polarization, ``2*basis + bit``
    receiver_bases : :class:`numpy.ndarray`
    receiver_outcomes : :class:`numpy.ndarray`
        0, 1 or ``NO_DETECTION``
    protocol : str
        ``"bb84"`` or ``"sarg04"``
    eve_knowledge : :class:`qkdsim.channel.EveKnowledge`
    '''
    sender_bits: np.ndarray
    sender_bases: np.ndarray
    sender_states: np.ndarray
    receiver_bases: np.ndarray
    receiver_outcomes: np.ndarray
    protocol: str
    eve_knowledge: EveKnowledge = field(default_factory=EveKnowledge)

    def __post_init__(self):
        lengths = {len(self.sender_bits), len(self.sender_bases),
                   len(self.sender_states), len(self.receiver_bases),
                   len(self.receiver_outcomes)}
        if len(lengths) != 1:
            raise ValueError('RawKeyRecord arrays must share one length')

    def __len__(self):
        return len(self.sender_bits)

    @property
    def detected(self):
        return np.flatnonzero(self.receiver_outcomes != NO_DETECTION)


@dataclass
class SiftedKey:
    '''
    Position aligned bit strings held by the two parties after sifting.

    Attributes
    ----------
    kept_indices : :class:`numpy.ndarray`
        strictly increasing pulse indices
    sender_bits, receiver_bits : :class:`numpy.ndarray`
    leakage_bits : int
        key-correlated bits exposed on the classical channel so far
    '''
    kept_indices: np.ndarray
    sender_bits: np.ndarray
    receiver_bits: np.ndarray
    leakage_bits: int = 0

    def __post_init__(self):
        if not (len(self.kept_indices) == len(self.sender_bits)
                == len(self.receiver_bits)):
            raise ValueError('SiftedKey arrays must share one length')

    def __len__(self):
        return len(self.kept_indices)

    def subset(self, mask):
        return SiftedKey(self.kept_indices[mask], self.sender_bits[mask],
                         self.receiver_bits[mask], self.leakage_bits)

    def disclose(self, n_bits):
        '''
        Return a copy with `n_bits` more key-correlated bits counted as
        exposed. The count never goes down.

        Raises
        ------
        ValueError
            if `n_bits` is negative
        '''
        if n_bits < 0:
            raise ValueError('leakage cannot decrease, got {}'.format(n_bits))
        return replace(self, leakage_bits=self.leakage_bits + int(n_bits))


# ==================== Raw key exchange =======================


def _exchange(protocol, sender_bits, sender_bases, states, cfg, eve, rng):
    n = len(states)
    train = emit_train(cfg.source, states & 1, state_bases(states), rng)
    received, knowledge = transmit_train(train, cfg, eve, rng)
    receiver_bases = rng.integers(0, 2, size=n, dtype=np.uint8)
    outcomes = measure_train(received, receiver_bases, rng)
    logger.debug('%s exchange: %d pulses, %d detected', protocol, n,
                 int(np.count_nonzero(outcomes != NO_DETECTION)))
    return RawKeyRecord(sender_bits, sender_bases, states, receiver_bases,
                        outcomes, protocol, knowledge)


def bb84_exchange(n_pulses, cfg, eve, rng):
    '''
    Quantum phase of BB84.

    The sender picks a uniformly random bit and basis per pulse, the
    receiver measures every pulse in a uniformly random basis.

    Parameters
    ----------
    n_pulses : int
        at least 1
    cfg : :class:`qkdsim.channel.ChannelConfig`
    eve : :class:`qkdsim.channel.EveStrategy`
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    :class:`RawKeyRecord`
    '''
    if n_pulses < 1:
        raise ValueError('n_pulses must be at least 1')
    bits = rng.integers(0, 2, size=n_pulses, dtype=np.uint8)
    bases = rng.integers(0, 2, size=n_pulses, dtype=np.uint8)
    return _exchange('bb84', bits, bases, encode_states(bits, bases),
                     cfg, eve, rng)


def sarg04_exchange(n_pulses, cfg, eve, rng):
    '''
    Quantum phase of SARG04.

    Identical to :func:`bb84_exchange` except that the logical bit is the
    sender's basis (Rectilinear is 0, Diagonal is 1) and the state within
    that basis is chosen uniformly.

    Returns
    -------
    :class:`RawKeyRecord`
    '''
    if n_pulses < 1:
        raise ValueError('n_pulses must be at least 1')
    bases = rng.integers(0, 2, size=n_pulses, dtype=np.uint8)
    within = rng.integers(0, 2, size=n_pulses, dtype=np.uint8)
    return _exchange('sarg04', bases.copy(), bases,
                     encode_states(within, bases), cfg, eve, rng)


# ==================== Sifting =======================


def bb84_sift(record, classical):
    '''
    BB84 key sifting.

    The receiver announces which pulses it detected and the bases it used,
    the sender answers match or no-match for each. Bit values never cross
    the channel.

    Parameters
    ----------
    record : :class:`RawKeyRecord`
    classical : :class:`qkdsim.channel.ClassicalChannel`

    Returns
    -------
    :class:`SiftedKey`
        the indices that were detected and measured in the sender's basis
    '''
    if record.protocol != 'bb84':
        raise ValueError('bb84_sift needs a BB84 record')
    detected = record.detected
    classical.send(RECEIVER, 'sift.detected', detected)
    classical.send(RECEIVER, 'sift.bases', record.receiver_bases[detected])
    verdicts = record.sender_bases[detected] == record.receiver_bases[detected]
    classical.send(SENDER, 'sift.verdicts', verdicts)

    kept = detected[verdicts]
    return SiftedKey(kept,
                     record.sender_bits[kept].astype(np.uint8),
                     record.receiver_outcomes[kept].astype(np.uint8))


def sarg04_candidates(record, detected, rng):
    '''
    Build the sender's announcement for each detected pulse: the sent
    state and one uniformly chosen state of the other basis, sorted so the
    order reveals nothing.

    Returns
    -------
    :class:`numpy.ndarray`, shape (len(detected), 2)
    '''
    sent = record.sender_states[detected]
    other_basis = 1 - state_bases(sent)
    decoy = encode_states(
        rng.integers(0, 2, size=len(detected), dtype=np.uint8), other_basis)
    return np.sort(np.stack([sent, decoy], axis=1), axis=1).astype(np.uint8)


def sarg04_sift(record, classical, rng):
    '''
    SARG04 key sifting.

    For every detected pulse the sender announces an unordered pair made of
    the sent state and one state of the other basis. The receiver keeps the
    pulse only if its measured state is orthogonal to exactly one
    candidate; it then takes the other candidate as the sent state and its
    basis as the key bit.

    Parameters
    ----------
    record : :class:`RawKeyRecord`
    classical : :class:`qkdsim.channel.ClassicalChannel`
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    :class:`SiftedKey`
    '''
    if record.protocol != 'sarg04':
        raise ValueError('sarg04_sift needs a SARG04 record')
    detected = record.detected
    classical.send(RECEIVER, 'sift.detected', detected)
    candidates = sarg04_candidates(record, detected, rng)
    classical.send(SENDER, 'sarg04.candidates', candidates)

    measured = encode_states(record.receiver_outcomes[detected],
                             record.receiver_bases[detected])
    inferred = conclusive_candidate(measured, candidates)
    accepted = inferred >= 0
    classical.send(RECEIVER, 'sift.accepted', accepted)

    kept = detected[accepted]
    return SiftedKey(kept,
                     record.sender_bits[kept].astype(np.uint8),
                     state_bases(inferred[accepted]))


def exchange(protocol, n_pulses, cfg, eve, rng):
    '''
    Dispatch to :func:`bb84_exchange` or :func:`sarg04_exchange`.
    '''
    if protocol == 'bb84':
        return bb84_exchange(n_pulses, cfg, eve, rng)
    elif protocol == 'sarg04':
        return sarg04_exchange(n_pulses, cfg, eve, rng)
    raise ValueError('unknown protocol {!r}'.format(protocol))


def sift(record, classical, rng):
    '''
    Dispatch to the sifting step matching ``record.protocol``.
    '''
    if record.protocol == 'bb84':
        return bb84_sift(record, classical)
    return sarg04_sift(record, classical, rng)
