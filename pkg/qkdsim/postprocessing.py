#!/usr/bin/env python
"""
Classical post-processing of a sifted key: error estimation against a QBER
threshold, reconciliation (Cascade or Winnow) and privacy amplification by
Toeplitz hashing.
"""
# Essential package imports
import logging
from dataclasses import dataclass

import numpy as np

from qkdsim.channel import SENDER, RECEIVER
from qkdsim.errors import KeyTooShort, LengthMismatch, KeyExhausted, \
    AbortQber
from qkdsim.stats_functions import parity

logger = logging.getLogger(__name__)

MIN_ESTIMATION_LENGTH = 16
MIN_RECONCILIATION_LENGTH = 8
WINNOW_BLOCK = 8

PROCEED = 'proceed'
ABORT = 'abort'

# Column j of the Hamming(7,4) parity check matrix is j + 1 in binary, so a
# single error at position j has syndrome j + 1.
HAMMING_PARITY_CHECK = np.array(
    [[((j + 1) >> r) & 1 for j in range(7)] for r in range(3)],
    dtype=np.int64)


@dataclass
class ErrorEstimate:
    '''
    Outcome of error estimation.

    Attributes
    ----------
    sampled_indices : :class:`numpy.ndarray`
        positions in the sifted key that were disclosed and discarded
    qber : float
    threshold : float
    verdict : str
        ``"proceed"`` or ``"abort"``; abort exactly when qber > threshold
    '''
    sampled_indices: np.ndarray
    qber: float
    threshold: float
    verdict: str

    def raise_for_verdict(self):
        '''
        Raise :class:`qkdsim.errors.AbortQber` if the verdict is abort.
        '''
        if self.verdict == ABORT:
            raise AbortQber(self)


@dataclass
class ReconciliationResult:
    '''
    Outcome of reconciliation.

    Attributes
    ----------
    reference_key : :class:`numpy.ndarray`
        the sender's key after any bits discarded by the protocol
    corrected_key : :class:`numpy.ndarray`
        the receiver's key after correction
    parity_bits_leaked : int
        parity and syndrome bits sent on the classical channel
    passes : int
    strategy : str
        ``"cascade"`` or ``"winnow"``
    corrections : int
        bits flipped on the receiver side
    '''
    reference_key: np.ndarray
    corrected_key: np.ndarray
    parity_bits_leaked: int
    passes: int
    strategy: str
    corrections: int = 0

    @property
    def residual_errors(self):
        return int(np.count_nonzero(self.reference_key != self.corrected_key))


@dataclass
class FinalKey:
    '''
    The secret key produced by privacy amplification.
    '''
    bits: np.ndarray
    security_parameter: int

    @property
    def length(self):
        return len(self.bits)


def _as_bits(key):
    return np.asarray(key, dtype=np.uint8)


def _check_pair(key_a, key_b):
    key_a = _as_bits(key_a)
    key_b = _as_bits(key_b)
    if len(key_a) != len(key_b):
        raise LengthMismatch('keys have lengths {} and {}'
                             .format(len(key_a), len(key_b)))
    if len(key_a) < MIN_RECONCILIATION_LENGTH:
        raise KeyTooShort('reconciliation needs at least {} bits, got {}'
                          .format(MIN_RECONCILIATION_LENGTH, len(key_a)))
    return key_a, key_b


def _agreed_permutation(n, tag, classical, rng):
    # The sender picks a seed and announces it; both sides derive the same
    # permutation from it.
    perm_seed = int(rng.integers(0, 2**32))
    classical.send(SENDER, tag, np.array([perm_seed], dtype=np.uint64))
    return np.random.default_rng(perm_seed).permutation(n)


# ==================== Error estimation =======================


def estimate_error(sifted, sample_fraction, threshold, classical, rng):
    '''
    Estimate the QBER on a random sample of the sifted key.

    ``ceil(sample_fraction * n)`` positions are chosen uniformly, both
    parties disclose their bits there, and the sample is then removed from
    both keys. The removed bits are destroyed, so they add nothing to the
    leakage ledger.

    Parameters
    ----------
    sifted : :class:`qkdsim.protocols.SiftedKey`
    sample_fraction : float
        in (0, 1)
    threshold : float
        abort when the measured QBER is strictly above it
    classical : :class:`qkdsim.channel.ClassicalChannel`
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    (:class:`ErrorEstimate`, :class:`qkdsim.protocols.SiftedKey`)
        the estimate and the sifted key without the sampled positions

    Raises
    ------
    KeyTooShort
        if the sifted key has fewer than 16 bits
    '''
    n = len(sifted)
    if n < MIN_ESTIMATION_LENGTH:
        raise KeyTooShort('error estimation needs at least {} bits, got {}'
                          .format(MIN_ESTIMATION_LENGTH, n))
    if not 0 < sample_fraction < 1:
        raise ValueError('sample_fraction must lie in (0, 1)')
    k = min(int(np.ceil(sample_fraction * n)), n)
    sample = np.sort(rng.choice(n, size=k, replace=False))

    classical.send(SENDER, 'estimate.positions', sample)
    classical.send(SENDER, 'estimate.sender_bits', sifted.sender_bits[sample])
    classical.send(RECEIVER, 'estimate.receiver_bits',
                   sifted.receiver_bits[sample])

    errors = np.count_nonzero(
        sifted.sender_bits[sample] != sifted.receiver_bits[sample])
    qber = errors / float(k)
    verdict = ABORT if qber > threshold else PROCEED
    logger.debug('QBER %.4f on %d sampled bits -> %s', qber, k, verdict)

    keep = np.ones(n, dtype=bool)
    keep[sample] = False
    return (ErrorEstimate(sample, qber, threshold, verdict),
            sifted.subset(keep))


# ==================== Cascade =======================


class _ParityOracle:
    '''
    The sender's side of the parity exchange. Every answer costs one
    leaked bit.
    '''
    def __init__(self, reference, classical):
        self.reference = reference
        self.classical = classical
        self.leaked = 0

    def ask(self, positions):
        self.classical.send(RECEIVER, 'cascade.parity_request', positions)
        answer = parity(self.reference[positions])
        self.classical.send(SENDER, 'cascade.parity',
                            np.array([answer], dtype=np.uint8))
        self.leaked += 1
        return answer


def _binary(corrected, positions, oracle):
    '''
    Bisect a block with odd error parity down to one erroneous position.
    '''
    while len(positions) > 1:
        half = (len(positions) + 1) // 2
        left = positions[:half]
        if parity(corrected[left]) != oracle.ask(left):
            positions = left
        else:
            positions = positions[half:]
    return int(positions[0])


def initial_block_size(n, estimated_qber):
    '''
    First pass block size ``clamp(ceil(0.73 / max(qber, 1/n)), 2, n)``.
    '''
    size = int(np.ceil(0.73 / max(estimated_qber, 1.0 / n)))
    return int(min(max(size, 2), n))


def cascade_reconcile(key_a, key_b, estimated_qber, classical, rng,
                      passes=4):
    '''
    Reconcile two keys with the Cascade protocol.

    Pass ``i`` splits the key into blocks of size ``k1 * 2**i`` (capped at
    the key length), after a permutation agreed on the classical channel
    for every pass but the first. Blocks whose parities disagree are
    bisected (BINARY) to find and flip one error on the receiver side.
    Each flip changes the parity of the blocks containing that position in
    every other pass run so far; those that become odd are corrected in
    turn.

    Parameters
    ----------
    key_a : array of 0/1
        the sender's key, treated as the reference
    key_b : array of 0/1
        the receiver's key
    estimated_qber : float
        sets the first block size, see :func:`initial_block_size`
    classical : :class:`qkdsim.channel.ClassicalChannel`
    rng : :class:`numpy.random.Generator`
    passes : int, optional
        default 4

    Returns
    -------
    :class:`ReconciliationResult`

    Raises
    ------
    LengthMismatch
        if the keys differ in length
    KeyTooShort
        if the keys are shorter than 8 bits
    '''
    key_a, key_b = _check_pair(key_a, key_b)
    n = len(key_a)
    corrected = key_b.copy()
    oracle = _ParityOracle(key_a, classical)
    k1 = initial_block_size(n, estimated_qber)
    logger.debug('Cascade on %d bits, first block size %d', n, k1)

    # per pass: (blocks, block id of every position, sender block parities)
    layouts = []
    flips = 0
    for p in range(passes):
        size = min(k1 * 2**p, n)
        if p == 0:
            order = np.arange(n)
        else:
            order = _agreed_permutation(n, 'cascade.permutation',
                                        classical, rng)
        blocks = [order[i:i + size] for i in range(0, n, size)]
        block_of = np.empty(n, dtype=np.int64)
        for b, positions in enumerate(blocks):
            block_of[positions] = b
        known = [oracle.ask(positions) for positions in blocks]
        layouts.append((blocks, block_of, known))

        pending = [(p, b) for b in range(len(blocks))]
        while pending:
            q, b = pending.pop()
            positions = layouts[q][0][b]
            if parity(corrected[positions]) == layouts[q][2][b]:
                continue
            pos = _binary(corrected, positions, oracle)
            corrected[pos] ^= 1
            flips += 1
            for r in range(p + 1):
                if r != q:
                    pending.append((r, int(layouts[r][1][pos])))

    logger.debug('Cascade flipped %d bits, leaked %d parities',
                 flips, oracle.leaked)
    return ReconciliationResult(key_a.copy(), corrected, oracle.leaked,
                                passes, 'cascade', flips)


# ==================== Winnow =======================


def hamming_syndromes(blocks):
    '''
    Hamming(7,4) syndromes of the first 7 bits of each 8-bit block.

    Parameters
    ----------
    blocks : array, shape (k, 8)

    Returns
    -------
    :class:`numpy.ndarray`, shape (k, 3)
    '''
    blocks = np.asarray(blocks, dtype=np.int64).reshape(-1, WINNOW_BLOCK)
    return ((blocks[:, :7] @ HAMMING_PARITY_CHECK.T) & 1).astype(np.uint8)


def winnow_reconcile(key_a, key_b, classical, rng, passes=1):
    '''
    Reconcile two keys with Winnow.

    The keys are cut into 8-bit blocks; a trailing partial block is
    discarded from both. The sender announces each block parity. For every
    block whose parity disagrees the sender also announces the 3-bit
    Hamming syndrome of bits 0-6, and the receiver flips the position the
    syndrome difference points to (bit 7 when the difference is zero).
    Bit 0 of every corrected block is then discarded by both sides.
    Further passes reshuffle both keys with a permutation agreed on the
    classical channel.

    A block with an even number of errors keeps its parity and is not
    corrected in that pass.

    Parameters
    ----------
    key_a, key_b : array of 0/1
        the sender's and the receiver's keys
    classical : :class:`qkdsim.channel.ClassicalChannel`
    rng : :class:`numpy.random.Generator`
    passes : int, optional
        default 1

    Returns
    -------
    :class:`ReconciliationResult`

    Raises
    ------
    LengthMismatch
    KeyTooShort
    '''
    key_a, key_b = _check_pair(key_a, key_b)
    a, b = key_a.copy(), key_b.copy()
    leaked = 0
    flips = 0
    weights = np.array([1, 2, 4], dtype=np.int64)

    for p in range(passes):
        if p > 0:
            order = _agreed_permutation(len(a), 'winnow.permutation',
                                        classical, rng)
            a, b = a[order], b[order]
        n_blocks = len(a) // WINNOW_BLOCK
        if n_blocks == 0:
            break
        block_a = a[:n_blocks * WINNOW_BLOCK].reshape(n_blocks, WINNOW_BLOCK)
        block_b = b[:n_blocks * WINNOW_BLOCK].reshape(
            n_blocks, WINNOW_BLOCK).copy()

        parity_a = (block_a.sum(axis=1) & 1).astype(np.uint8)
        classical.send(SENDER, 'winnow.parity', parity_a)
        leaked += n_blocks
        parity_b = (block_b.sum(axis=1) & 1).astype(np.uint8)
        bad = np.flatnonzero(parity_a != parity_b)

        if len(bad):
            syndrome_a = hamming_syndromes(block_a[bad])
            classical.send(SENDER, 'winnow.syndrome', syndrome_a.ravel())
            leaked += syndrome_a.size
            difference = syndrome_a ^ hamming_syndromes(block_b[bad])
            pointer = difference.astype(np.int64) @ weights
            position = np.where(pointer > 0, pointer - 1, WINNOW_BLOCK - 1)
            block_b[bad, position] ^= 1
            flips += len(bad)

        keep = np.ones((n_blocks, WINNOW_BLOCK), dtype=bool)
        keep[bad, 0] = False
        a = block_a[keep]
        b = block_b[keep]

    logger.debug('Winnow corrected %d blocks, leaked %d bits', flips, leaked)
    return ReconciliationResult(a, b, leaked, passes, 'winnow', flips)


def reconcile(strategy, key_a, key_b, estimated_qber, classical, rng,
              cascade_passes=4, winnow_passes=1):
    '''
    Dispatch to :func:`cascade_reconcile` or :func:`winnow_reconcile`.
    '''
    if strategy == 'cascade':
        return cascade_reconcile(key_a, key_b, estimated_qber, classical,
                                 rng, passes=cascade_passes)
    elif strategy == 'winnow':
        return winnow_reconcile(key_a, key_b, classical, rng,
                                passes=winnow_passes)
    raise ValueError('unknown reconciliation strategy {!r}'.format(strategy))


# ==================== Privacy amplification =======================


def toeplitz_matrix(seed, n, m):
    '''
    The m x n binary Toeplitz matrix described by ``n + m - 1`` seed bits.

    The first column is ``seed[:m]`` and the first row is
    ``seed[0]`` followed by ``seed[m:]``.

    Parameters
    ----------
    seed : array of 0/1
    n, m : int

    Returns
    -------
    :class:`numpy.ndarray`, shape (m, n)
    '''
    from scipy.linalg import toeplitz

    seed = _as_bits(seed)
    if len(seed) != n + m - 1:
        raise ValueError('seed must have n + m - 1 = {} bits, got {}'
                         .format(n + m - 1, len(seed)))
    column = seed[:m]
    row = np.concatenate([seed[:1], seed[m:]])
    return toeplitz(column, row).astype(np.uint8)


def toeplitz_hash(key, seed, m):
    '''
    Multiply `key` by the Toeplitz matrix of :func:`toeplitz_matrix` over
    GF(2), using an FFT convolution instead of building the matrix.

    Parameters
    ----------
    key : array of 0/1
        length n
    seed : array of 0/1
        length n + m - 1
    m : int

    Returns
    -------
    :class:`numpy.ndarray`
        m output bits
    '''
    from scipy.signal import fftconvolve

    key = _as_bits(key)
    seed = _as_bits(seed)
    n = len(key)
    if len(seed) != n + m - 1:
        raise ValueError('seed must have n + m - 1 = {} bits, got {}'
                         .format(n + m - 1, len(seed)))
    if m == 0:
        return np.zeros(0, dtype=np.uint8)
    # Diagonal sequence: entry i - j + n - 1 holds T[i, j]
    diagonals = np.concatenate([seed[m:][::-1], seed[:m]]).astype(float)
    sums = np.rint(fftconvolve(diagonals, key.astype(float)))
    return (sums[n - 1:n - 1 + m].astype(np.int64) & 1).astype(np.uint8)


def privacy_amplify(key, total_leakage, s, classical, rng, seed=None):
    '''
    Compress `key` with a random Toeplitz hash.

    The output length is ``m = len(key) - total_leakage - s``. The sender
    draws the ``n + m - 1`` seed bits and announces them on the classical
    channel; the receiver passes the announced `seed` instead and nothing
    is sent.

    Parameters
    ----------
    key : array of 0/1
    total_leakage : int
        key-correlated bits exposed so far
    s : int
        security parameter
    classical : :class:`qkdsim.channel.ClassicalChannel`
    rng : :class:`numpy.random.Generator`
    seed : array of 0/1, optional
        an already agreed seed

    Returns
    -------
    :class:`FinalKey`

    Raises
    ------
    KeyExhausted
        if ``m <= 0``
    '''
    key = _as_bits(key)
    n = len(key)
    m = n - int(total_leakage) - int(s)
    if m <= 0:
        raise KeyExhausted(
            'nothing left after {} leaked bits and s = {} on a {} bit key'
            .format(total_leakage, s, n))
    if seed is None:
        seed = rng.integers(0, 2, size=n + m - 1, dtype=np.uint8)
        classical.send(SENDER, 'amplify.seed', seed)
    return FinalKey(toeplitz_hash(key, seed, m), int(s))
