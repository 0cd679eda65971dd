#!/usr/bin/env python
"""
Polarization states, bases, pulse sources and measurement.

Bits and bases are carried as small integers so that whole pulse trains can
be held in numpy arrays. A polarization state is the integer
``2*basis + bit``:

====  =======  ===========  ===
name  angle    basis        bit
====  =======  ===========  ===
H     0°       Rectilinear  0
V     90°      Rectilinear  1
D     45°      Diagonal     0
A     135°     Diagonal     1
====  =======  ===========  ===
"""
# Essential package imports
import enum
from dataclasses import dataclass

import numpy as np

from qkdsim.errors import ConfigInvalid

NO_DETECTION = -1


class Basis(enum.IntEnum):
    RECTILINEAR = 0
    DIAGONAL = 1


class Polarization(enum.IntEnum):
    H = 0
    V = 1
    D = 2
    A = 3

    @property
    def basis(self):
        return Basis(int(self) >> 1)

    @property
    def bit(self):
        return int(self) & 1


@dataclass(frozen=True)
class SourceModel:
    '''
    The light source used by the sender.

    Parameters
    ----------
    kind : str
        ``"single_photon"`` or ``"weak_laser"``
    mean_photon_number : float, optional
        μ of the Poisson photon number distribution. Only used by the weak
        laser, where it must lie in (0, 2].

    Raises
    ------
    ConfigInvalid
        on an unknown kind or μ out of range
    '''
    kind: str = 'single_photon'
    mean_photon_number: float = 1.0

    def __post_init__(self):
        if self.kind not in ('single_photon', 'weak_laser'):
            raise ConfigInvalid(
                'source.kind: must be single_photon or weak_laser, got {!r}'
                .format(self.kind))
        if self.kind == 'weak_laser' and not (
                0 < self.mean_photon_number <= 2):
            raise ConfigInvalid(
                'source.mu: must lie in (0, 2], got {}'
                .format(self.mean_photon_number))

    @classmethod
    def single_photon(cls):
        return cls('single_photon', 1.0)

    @classmethod
    def weak_laser(cls, mean_photon_number):
        return cls('weak_laser', float(mean_photon_number))

    def photon_counts(self, n, rng):
        '''
        Draw the photon numbers of `n` pulses.

        Parameters
        ----------
        n : int
        rng : :class:`numpy.random.Generator`

        Returns
        -------
        :class:`numpy.ndarray`
            integer array of length `n`
        '''
        if self.kind == 'single_photon':
            return np.ones(n, dtype=np.int64)
        return rng.poisson(self.mean_photon_number, size=n).astype(np.int64)


@dataclass
class PhotonPulse:
    '''
    One light pulse. ``photon_count == 0`` is a vacuum (lost) pulse and
    its polarization carries no meaning.
    '''
    photon_count: int
    polarization: Polarization


@dataclass
class PulseTrain:
    '''
    A sequence of pulses held as two aligned arrays.

    Parameters
    ----------
    photon_count : :class:`numpy.ndarray` of int
    polarization : :class:`numpy.ndarray` of uint8
        states encoded as ``2*basis + bit``
    '''
    photon_count: np.ndarray
    polarization: np.ndarray

    def __len__(self):
        return len(self.photon_count)

    def __getitem__(self, i):
        return PhotonPulse(int(self.photon_count[i]),
                           Polarization(int(self.polarization[i])))

    def copy(self):
        return PulseTrain(self.photon_count.copy(), self.polarization.copy())

    @classmethod
    def from_pulses(cls, pulses):
        return cls(
            np.array([p.photon_count for p in pulses], dtype=np.int64),
            np.array([int(p.polarization) for p in pulses], dtype=np.uint8))


# ==================== Encoding =======================


def encode(bit, basis):
    '''
    Return the polarization that carries `bit` in `basis`.

    Parameters
    ----------
    bit : int
        0 or 1
    basis : :class:`Basis`

    Returns
    -------
    :class:`Polarization`
    '''
    return Polarization(2 * int(basis) + int(bit))


def decode(polarization):
    '''
    Inverse of :func:`encode`.

    Returns
    -------
    (:class:`Basis`, int)
    '''
    polarization = Polarization(polarization)
    return polarization.basis, polarization.bit


def encode_states(bits, bases):
    '''
    Vectorised :func:`encode`.

    Parameters
    ----------
    bits, bases : array of 0/1

    Returns
    -------
    :class:`numpy.ndarray` of uint8
    '''
    return (2 * np.asarray(bases, dtype=np.uint8)
            + np.asarray(bits, dtype=np.uint8)).astype(np.uint8)


def state_bases(states):
    return (np.asarray(states, dtype=np.uint8) >> 1).astype(np.uint8)


def state_bits(states):
    return (np.asarray(states, dtype=np.uint8) & 1).astype(np.uint8)


def conclusive_candidate(measured, candidates):
    '''
    Apply the orthogonality exclusion rule to a measured state and an
    announced pair of candidate states from different bases.

    A candidate is excluded when it is orthogonal to the measured state
    (same basis, other bit). When exactly one candidate is excluded the
    other one is the inferred state; otherwise the result is inconclusive.

    Parameters
    ----------
    measured : array of uint8
        measured states, ``2*basis + outcome``
    candidates : array of uint8, shape (n, 2)

    Returns
    -------
    :class:`numpy.ndarray` of int
        the inferred state per row, or -1 where inconclusive
    '''
    measured = np.asarray(measured, dtype=np.uint8)
    candidates = np.asarray(candidates, dtype=np.uint8).reshape(-1, 2)
    orthogonal = (measured ^ 1)[:, np.newaxis] == candidates
    inferred = np.full(len(measured), -1, dtype=np.int64)
    only_first = orthogonal[:, 0] & ~orthogonal[:, 1]
    only_second = orthogonal[:, 1] & ~orthogonal[:, 0]
    inferred[only_first] = candidates[only_first, 1]
    inferred[only_second] = candidates[only_second, 0]
    return inferred


# ==================== Sources and measurement =======================


def emit_train(source, bits, bases, rng):
    '''
    Prepare one pulse per (bit, basis) pair.

    Parameters
    ----------
    source : :class:`SourceModel`
    bits, bases : array of 0/1
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    :class:`PulseTrain`
    '''
    states = encode_states(bits, bases)
    return PulseTrain(source.photon_counts(len(states), rng), states)


def emit_pulse(source, bit, basis, rng):
    '''
    Prepare a single pulse. See :func:`emit_train`.

    Returns
    -------
    :class:`PhotonPulse`
    '''
    return emit_train(source, [bit], [basis], rng)[0]


def measure_train(train, bases, rng):
    '''
    Measure every pulse of `train` in the matching entry of `bases`.

    A vacuum pulse yields ``NO_DETECTION``. A matching basis returns the
    encoded bit; a mismatched basis returns a uniformly random bit and the
    pulse's polarization collapses to the measured state, so later
    measurements see the new state. `train` is modified in place.

    Parameters
    ----------
    train : :class:`PulseTrain`
    bases : array of 0/1
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    :class:`numpy.ndarray` of int8
        0, 1 or ``NO_DETECTION`` per pulse
    '''
    bases = np.asarray(bases, dtype=np.uint8)
    random_bits = rng.integers(0, 2, size=len(train), dtype=np.uint8)
    matched = state_bases(train.polarization) == bases
    outcome = np.where(matched, state_bits(train.polarization),
                       random_bits).astype(np.int8)
    detected = train.photon_count > 0
    outcome[~detected] = NO_DETECTION
    # Collapse onto the measured state
    train.polarization = np.where(
        detected,
        encode_states(np.clip(outcome, 0, 1), bases),
        train.polarization).astype(np.uint8)
    return outcome


def measure(pulse, basis, rng):
    '''
    Measure a single pulse in `basis`. See :func:`measure_train`.

    The pulse's polarization is updated in place on collapse.

    Returns
    -------
    int
        0, 1 or ``NO_DETECTION``
    '''
    train = PulseTrain.from_pulses([pulse])
    outcome = int(measure_train(train, [basis], rng)[0])
    pulse.polarization = Polarization(int(train.polarization[0]))
    return outcome
