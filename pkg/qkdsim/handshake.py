#!/usr/bin/env python
"""
The IEEE 802.11i pairwise key hierarchy, the standard 4-way handshake and
the quantum handshake, where the PTK comes out of a QKD session and a
Q-MIC replaces the nonce and KCK based message integrity codes.

Both parties run a small state machine. The legal transitions of each
(role, mode) pair are held in a :class:`networkx.DiGraph` whose edges carry
the triggering event; an event with no matching edge aborts the party with
``AbortReason.PROTOCOL_VIOLATION``.
"""
# Essential package imports
import enum
import functools
import hashlib
import hmac
import logging
from dataclasses import dataclass, field, replace

import networkx as nx
import numpy as np

from qkdsim.errors import BadLength
from qkdsim.session import QBER_THRESHOLD_EXCEEDED, run_qkd_session

logger = logging.getLogger(__name__)

PMK_BITS = 256
PTK_BITS_STANDARD = 384
PTK_BITS_QUANTUM = 256
TEMPORAL_BITS = 128
NONCE_BITS = 256
ADDRESS_BITS = 48
QUANTUM_KEY_BITS = 384
MIC_BYTES = 16

PTK_LABEL = b'Pairwise key expansion'


class Role(enum.Enum):
    AUTHENTICATOR = 'authenticator'
    SUPPLICANT = 'supplicant'


class Mode(enum.Enum):
    STANDARD = 'standard'
    QUANTUM = 'quantum'


class Phase(enum.Enum):
    IDLE = 'idle'
    MSG1_SENT = 'msg1_sent'
    MSG1_RCVD = 'msg1_rcvd'
    MSG2_SENT = 'msg2_sent'
    MSG2_RCVD = 'msg2_rcvd'
    MSG3_SENT = 'msg3_sent'
    MSG3_RCVD = 'msg3_rcvd'
    MSG4_SENT = 'msg4_sent'
    MSG4_RCVD = 'msg4_rcvd'
    QKD_IN_PROGRESS = 'qkd_in_progress'
    ESTABLISHED = 'established'
    ABORTED = 'aborted'


class AbortReason(enum.Enum):
    PROTOCOL_VIOLATION = 'protocol_violation'
    MIC_MISMATCH = 'mic_mismatch'
    TIMEOUT = 'timeout'
    QBER_THRESHOLD_EXCEEDED = 'qber_threshold_exceeded'
    QMIC_MISMATCH = 'qmic_mismatch'
    RETRIES_EXHAUSTED = 'retries_exhausted'
    DEAUTHENTICATED = 'deauthenticated'


# ==================== Bit strings and PRF =======================


def bits_to_bytes(bits):
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def bytes_to_bits(data, n_bits=None):
    bits = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))
    if n_bits is not None:
        bits = bits[:n_bits]
    return bits.astype(np.uint8)


def _check_length(name, bits, expected):
    if len(bits) != expected:
        raise BadLength('{} must have {} bits, got {}'
                        .format(name, expected, len(bits)))


def prf(key, label, data, n_bits):
    '''
    The IEEE 802.11i pseudo-random function built on HMAC-SHA1.

    Output block ``i`` is ``HMAC-SHA1(key, label || 0x00 || data || i)``;
    blocks are concatenated and truncated to `n_bits`.

    Parameters
    ----------
    key : bytes or array of 0/1
    label : bytes
    data : bytes
    n_bits : int

    Returns
    -------
    :class:`numpy.ndarray`
        `n_bits` bits
    '''
    if not isinstance(key, (bytes, bytearray)):
        key = bits_to_bytes(key)
    output = b''
    for i in range((n_bits + 159) // 160):
        output += hmac.new(key, label + b'\x00' + data + bytes([i]),
                           hashlib.sha1).digest()
    return bytes_to_bits(output, n_bits)


def derive_ptk_standard(pmk, anonce, snonce, addr_a, addr_b):
    '''
    Derive the 384-bit standard PTK.

    The PRF input is the two addresses and the two nonces, each pair in
    ascending byte order, so both parties get the same PTK whatever order
    they pass them in.

    Parameters
    ----------
    pmk : array of 0/1
        256 bits
    anonce, snonce : array of 0/1
        256 bits each
    addr_a, addr_b : array of 0/1
        48 bits each

    Returns
    -------
    :class:`numpy.ndarray`
        384 bits

    Raises
    ------
    BadLength
    '''
    _check_length('pmk', pmk, PMK_BITS)
    _check_length('anonce', anonce, NONCE_BITS)
    _check_length('snonce', snonce, NONCE_BITS)
    _check_length('addr_a', addr_a, ADDRESS_BITS)
    _check_length('addr_b', addr_b, ADDRESS_BITS)
    addresses = sorted([bits_to_bytes(addr_a), bits_to_bytes(addr_b)])
    nonces = sorted([bits_to_bytes(anonce), bits_to_bytes(snonce)])
    data = b''.join(addresses + nonces)
    return prf(pmk, PTK_LABEL, data, PTK_BITS_STANDARD)


def split_ptk(ptk, mode):
    '''
    Split a PTK into (KCK, KEK, TK).

    Standard mode cuts 384 bits into three 128-bit keys in KCK, KEK, TK
    order. Quantum mode cuts 256 bits into KEK then TK and returns an empty
    KCK, since the Q-MIC takes over the KCK's job.

    Parameters
    ----------
    ptk : array of 0/1
    mode : :class:`Mode`

    Returns
    -------
    tuple of :class:`numpy.ndarray`

    Raises
    ------
    BadLength
    '''
    ptk = np.asarray(ptk, dtype=np.uint8)
    t = TEMPORAL_BITS
    if Mode(mode) is Mode.STANDARD:
        _check_length('standard ptk', ptk, PTK_BITS_STANDARD)
        return ptk[:t].copy(), ptk[t:2 * t].copy(), ptk[2 * t:].copy()
    _check_length('quantum ptk', ptk, PTK_BITS_QUANTUM)
    return np.zeros(0, dtype=np.uint8), ptk[:t].copy(), ptk[t:].copy()


def compute_qmic(quantum_key, pmk):
    '''
    Q-MIC of a 384-bit quantum key: bits 256-383 of the key XOR the first
    128 bits of the PMK.

    Parameters
    ----------
    quantum_key : array of 0/1
        384 bits
    pmk : array of 0/1
        256 bits

    Returns
    -------
    :class:`QMic`

    Raises
    ------
    BadLength
    '''
    quantum_key = np.asarray(quantum_key, dtype=np.uint8)
    pmk = np.asarray(pmk, dtype=np.uint8)
    _check_length('quantum key', quantum_key, QUANTUM_KEY_BITS)
    _check_length('pmk', pmk, PMK_BITS)
    return QMic(quantum_key[PTK_BITS_QUANTUM:] ^ pmk[:TEMPORAL_BITS])


def compute_mic(kck, body):
    '''
    MIC of a standard handshake message: the first 16 bytes of
    HMAC-SHA1 keyed with the KCK over the message body.
    '''
    return hmac.new(bits_to_bytes(kck), body, hashlib.sha1).digest()[:MIC_BYTES]


def encrypt_demo_frame(tk, payload, counter):
    '''
    XOR `payload` with a keystream derived from the temporal key.

    Keystream block ``i`` is ``HMAC-SHA1(tk, counter || i)`` with an 8-byte
    counter and a 4-byte block index. Applying the function twice with the
    same key and counter gives back the payload.

    Parameters
    ----------
    tk : array of 0/1
        128 bits
    payload : bytes
    counter : int
        64-bit frame counter

    Returns
    -------
    bytes
    '''
    payload = bytes(payload)
    if not payload:
        return b''
    key = bits_to_bytes(tk)
    stream = b''
    block = 0
    while len(stream) < len(payload):
        stream += hmac.new(key, counter.to_bytes(8, 'big')
                           + block.to_bytes(4, 'big'), hashlib.sha1).digest()
        block += 1
    data = np.frombuffer(payload, dtype=np.uint8)
    mask = np.frombuffer(stream[:len(payload)], dtype=np.uint8)
    return (data ^ mask).tobytes()


# ==================== Keys =======================


@dataclass(frozen=True)
class QMic:
    value: np.ndarray

    def to_bytes(self):
        return bits_to_bytes(self.value)

    def __eq__(self, other):
        return isinstance(other, QMic) and np.array_equal(self.value,
                                                          other.value)


@dataclass(frozen=True, eq=False)
class KeyHierarchy:
    '''
    The pairwise keys held by one party.

    Attributes
    ----------
    pmk : :class:`numpy.ndarray`
        256 bits
    ptk : :class:`numpy.ndarray`
        384 bits in standard mode, 256 in quantum mode
    kck, kek, tk : :class:`numpy.ndarray`
        see :func:`split_ptk`
    mode : :class:`Mode`
    '''
    pmk: np.ndarray
    ptk: np.ndarray
    kck: np.ndarray
    kek: np.ndarray
    tk: np.ndarray
    mode: Mode

    @classmethod
    def from_ptk(cls, pmk, ptk, mode):
        kck, kek, tk = split_ptk(ptk, mode)
        return cls(np.asarray(pmk, dtype=np.uint8),
                   np.asarray(ptk, dtype=np.uint8), kck, kek, tk, Mode(mode))


# ==================== State machines =======================


_TRANSITIONS = {
    (Role.AUTHENTICATOR, Mode.STANDARD): [
        (Phase.IDLE, 'send:msg1', Phase.MSG1_SENT),
        (Phase.MSG1_SENT, 'recv:msg2', Phase.MSG2_RCVD),
        (Phase.MSG2_RCVD, 'send:msg3', Phase.MSG3_SENT),
        (Phase.MSG3_SENT, 'recv:msg4', Phase.MSG4_RCVD),
        (Phase.MSG4_RCVD, 'install', Phase.ESTABLISHED)],
    (Role.SUPPLICANT, Mode.STANDARD): [
        (Phase.IDLE, 'recv:msg1', Phase.MSG1_RCVD),
        (Phase.MSG1_RCVD, 'send:msg2', Phase.MSG2_SENT),
        (Phase.MSG2_SENT, 'recv:msg3', Phase.MSG3_RCVD),
        (Phase.MSG3_RCVD, 'send:msg4', Phase.MSG4_SENT),
        (Phase.MSG4_SENT, 'install', Phase.ESTABLISHED)],
    (Role.AUTHENTICATOR, Mode.QUANTUM): [
        (Phase.IDLE, 'start:qkd', Phase.QKD_IN_PROGRESS),
        (Phase.QKD_IN_PROGRESS, 'send:qmic', Phase.MSG1_SENT),
        (Phase.MSG1_SENT, 'recv:qmic', Phase.MSG2_RCVD),
        (Phase.MSG2_RCVD, 'install', Phase.ESTABLISHED)],
    (Role.SUPPLICANT, Mode.QUANTUM): [
        (Phase.IDLE, 'start:qkd', Phase.QKD_IN_PROGRESS),
        (Phase.QKD_IN_PROGRESS, 'recv:qmic', Phase.MSG1_RCVD),
        (Phase.MSG1_RCVD, 'send:qmic', Phase.MSG2_SENT),
        (Phase.MSG2_SENT, 'install', Phase.ESTABLISHED)],
}

EVENTS = tuple(sorted({event for table in _TRANSITIONS.values()
                       for _, event, _ in table}))


@functools.lru_cache(maxsize=None)
def transition_graph(role, mode):
    '''
    The legal transitions of one party as a directed graph.

    Nodes are :class:`Phase` members; each edge has an ``event``
    attribute naming what triggers it. The graph is cached and must not be
    modified.

    Parameters
    ----------
    role : :class:`Role`
    mode : :class:`Mode`

    Returns
    -------
    :class:`networkx.DiGraph`
    '''
    G = nx.DiGraph(role=Role(role), mode=Mode(mode))
    G.add_nodes_from([Phase.IDLE, Phase.ESTABLISHED, Phase.ABORTED])
    for source, event, target in _TRANSITIONS[(Role(role), Mode(mode))]:
        G.add_edge(source, target, event=event)
    return G


def legal_sequence(role, mode):
    '''
    The only event sequence that takes a party from Idle to Established.

    Returns
    -------
    list of str
    '''
    G = transition_graph(role, mode)
    path = nx.shortest_path(G, Phase.IDLE, Phase.ESTABLISHED)
    return [G.edges[a, b]['event'] for a, b in zip(path[:-1], path[1:])]


def next_phase(graph, phase, event):
    '''
    Look up the phase reached from `phase` on `event`, or ``None`` when the
    transition is not defined.
    '''
    for _, target, data in graph.out_edges(phase, data=True):
        if data['event'] == event:
            return target
    return None


class HandshakeParty:
    '''
    One side of a handshake.

    Parameters
    ----------
    role : :class:`Role`
    mode : :class:`Mode`
    pmk : array of 0/1
        256 bits
    address : array of 0/1, optional
        48-bit link address, needed in standard mode
    '''
    def __init__(self, role, mode, pmk, address=None):
        self.role = Role(role)
        self.mode = Mode(mode)
        self.pmk = np.asarray(pmk, dtype=np.uint8)
        _check_length('pmk', self.pmk, PMK_BITS)
        self.address = address
        self.graph = transition_graph(self.role, self.mode)
        self.phase = Phase.IDLE
        self.abort_reason = None
        self.history = []
        self.anonce = None
        self.snonce = None
        self.hierarchy = None
        self.qmic = None

    def __repr__(self):
        return '<HandshakeParty {} {} {}>'.format(
            self.role.value, self.mode.value, self.phase.value)

    @property
    def established(self):
        return self.phase is Phase.ESTABLISHED

    @property
    def aborted(self):
        return self.phase is Phase.ABORTED

    def step(self, event):
        '''
        Advance the state machine on `event`.

        Aborted is absorbing and Established ignores further events. Any
        other event without a matching transition aborts the party with
        ``AbortReason.PROTOCOL_VIOLATION``.

        Returns
        -------
        :class:`Phase`
        '''
        if self.phase in (Phase.ABORTED, Phase.ESTABLISHED):
            return self.phase
        target = next_phase(self.graph, self.phase, event)
        if target is None:
            logger.debug('%s: %s not allowed in %s', self.role.value, event,
                         self.phase.value)
            self.abort(AbortReason.PROTOCOL_VIOLATION)
        else:
            self.phase = target
            self.history.append(event)
        return self.phase

    def abort(self, reason):
        if self.phase is not Phase.ABORTED:
            self.phase = Phase.ABORTED
            self.abort_reason = AbortReason(reason)

    def derive_standard(self, peer_address):
        ptk = derive_ptk_standard(self.pmk, self.anonce, self.snonce,
                                  self.address, peer_address)
        self.hierarchy = KeyHierarchy.from_ptk(self.pmk, ptk, Mode.STANDARD)

    def install_quantum_key(self, quantum_key):
        '''
        Strip a 384-bit quantum key into the 256-bit PTK and compute this
        party's Q-MIC from the remaining 128 bits.
        '''
        quantum_key = np.asarray(quantum_key, dtype=np.uint8)
        _check_length('quantum key', quantum_key, QUANTUM_KEY_BITS)
        self.hierarchy = KeyHierarchy.from_ptk(
            self.pmk, quantum_key[:PTK_BITS_QUANTUM], Mode.QUANTUM)
        self.qmic = compute_qmic(quantum_key, self.pmk)


# ==================== Frames and link =======================


@dataclass(frozen=True)
class HandshakeFrame:
    '''
    A handshake message. `fields` maps field names to byte strings.
    '''
    sender: Role
    kind: str
    fields: dict = field(default_factory=dict)
    sent_at_ms: float = 0.0

    def __getitem__(self, name):
        return self.fields[name]

    def body(self):
        '''
        The bytes covered by the MIC: the kind and every field but ``mic``.
        '''
        parts = [self.kind.encode()]
        for name in sorted(self.fields):
            if name != 'mic':
                parts.append(name.encode() + b'=' + self.fields[name])
        return b'|'.join(parts)

    def with_field(self, name, value):
        fields = dict(self.fields)
        fields[name] = value
        return replace(self, fields=fields)

    def flip_bit(self, name, bit):
        '''
        Return a copy with one bit of field `name` inverted.
        '''
        value = bytearray(self.fields[name])
        value[bit // 8] ^= 0x80 >> (bit % 8)
        return self.with_field(name, bytes(value))


class HandshakeLink:
    '''
    Delivers handshake frames between the two parties on a virtual clock.

    Parameters
    ----------
    latency_ms : float, optional
        delivery time of every frame
    drop : iterable, optional
        frame kinds (``"msg3"``) or frame positions (0 for the first frame
        sent) that are never delivered
    tamper : callable, optional
        ``tamper(frame) -> frame`` applied to every delivered frame
    delays : dict, optional
        extra delivery time per frame kind
    '''
    def __init__(self, latency_ms=1.0, drop=(), tamper=None, delays=None):
        self.latency_ms = latency_ms
        self.drop = set(drop)
        self.tamper = tamper
        self.delays = dict(delays or {})
        self.clock_ms = 0.0
        self.frames = []

    def deliver(self, frame, timeout_ms):
        '''
        Send `frame` and return what the peer receives, or ``None`` if
        nothing arrives before `timeout_ms`.
        '''
        frame = replace(frame, sent_at_ms=self.clock_ms)
        index = len(self.frames)
        self.frames.append(frame)
        delay = self.latency_ms + self.delays.get(frame.kind, 0.0)
        if frame.kind in self.drop or index in self.drop or \
                delay > timeout_ms:
            self.clock_ms += timeout_ms
            logger.debug('%s from %s lost', frame.kind, frame.sender.value)
            return None
        self.clock_ms += delay
        if self.tamper is not None:
            frame = self.tamper(frame)
        return frame


@dataclass
class HandshakeResult:
    '''
    Outcome of a handshake run.

    Attributes
    ----------
    mode : :class:`Mode`
    authenticator, supplicant : :class:`HandshakeParty`
    link : :class:`HandshakeLink`
    abort_reason : :class:`AbortReason` or None
        the first failure detected
    sessions : list of :class:`qkdsim.session.SessionTranscript`
        the QKD sessions run by a quantum handshake, retries included
    '''
    mode: Mode
    authenticator: HandshakeParty
    supplicant: HandshakeParty
    link: HandshakeLink
    abort_reason: AbortReason = None
    sessions: list = field(default_factory=list)

    @property
    def established(self):
        return self.authenticator.established and self.supplicant.established

    @property
    def outcome(self):
        if self.abort_reason is not None:
            return self.abort_reason.value
        return Phase.ESTABLISHED.value if self.established else \
            'incomplete'

    @property
    def frames(self):
        return list(self.link.frames)

    @property
    def clock_ms(self):
        return self.link.clock_ms

    @property
    def retries(self):
        return max(len(self.sessions) - 1, 0)

    def fail(self, reason, detected_by=None):
        '''
        Record `reason`. The detecting party aborts with it and the peer,
        left waiting for a message that never comes, aborts with Timeout.
        With no detecting party both abort with `reason`.
        '''
        reason = AbortReason(reason)
        if self.abort_reason is None:
            self.abort_reason = reason
        for party in (self.authenticator, self.supplicant):
            if detected_by is None or party is detected_by:
                party.abort(reason)
            else:
                party.abort(AbortReason.TIMEOUT)
        logger.info('%s handshake aborted: %s', self.mode.value, reason.value)
        return self

    def to_log(self):
        lines = ['# {} handshake: {}'.format(self.mode.value, self.outcome)]
        for frame in self.link.frames:
            lines.append('{:10.1f} {:>13s} {:<5s} {}'.format(
                frame.sent_at_ms, frame.sender.value, frame.kind,
                ','.join(sorted(frame.fields))))
        for session in self.sessions:
            lines.append(session.to_log().rstrip('\n'))
        return '\n'.join(lines) + '\n'


def _transfer(result, sender, receiver, frame, timeout_ms):
    sender.step('send:' + frame.kind)
    delivered = result.link.deliver(frame, timeout_ms)
    if delivered is None:
        result.fail(AbortReason.TIMEOUT)
        return None
    receiver.step('recv:' + frame.kind)
    if receiver.aborted:
        result.fail(receiver.abort_reason, detected_by=receiver)
        return None
    return delivered


def _verify_mic(result, party, frame):
    expected = compute_mic(party.hierarchy.kck, frame.body())
    if not hmac.compare_digest(expected, frame.fields.get('mic', b'')):
        result.fail(AbortReason.MIC_MISMATCH, detected_by=party)
        return False
    return True


# ==================== Handshakes =======================


def run_standard_handshake(pmk, rng, link=None, timeout_ms=1000.0,
                           supplicant_pmk=None, addresses=None):
    '''
    Run the nonce based 4-way handshake.

    Msg1 carries the ANonce; Msg2 the SNonce and a MIC; Msg3 the ANonce,
    the install flag and a MIC; Msg4 a MIC. Every MIC is checked on
    receipt with the receiver's own KCK.

    Parameters
    ----------
    pmk : array of 0/1
        the authenticator's 256-bit PMK
    rng : :class:`numpy.random.Generator`
        draws nonces and, when not given, addresses
    link : :class:`HandshakeLink`, optional
    timeout_ms : float, optional
        deadline for each awaited message
    supplicant_pmk : array of 0/1, optional
        the supplicant's PMK; defaults to `pmk`
    addresses : (array, array), optional
        48-bit authenticator and supplicant addresses

    Returns
    -------
    :class:`HandshakeResult`
    '''
    link = HandshakeLink() if link is None else link
    if supplicant_pmk is None:
        supplicant_pmk = pmk
    if addresses is None:
        addresses = tuple(rng.integers(0, 2, size=ADDRESS_BITS,
                                       dtype=np.uint8) for _ in range(2))
    auth = HandshakeParty(Role.AUTHENTICATOR, Mode.STANDARD, pmk,
                          addresses[0])
    supp = HandshakeParty(Role.SUPPLICANT, Mode.STANDARD, supplicant_pmk,
                          addresses[1])
    result = HandshakeResult(Mode.STANDARD, auth, supp, link)

    auth.anonce = rng.integers(0, 2, size=NONCE_BITS, dtype=np.uint8)
    msg1 = HandshakeFrame(Role.AUTHENTICATOR, 'msg1',
                          {'anonce': bits_to_bytes(auth.anonce)})
    frame = _transfer(result, auth, supp, msg1, timeout_ms)
    if frame is None:
        return result

    supp.anonce = bytes_to_bits(frame['anonce'], NONCE_BITS)
    supp.snonce = rng.integers(0, 2, size=NONCE_BITS, dtype=np.uint8)
    supp.derive_standard(auth.address)
    msg2 = HandshakeFrame(Role.SUPPLICANT, 'msg2',
                          {'snonce': bits_to_bytes(supp.snonce)})
    msg2 = msg2.with_field('mic', compute_mic(supp.hierarchy.kck,
                                              msg2.body()))
    frame = _transfer(result, supp, auth, msg2, timeout_ms)
    if frame is None:
        return result

    auth.snonce = bytes_to_bits(frame['snonce'], NONCE_BITS)
    auth.derive_standard(supp.address)
    if not _verify_mic(result, auth, frame):
        return result
    msg3 = HandshakeFrame(Role.AUTHENTICATOR, 'msg3',
                          {'anonce': bits_to_bytes(auth.anonce),
                           'install': b'\x01'})
    msg3 = msg3.with_field('mic', compute_mic(auth.hierarchy.kck,
                                              msg3.body()))
    frame = _transfer(result, auth, supp, msg3, timeout_ms)
    if frame is None or not _verify_mic(result, supp, frame):
        return result
    if frame['anonce'] != bits_to_bytes(supp.anonce) or \
            frame['install'] != b'\x01':
        result.fail(AbortReason.PROTOCOL_VIOLATION, detected_by=supp)
        return result

    msg4 = HandshakeFrame(Role.SUPPLICANT, 'msg4')
    msg4 = msg4.with_field('mic', compute_mic(supp.hierarchy.kck,
                                              msg4.body()))
    frame = _transfer(result, supp, auth, msg4, timeout_ms)
    supp.step('install')
    if frame is None or not _verify_mic(result, auth, frame):
        return result
    auth.step('install')
    logger.info('standard handshake established after %.1f ms',
                link.clock_ms)
    return result


def run_quantum_handshake(pmk, cfg, eve, params, rng, link=None,
                          timeout_ms=1000.0, max_retries=3,
                          supplicant_pmk=None):
    '''
    Run the quantum 4-way handshake.

    Both parties switch to the quantum channel and run QKD sessions, the
    supplicant sending photons and the authenticator measuring them,
    until one yields at least 384 key bits. A session that aborts on its
    QBER ends the handshake; a session that runs out of key is retried
    with fresh pulses up to `max_retries` times. Each party strips its 384
    key bits into a 256-bit PTK and a Q-MIC; the Q-MICs are exchanged,
    authenticator first, and checked. No nonce is ever sent.

    Parameters
    ----------
    pmk : array of 0/1
        the authenticator's 256-bit PMK
    cfg : :class:`qkdsim.channel.ChannelConfig`
    eve : :class:`qkdsim.channel.EveStrategy`
    params : :class:`qkdsim.session.QkdParams`
    rng : :class:`numpy.random.Generator`
    link : :class:`HandshakeLink`, optional
    timeout_ms : float, optional
    max_retries : int, optional
    supplicant_pmk : array of 0/1, optional

    Returns
    -------
    :class:`HandshakeResult`
    '''
    link = HandshakeLink() if link is None else link
    if supplicant_pmk is None:
        supplicant_pmk = pmk
    auth = HandshakeParty(Role.AUTHENTICATOR, Mode.QUANTUM, pmk)
    supp = HandshakeParty(Role.SUPPLICANT, Mode.QUANTUM, supplicant_pmk)
    result = HandshakeResult(Mode.QUANTUM, auth, supp, link)
    auth.step('start:qkd')
    supp.step('start:qkd')

    for attempt in range(max_retries + 1):
        session = run_qkd_session(params, cfg, eve, rng)
        result.sessions.append(session)
        link.clock_ms += session.clock_ms
        if session.abort_reason == QBER_THRESHOLD_EXCEEDED:
            return result.fail(AbortReason.QBER_THRESHOLD_EXCEEDED)
        if session.completed and \
                session.sender_key.length >= QUANTUM_KEY_BITS:
            break
        logger.info('quantum round %d gave no usable key (%s), retrying',
                    attempt + 1, session.abort_reason or 'short key')
    else:
        return result.fail(AbortReason.RETRIES_EXHAUSTED)

    supp.install_quantum_key(session.sender_key.bits[:QUANTUM_KEY_BITS])
    auth.install_quantum_key(session.receiver_key.bits[:QUANTUM_KEY_BITS])

    frame = _transfer(result, auth, supp,
                      HandshakeFrame(Role.AUTHENTICATOR, 'qmic',
                                     {'qmic': auth.qmic.to_bytes()}),
                      timeout_ms)
    if frame is None:
        return result
    if not hmac.compare_digest(frame['qmic'], supp.qmic.to_bytes()):
        return result.fail(AbortReason.QMIC_MISMATCH, detected_by=supp)

    frame = _transfer(result, supp, auth,
                      HandshakeFrame(Role.SUPPLICANT, 'qmic',
                                     {'qmic': supp.qmic.to_bytes()}),
                      timeout_ms)
    if frame is None:
        return result
    if not hmac.compare_digest(frame['qmic'], auth.qmic.to_bytes()):
        return result.fail(AbortReason.QMIC_MISMATCH, detected_by=auth)
    supp.step('install')
    auth.step('install')
    logger.info('quantum handshake established after %d round(s)',
                len(result.sessions))
    return result


@dataclass(frozen=True)
class ProtectedFrame:
    counter: int
    ciphertext: bytes
    plaintext: bytes


def exchange_protected_frames(result, payloads, gaps_ms=None,
                              response_interval_ms=1000.0):
    '''
    Send data frames from the authenticator to the supplicant under the
    installed temporal keys.

    Before each frame the link clock advances by the matching entry of
    `gaps_ms`. If a gap exceeds `response_interval_ms` the supplicant
    de-authenticates: both parties end Aborted(Deauthenticated) and no
    further frame is sent.

    Parameters
    ----------
    result : :class:`HandshakeResult`
        an established handshake
    payloads : list of bytes
    gaps_ms : list of float, optional
        idle time before each frame, 0 by default
    response_interval_ms : float, optional

    Returns
    -------
    list of :class:`ProtectedFrame`
        frames delivered, with the supplicant's decryption

    Raises
    ------
    ValueError
        if the handshake did not establish
    '''
    if not result.established:
        raise ValueError('data frames need an established handshake')
    if gaps_ms is None:
        gaps_ms = [0.0] * len(payloads)
    delivered = []
    for counter, (payload, gap) in enumerate(zip(payloads, gaps_ms)):
        result.link.clock_ms += gap
        if gap > response_interval_ms:
            result.fail(AbortReason.DEAUTHENTICATED)
            break
        ciphertext = encrypt_demo_frame(result.authenticator.hierarchy.tk,
                                        payload, counter)
        plaintext = encrypt_demo_frame(result.supplicant.hierarchy.tk,
                                       ciphertext, counter)
        delivered.append(ProtectedFrame(counter, ciphertext, plaintext))
    return delivered
