import pytest
import unittest
import numpy as np
import qkdsim.session as se
from qkdsim.stats_functions import binary_entropy
from qkdsim.channel import ChannelConfig, EveStrategy
from qkdsim.errors import ConfigInvalid
from qkdsim.quantum_core import SourceModel


def run(seed, cfg=None, eve=None, **params):
    return se.run_qkd_session(se.QkdParams(**params),
                              cfg if cfg is not None else ChannelConfig(),
                              eve if eve is not None else EveStrategy.none(),
                              np.random.default_rng(seed))


class HonestSessions(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.sessions = {}
        for i, protocol in enumerate(('bb84', 'sarg04')):
            for j, strategy in enumerate(('cascade', 'winnow')):
                cls.sessions[protocol, strategy] = run(
                    100 + 10 * i + j, protocol=protocol, n_pulses=20000,
                    reconciliation=strategy)

    def test_final_keys_identical(self):
        for session in self.sessions.values():
            self.assertIsNone(session.abort_reason)
            np.testing.assert_array_equal(session.sender_key.bits,
                                          session.receiver_key.bits)
            self.assertTrue(session.statistics['keys_match'])
            self.assertEqual(session.statistics['qber'], 0.0)

    def test_length_law(self):
        for session in self.sessions.values():
            reconciled = len(session.reconciliation.reference_key)
            self.assertEqual(
                session.sender_key.length,
                reconciled - session.statistics['leaked_bits'] - 32)

    def test_leakage_matches_transcript(self):
        for session in self.sessions.values():
            self.assertEqual(session.statistics['leaked_bits'],
                             session.statistics['transcript_leaked_bits'])

    def test_leakage_ledger_never_decreases(self):
        for session in self.sessions.values():
            stages = [stage for stage, _ in session.leakage_ledger]
            self.assertEqual(stages, ['sift', 'estimate', 'reconcile'])
            counts = [bits for _, bits in session.leakage_ledger]
            self.assertTrue(all(a <= b for a, b in zip(counts, counts[1:])))
            self.assertEqual(counts[-1], session.statistics['leaked_bits'])
            self.assertEqual(counts[-1],
                             session.statistics['transcript_leaked_bits'])

    def test_sarg04_yields_a_full_quantum_key(self):
        session = self.sessions['sarg04', 'cascade']
        self.assertGreaterEqual(session.sender_key.length, 384)

    def test_log_lists_messages_without_payloads(self):
        session = self.sessions['bb84', 'cascade']
        log = session.to_log()
        self.assertIn('sift.bases', log)
        self.assertIn('amplify.seed', log)
        self.assertEqual(log.count('\n'),
                         1 + len(session.decisions)
                         + len(session.statistics) + len(session.messages))

    def test_clock_advances_per_message(self):
        session = self.sessions['sarg04', 'winnow']
        assert session.clock_ms == pytest.approx(0.5 * len(session.messages))


class Aborts(unittest.TestCase):
    def test_intercept_resend_exceeds_threshold(self):
        session = run(120, eve=EveStrategy.intercept_resend(1.0),
                      protocol='bb84', n_pulses=10**5)
        self.assertEqual(session.abort_reason, se.QBER_THRESHOLD_EXCEEDED)
        assert session.statistics['qber'] == pytest.approx(0.25, abs=0.02)
        self.assertIsNone(session.sender_key)

    def test_too_few_pulses(self):
        session = run(121, protocol='sarg04', n_pulses=20)
        self.assertEqual(session.abort_reason, se.KEY_TOO_SHORT)

    def test_security_parameter_exhausts_key(self):
        session = run(122, protocol='bb84', n_pulses=2000,
                      security_parameter=10**6)
        self.assertEqual(session.abort_reason, se.KEY_EXHAUSTED)
        self.assertEqual(session.statistics['final_key_length'], 0)

    def test_invalid_params(self):
        with pytest.raises(ConfigInvalid) as e:
            se.QkdParams(protocol='e91', sample_fraction=1.5)
        self.assertEqual(len(e.value.errors), 2)

    def test_security_parameter_must_be_positive(self):
        with pytest.raises(ConfigInvalid) as e:
            se.QkdParams(security_parameter=0)
        self.assertTrue(e.value.errors[0].startswith('security_parameter'))

def test_noisy_channel_is_reconciled():
    matched = 0
    for seed in range(130, 140):
        session = run(seed, cfg=ChannelConfig(flip_probability=0.05),
                      protocol='bb84', n_pulses=20000)
        assert session.abort_reason is None
        assert session.statistics['qber'] == pytest.approx(0.05, abs=0.02)
        matched += session.statistics['keys_match']
    assert matched >= 9


def test_pns_is_invisible_to_error_estimation():
    cfg = ChannelConfig(source=SourceModel.weak_laser(0.5))
    for protocol in ('bb84', 'sarg04'):
        session = run(140, cfg=cfg, eve=EveStrategy.photon_number_splitting(),
                      protocol=protocol, n_pulses=20000)
        assert session.statistics['qber'] == 0.0
        assert session.statistics['eve_tagged_bits'] > 0
        assert session.statistics['eve_correct_bits'] == \
            session.statistics['eve_resolved_bits']


def test_reconciliation_leaks_at_least_the_shannon_bound():
    session = run(141, cfg=ChannelConfig(flip_probability=0.05),
                  protocol='bb84', n_pulses=20000)
    stats = session.statistics
    reconciled = len(session.reconciliation.reference_key)
    assert stats['shannon_bound_bits'] == int(np.ceil(
        reconciled * binary_entropy(stats['qber'])))
    assert stats['shannon_bound_bits'] > 0
    assert stats['leaked_bits'] >= stats['shannon_bound_bits']
