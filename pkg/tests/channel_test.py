import pytest
import unittest
import numpy as np
import qkdsim.channel as ch
import qkdsim.quantum_core as qc
from qkdsim.errors import ConfigInvalid


def random_train(n, source, rng):
    bits = rng.integers(0, 2, size=n)
    bases = rng.integers(0, 2, size=n)
    return qc.emit_train(source, bits, bases, rng)


class Configuration(unittest.TestCase):
    def test_flip_out_of_range(self):
        with pytest.raises(ConfigInvalid) as e:
            ch.ChannelConfig(flip_probability=0.7, loss_probability=1.0)
        self.assertEqual(len(e.value.errors), 2)
        self.assertTrue(e.value.errors[0].startswith('channel.flip'))

    def test_eve_fraction_out_of_range(self):
        with pytest.raises(ConfigInvalid):
            ch.EveStrategy.intercept_resend(1.5)

    def test_unknown_eve(self):
        with pytest.raises(ConfigInvalid):
            ch.EveStrategy('jam')


class QuantumChannel(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.single = qc.SourceModel.single_photon()

    def test_ideal_channel_leaves_pulses_alone(self):
        rng = np.random.default_rng(10)
        train = random_train(1000, self.single, rng)
        before = train.copy()
        received, knowledge = ch.transmit_train(
            train, ch.ChannelConfig(), ch.EveStrategy.none(), rng)
        np.testing.assert_array_equal(received.polarization,
                                      before.polarization)
        np.testing.assert_array_equal(received.photon_count,
                                      before.photon_count)
        self.assertEqual(knowledge.intercepted, {})
        self.assertEqual(knowledge.stored_photons, {})

    def test_input_train_is_not_modified(self):
        rng = np.random.default_rng(11)
        train = random_train(1000, self.single, rng)
        before = train.copy()
        ch.transmit_train(train, ch.ChannelConfig(0.5, 0.5),
                          ch.EveStrategy.intercept_resend(), rng)
        np.testing.assert_array_equal(train.polarization, before.polarization)
        np.testing.assert_array_equal(train.photon_count, before.photon_count)

    def test_flip_rate(self):
        rng = np.random.default_rng(12)
        train = random_train(10**5, self.single, rng)
        received, _ = ch.transmit_train(train, ch.ChannelConfig(0.5),
                                        ch.EveStrategy.none(), rng)
        flipped = received.polarization != train.polarization
        assert np.mean(flipped) == pytest.approx(0.5, abs=0.01)
        # flips stay inside the basis
        np.testing.assert_array_equal(qc.state_bases(received.polarization),
                                      qc.state_bases(train.polarization))

    def test_loss_rate(self):
        rng = np.random.default_rng(13)
        train = random_train(10**5, self.single, rng)
        received, _ = ch.transmit_train(
            train, ch.ChannelConfig(loss_probability=0.3),
            ch.EveStrategy.none(), rng)
        assert np.mean(received.photon_count == 0) == pytest.approx(
            0.3, abs=0.01)

    def test_full_intercept_resend(self):
        rng = np.random.default_rng(14)
        train = random_train(500, self.single, rng)
        received, knowledge = ch.transmit_train(
            train, ch.ChannelConfig(), ch.EveStrategy.intercept_resend(1.0),
            rng)
        self.assertEqual(len(knowledge.intercepted), 500)
        for i, (basis, bit) in knowledge.intercepted.items():
            self.assertEqual(received[i].polarization, qc.encode(bit, basis))
            self.assertEqual(received[i].photon_count, 1)

    def test_pns_splits_multi_photon_pulses(self):
        rng = np.random.default_rng(15)
        train = random_train(10**4, qc.SourceModel.weak_laser(0.5), rng)
        received, knowledge = ch.transmit_train(
            train, ch.ChannelConfig(), ch.EveStrategy.photon_number_splitting(),
            rng)
        tagged = np.flatnonzero(train.photon_count >= 2)
        self.assertEqual(sorted(knowledge.stored_photons), list(tagged))
        np.testing.assert_array_equal(received.photon_count[tagged],
                                      train.photon_count[tagged] - 1)
        for i in tagged:
            self.assertEqual(int(knowledge.stored_photons[int(i)]),
                             int(train.polarization[i]))

    def test_single_pulse_transmit_uses_index(self):
        rng = np.random.default_rng(16)
        pulse = qc.PhotonPulse(1, qc.Polarization.D)
        received, knowledge = ch.transmit(
            pulse, ch.ChannelConfig(), ch.EveStrategy.intercept_resend(), rng,
            index=7)
        self.assertEqual(list(knowledge.intercepted), [7])
        self.assertEqual(received.photon_count, 1)


class ClassicalTranscript(unittest.TestCase):
    def test_messages_are_read_only_copies(self):
        channel = ch.ClassicalChannel(latency_ms=2.0)
        payload = np.array([1, 0, 1], dtype=np.uint8)
        message = channel.send(ch.SENDER, 'sift.verdicts', payload)
        payload[0] = 0
        self.assertEqual(int(message.payload[0]), 1)
        with pytest.raises(ValueError):
            message.payload[0] = 0
        self.assertEqual(channel.clock_ms, 2.0)
        self.assertEqual(len(channel), 1)
        self.assertIs(channel.last('sift.verdicts'), message)
        self.assertIsNone(channel.last('amplify.seed'))

    def test_key_correlated_recount(self):
        channel = ch.ClassicalChannel()
        channel.send(ch.RECEIVER, 'sift.bases', np.zeros(100))
        channel.send(ch.SENDER, 'cascade.parity', [1])
        channel.send(ch.SENDER, 'winnow.parity', np.zeros(5))
        channel.send(ch.SENDER, 'winnow.syndrome', np.zeros(6))
        self.assertEqual(channel.key_correlated_bits(), 12)
        self.assertEqual(len(channel.eve_view()), 4)


def test_eve_correct_bits_counts_matches_only():
    knowledge = ch.EveKnowledge(resolved_bits={3: 1, 5: 0, 9: 1})
    kept = np.array([1, 3, 5, 7])
    sender = np.array([0, 1, 1, 0])
    assert ch.eve_correct_bits(knowledge, kept, sender) == 1
