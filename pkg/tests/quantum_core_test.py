import pytest
import unittest
import numpy as np
import qkdsim.quantum_core as qc
from qkdsim.errors import ConfigInvalid
from qkdsim.stats_functions import uniformity_pvalue


def ideal_train(states):
    states = np.asarray(states, dtype=np.uint8)
    return qc.PulseTrain(np.ones(len(states), dtype=np.int64), states)


class Encoding(unittest.TestCase):
    def test_encode_decode_inverse(self):
        for basis in qc.Basis:
            for bit in (0, 1):
                pol = qc.encode(bit, basis)
                self.assertEqual(qc.decode(pol), (basis, bit))

    def test_named_states(self):
        self.assertEqual(qc.encode(0, qc.Basis.RECTILINEAR), qc.Polarization.H)
        self.assertEqual(qc.encode(1, qc.Basis.RECTILINEAR), qc.Polarization.V)
        self.assertEqual(qc.encode(0, qc.Basis.DIAGONAL), qc.Polarization.D)
        self.assertEqual(qc.encode(1, qc.Basis.DIAGONAL), qc.Polarization.A)

    def test_vectorised_encoding_matches_scalar(self):
        bits = np.array([0, 1, 0, 1])
        bases = np.array([0, 0, 1, 1])
        states = qc.encode_states(bits, bases)
        np.testing.assert_array_equal(states, [0, 1, 2, 3])
        np.testing.assert_array_equal(qc.state_bases(states), bases)
        np.testing.assert_array_equal(qc.state_bits(states), bits)


class Sources(unittest.TestCase):
    def test_bad_source_kind(self):
        with pytest.raises(ConfigInvalid):
            qc.SourceModel('laser_pointer')

    def test_mu_out_of_range(self):
        with pytest.raises(ConfigInvalid):
            qc.SourceModel.weak_laser(0)
        with pytest.raises(ConfigInvalid):
            qc.SourceModel.weak_laser(2.5)

    def test_single_photon_counts(self):
        rng = np.random.default_rng(1)
        counts = qc.SourceModel.single_photon().photon_counts(1000, rng)
        self.assertTrue(np.all(counts == 1))

    def test_weak_laser_poisson_statistics(self):
        rng = np.random.default_rng(2)
        counts = qc.SourceModel.weak_laser(0.5).photon_counts(10**5, rng)
        assert np.mean(counts == 0) == pytest.approx(0.6065, abs=0.01)
        assert np.mean(counts >= 2) == pytest.approx(0.0902, abs=0.005)


class Measurement(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.rng = np.random.default_rng(3)

    def test_matched_basis_is_deterministic(self):
        states = np.array([0, 1, 2, 3] * 50)
        train = ideal_train(states)
        outcome = qc.measure_train(train, qc.state_bases(states), self.rng)
        np.testing.assert_array_equal(outcome, qc.state_bits(states))

    def test_mismatched_basis_is_uniform_and_collapses(self):
        n = 10**4
        states = np.zeros(n, dtype=np.uint8)
        train = ideal_train(states)
        bases = np.ones(n, dtype=np.uint8)
        outcome = qc.measure_train(train, bases, self.rng)
        assert np.mean(outcome) == pytest.approx(0.5, abs=0.03)
        # every pulse now sits in the diagonal basis
        self.assertTrue(np.all(qc.state_bases(train.polarization) == 1))
        again = qc.measure_train(train, bases, self.rng)
        np.testing.assert_array_equal(again, outcome)

    def test_mismatched_outcomes_pass_a_fair_coin_check(self):
        n = 10**5
        for state in range(4):
            states = np.full(n, state, dtype=np.uint8)
            bases = 1 - qc.state_bases(states)
            outcome = qc.measure_train(ideal_train(states), bases, self.rng)
            assert uniformity_pvalue(outcome) > 1e-3

    def test_vacuum_is_not_detected(self):
        train = qc.PulseTrain(np.zeros(4, dtype=np.int64),
                              np.array([0, 1, 2, 3], dtype=np.uint8))
        outcome = qc.measure_train(train, [0, 0, 1, 1], self.rng)
        self.assertTrue(np.all(outcome == qc.NO_DETECTION))

    def test_single_pulse_measure_updates_pulse(self):
        pulse = qc.PhotonPulse(1, qc.Polarization.H)
        bit = qc.measure(pulse, qc.Basis.DIAGONAL, self.rng)
        self.assertIn(bit, (0, 1))
        self.assertEqual(pulse.polarization, qc.encode(bit, qc.Basis.DIAGONAL))

    def test_emit_pulse(self):
        pulse = qc.emit_pulse(qc.SourceModel.single_photon(), 1,
                              qc.Basis.DIAGONAL, self.rng)
        self.assertEqual(pulse.photon_count, 1)
        self.assertEqual(pulse.polarization, qc.Polarization.A)


def test_conclusive_candidate_exclusion_rule():
    H, V, D, A = (int(p) for p in qc.Polarization)
    candidates = np.array([[H, D], [H, D], [H, D], [H, D]])
    measured = np.array([V, H, A, D])
    inferred = qc.conclusive_candidate(measured, candidates)
    # V excludes H, A excludes D, H and D exclude nothing announced
    np.testing.assert_array_equal(inferred, [D, -1, H, -1])
