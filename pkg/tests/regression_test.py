import unittest
from tests.write_fixtures import generate_fixture_hashes, unpickle_hash
import qkdsim.datasets as datasets


class FixturesTest(unittest.TestCase):

    # ------------------- setup and teardown ---------------------------
    @classmethod
    def setUpClass(cls):
        cls.hash_dict_original = unpickle_hash()
        print('\nin set up - generating the scenario reports twice')
        cls.hash_dict_new = generate_fixture_hashes(
            folder='temporary_test_fixtures')
        cls.hash_dict_again = generate_fixture_hashes(
            folder='temporary_test_fixtures_again')

    # --------------------------- Tests --------------------------------

    def test_every_scenario_writes_reports(self):
        for name in datasets.scenarios.SCENARIOS:
            self.assertIn(name + '/report.csv', self.hash_dict_new)
            self.assertIn(name + '/report.json', self.hash_dict_new)
            self.assertIn(name + '/transcript_0.log', self.hash_dict_new)

    def test_reports_are_reproducible(self):
        # the same scenario gives byte identical files
        self.assertEqual(self.hash_dict_new, self.hash_dict_again)

    def test_reports_match_fixture(self):
        if self.hash_dict_original is None:
            self.skipTest('no fixture hashes written yet, run '
                          'tests/write_fixtures.py')
        self.assertEqual(self.hash_dict_new, self.hash_dict_original)


if __name__ == '__main__':
    unittest.main()
