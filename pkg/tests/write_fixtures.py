# -------------------------- Write fixtures ---------------------------
# To regression test our wrappers we need examples. This script
# generates report files for every shipped scenario. We save their
# hashes once, and regression_test.py re-generates the files to test
# them for identicality with the presaved hashes (fixtures). If they
# are found not to be identical it throws up an error.
#
# The point of this is to check that throughout the changes we make to
# qkdsim the reports of a seeded scenario stay the same.
# ---------------------------------------------------------------------
import hashlib
import os
import pickle
import shutil

import qkdsim.datasets as datasets
from qkdsim.wrappers import qkd_from_scenario

FIXTURE_HASH = os.path.join('tests', '.fixture_hash')

# fewer pulses and trials than the shipped files, to save time
OVERRIDES = ['n_pulses=4000', 'trials=2']


def write_fixtures(folder='temporary_test_fixtures'):
    # one sub folder of reports and transcripts per shipped scenario
    for name in datasets.scenarios.SCENARIOS:
        scenario = datasets.scenarios.import_scenario(name, OVERRIDES)
        qkd_from_scenario('run', scenario, os.path.join(folder, name),
                          transcripts=True)


def delete_fixtures(folder):
    print('\ndeleting temporary files')
    shutil.rmtree(folder)


def hash_folder(folder='temporary_test_fixtures'):
    hashes = {}
    for path, directories, files in os.walk(folder):
        for file in sorted(files):
            relative = os.path.relpath(os.path.join(path, file), folder)
            hashes[relative] = hash_file(os.path.join(path, file))
    return hashes


def hash_file(filename):
    m = hashlib.sha256()
    with open(filename, 'rb') as f:
        while True:
            b = f.read(2**10)
            if not b:
                break
            m.update(b)
    return m.hexdigest()


def generate_fixture_hashes(folder='temporary_test_fixtures'):
    # generate the fixtures
    write_fixtures(folder=folder)
    # calculate the hash
    hash_dict = hash_folder(folder=folder)
    # delete the new files
    delete_fixtures(folder)
    return hash_dict


def pickle_hash(hash_dict):
    with open(FIXTURE_HASH, 'wb') as f:
        pickle.dump(hash_dict, f)


def unpickle_hash():
    # None until the fixtures have been written on this machine
    if not os.path.isfile(FIXTURE_HASH):
        return None
    print('loading test fixtures')
    with open(FIXTURE_HASH, 'rb') as f:
        return pickle.load(f)


if __name__ == '__main__':
    if (input("Are you sure you want to update qkdsim's test fixtures? (y/n)")
            == 'y'):
        hash_dict = generate_fixture_hashes()
        pickle_hash(hash_dict)
