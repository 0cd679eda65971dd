import json
import os
import pytest
import pandas as pd
import qkdsim.datasets as datasets
from qkdsim.classes import RunReport, REPORT_COLUMNS
from qkdsim.errors import ConfigInvalid, UnknownParameter
from qkdsim.scripts.useful_functions import read_in_flat, read_in_scenario, \
    parse_overrides, write_out_report
from qkdsim.lab import run_scenario
from qkdsim.wrappers.qkd_from_scenario import main as qkd_main, \
    setup_argparser
from qkdsim.wrappers.handshake_from_scenario import main as handshake_main


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / 'scenario.txt'
    path.write_text('# a comment line\n'
                    'protocol = bb84   # trailing comment\n'
                    '\n'
                    'mode = qkd_only\n'
                    'n_pulses = 2000\n'
                    'eve.kind = intercept\n'
                    'eve.fraction = 0.5\n')
    return str(path)


def test_read_in_flat_skips_comments(scenario_file):
    flat = read_in_flat(scenario_file)
    assert flat == {'protocol': 'bb84', 'mode': 'qkd_only',
                    'n_pulses': '2000', 'eve.kind': 'intercept',
                    'eve.fraction': '0.5'}


def test_overrides_take_precedence(scenario_file):
    scenario = read_in_scenario(scenario_file,
                                ['eve.fraction=0.25', 'trials = 4'])
    assert scenario.eve_fraction == 0.25
    assert scenario.trials == 4
    assert scenario.eve_kind == 'intercept_resend'
    assert scenario.protocol == 'bb84'


def test_bad_line(tmp_path):
    path = tmp_path / 'bad.txt'
    path.write_text('protocol = bb84\nthis line has no value\n')
    with pytest.raises(ConfigInvalid) as e:
        read_in_flat(str(path))
    assert e.value.errors[0].startswith('line 2')


def test_bad_override():
    with pytest.raises(ConfigInvalid):
        parse_overrides(['trials'])


def test_unknown_override():
    with pytest.raises(UnknownParameter):
        read_in_scenario(overrides=['eve.budget=2'])


def test_invalid_value_is_rejected():
    with pytest.raises(ConfigInvalid):
        read_in_scenario(overrides=['channel.loss=1.0'])


def test_write_out_report(tmp_path):
    scenario = read_in_scenario(overrides=['mode=qkd_only', 'n_pulses=2000',
                                           'protocol=bb84', 'trials=2'])
    report = run_scenario(scenario)
    output_dir = str(tmp_path / 'nested' / 'out')
    csv_file, json_file = write_out_report(report, output_dir)
    assert os.path.basename(csv_file) == 'report.csv'
    df = pd.read_csv(csv_file)
    assert list(df.columns) == REPORT_COLUMNS
    assert len(df) == 2
    with open(json_file) as f:
        assert len(RunReport.from_json(f.read())) == 2


def test_shipped_scenarios():
    assert len(datasets.scenarios._data()) == len(datasets.scenarios.SCENARIOS)
    default = datasets.scenarios.import_scenario('default')
    assert default.protocol == 'sarg04'
    assert default.mode == 'full_handshake'
    assert default.trials == 5
    pns = datasets.scenarios.import_scenario('pns_weak_laser')
    assert pns.eve_kind == 'pns'
    assert pns.source().mean_photon_number == 0.5
    with pytest.raises(KeyError):
        datasets.scenarios.scenario_file('missing')


# ==================== Command line =======================

SMALL = ['--set', 'n_pulses=2000', '--set', 'trials=2']


def test_qkd_run(tmp_path):
    out = str(tmp_path)
    status = qkd_main(
        ['run', '--out', out, '--transcripts', '--set', 'mode=qkd_only',
         '--set', 'protocol=bb84'] + SMALL)
    assert status == 0
    assert sorted(os.listdir(out)) == ['report.csv', 'report.json',
                                       'transcript_0.log',
                                       'transcript_1.log']


def test_qkd_sweep(tmp_path):
    out = str(tmp_path)
    status = qkd_main(
        ['sweep', '--out', out, '--param', 'eve.fraction',
         '--values', '0,1', '--set', 'mode=qkd_only', '--set',
         'protocol=bb84', '--set', 'eve.kind=intercept'] + SMALL)
    assert status == 0
    combined = pd.read_csv(os.path.join(out, 'report.csv'))
    assert list(combined.columns) == ['eve.fraction'] + REPORT_COLUMNS
    assert len(combined) == 4
    with open(os.path.join(out, 'report_1.0.json')) as f:
        document = json.load(f)
    assert document['scenario']['eve.fraction'] == 1.0


def test_qkd_sweep_keeps_every_transcript(tmp_path):
    out = str(tmp_path)
    status = qkd_main(
        ['sweep', '--out', out, '--param', 'eve.fraction', '--values', '0,1',
         '--transcripts', '--set', 'mode=qkd_only', '--set',
         'protocol=bb84', '--set', 'eve.kind=intercept'] + SMALL)
    assert status == 0
    logs = sorted(f for f in os.listdir(out) if f.endswith('.log'))
    assert logs == ['transcript_0.0_0.log', 'transcript_0.0_1.log',
                    'transcript_1.0_0.log', 'transcript_1.0_1.log']


def test_qkd_sweep_repeated_value_exit_code(tmp_path):
    status = qkd_main(
        ['sweep', '--out', str(tmp_path), '--param', 'eve.fraction',
         '--values', '0,0.0'] + SMALL)
    assert status == 2
    assert os.listdir(str(tmp_path)) == []


def test_qkd_bad_scenario_exit_code(tmp_path):
    status = qkd_main(
        ['run', '--out', str(tmp_path), '--set', 'channel.flip=0.9'])
    assert status == 2
    assert os.listdir(str(tmp_path)) == []


def test_standard_handshake_command(tmp_path):
    out = str(tmp_path)
    status = handshake_main(
        ['run', '--standard', '--out', out] + SMALL)
    assert status == 0
    df = pd.read_csv(os.path.join(out, 'report.csv'))
    assert list(df['handshake_outcome']) == ['established'] * 2


def test_argparser_requires_out():
    with pytest.raises(SystemExit):
        setup_argparser(['run'])
