import pytest
import numpy as np
import pandas as pd
import qkdsim.stats_functions as sf


def test_parity_and_distance():
    assert sf.parity([1, 0, 1, 1]) == 1
    assert sf.parity(np.zeros(8, dtype=np.uint8)) == 0
    assert sf.hamming_distance([0, 1, 1], [1, 1, 0]) == 2
    with pytest.raises(ValueError):
        sf.hamming_distance([0, 1], [0, 1, 1])


def test_error_rate_of_empty_key():
    assert sf.error_rate(np.array([]), np.array([])) == 0.0
    assert sf.error_rate([0, 0, 1, 1], [0, 1, 1, 0]) == 0.5


def test_binary_entropy():
    assert sf.binary_entropy(0.5) == pytest.approx(1.0)
    assert sf.binary_entropy(0.0) == 0.0
    assert sf.binary_entropy(1.0) == 0.0
    assert sf.binary_entropy(0.11) == pytest.approx(sf.binary_entropy(0.89))
    assert sf.binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-3)


def test_uniformity_pvalue():
    rng = np.random.default_rng(11)
    assert sf.uniformity_pvalue(rng.integers(0, 2, 10**5)) > 1e-3
    biased = (rng.random(10**5) < 0.6).astype(np.uint8)
    assert sf.uniformity_pvalue(biased) < 1e-3


def test_binomial_bounds():
    low, high = sf.binomial_bounds(10**4, 0.5, sigmas=2.0)
    assert low == pytest.approx(4900.0)
    assert high == pytest.approx(5100.0)


def test_summarise_single_row():
    df = pd.DataFrame({'qber': [0.1], 'final_key_length': [12]})
    summary = sf.summarise(df, ['qber', 'final_key_length'])
    assert summary['mean'] == {'qber': 0.1, 'final_key_length': 12.0}
    assert summary['std'] == {'qber': None, 'final_key_length': None}
