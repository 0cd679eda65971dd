#!/usr/bin/env python

# Essential package imports
import numpy as np


def parity(bits):
    '''
    Return the XOR of all entries of `bits`.

    Parameters
    ----------
    bits : array of 0/1

    Returns
    -------
    int
    '''
    return int(np.count_nonzero(bits) & 1)


def hamming_distance(a, b):
    '''
    Count the positions where two equal length bit arrays differ.

    Parameters
    ----------
    a, b : array of 0/1

    Returns
    -------
    int
    '''
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError('bit arrays must have equal shape')
    return int(np.count_nonzero(a != b))


def error_rate(a, b):
    '''
    Fraction of positions where `a` and `b` differ. Empty arrays give 0.

    Parameters
    ----------
    a, b : array of 0/1

    Returns
    -------
    float
    '''
    if len(a) == 0:
        return 0.0
    return hamming_distance(a, b) / float(len(a))


def binary_entropy(p):
    '''
    Binary Shannon entropy h(p) in bits, with h(0) = h(1) = 0.

    Parameters
    ----------
    p : float

    Returns
    -------
    float
    '''
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def uniformity_pvalue(bits):
    '''
    p-value of a χ² goodness of fit test of `bits` against a fair coin.

    Uses :func:`scipy.stats.chisquare`.

    Parameters
    ----------
    bits : array of 0/1

    Returns
    -------
    float
    '''
    from scipy.stats import chisquare

    ones = int(np.count_nonzero(bits))
    zeros = len(bits) - ones
    return float(chisquare([zeros, ones]).pvalue)


def binomial_bounds(n, p, sigmas=3.0):
    '''
    Return the interval ``n*p ± sigmas*sqrt(n*p*(1-p))`` of a binomial count.

    Parameters
    ----------
    n : int
        number of trials
    p : float
        success probability
    sigmas : float, optional

    Returns
    -------
    (float, float)
    '''
    from scipy.stats import binom

    mean, var = binom.stats(n, p, moments='mv')
    spread = sigmas * np.sqrt(var)
    return float(mean - spread), float(mean + spread)


def summarise(df, columns):
    '''
    Mean and standard deviation of the numeric `columns` of `df`.

    Parameters
    ----------
    df : :class:`pandas.DataFrame`
    columns : list of str

    Returns
    -------
    dict
        ``{"mean": {column: value}, "std": {column: value}}``; a value
        is ``None`` where it is undefined (fewer than two rows for std, or
        only missing values).
    '''
    numeric = df[columns].apply(lambda c: c.astype(float))
    means = numeric.mean()
    stds = numeric.std(ddof=1)

    def clean(series):
        return {k: (None if np.isnan(v) else float(v))
                for k, v in series.items()}

    return {'mean': clean(means), 'std': clean(stds)}
