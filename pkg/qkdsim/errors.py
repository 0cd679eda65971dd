#!/usr/bin/env python
"""
Exceptions raised by qkdsim
"""


class QkdError(Exception):
    '''
    Base class for every error raised by qkdsim.
    '''


class ConfigInvalid(QkdError, ValueError):
    '''
    A scenario or configuration object holds values outside their
    documented ranges.

    Parameters
    ----------
    errors : list of str
        one message per offending field, e.g.
        ``"eve.fraction: must lie in [0, 1], got 1.5"``
    '''
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        QkdError.__init__(self, '; '.join(self.errors))


class UnknownParameter(QkdError, KeyError):
    '''
    A sweep or override names a field that does not exist.
    '''
    def __str__(self):
        return 'unknown parameter {!r}'.format(self.args[0])


class KeyTooShort(QkdError, ValueError):
    '''
    A key is below the minimum length an operation needs.
    '''


class LengthMismatch(QkdError, ValueError):
    '''
    The two parties' keys differ in length.
    '''


class BadLength(QkdError, ValueError):
    '''
    A key handed to the handshake layer has the wrong number of bits.
    '''


class KeyExhausted(QkdError):
    '''
    Leakage and the security parameter consume the whole reconciled key,
    so privacy amplification has nothing left to output.
    '''


class AbortQber(QkdError):
    '''
    The estimated quantum bit error rate exceeds the abort threshold.

    Parameters
    ----------
    estimate : :class:`qkdsim.postprocessing.ErrorEstimate`
    '''
    def __init__(self, estimate):
        self.estimate = estimate
        QkdError.__init__(
            self,
            'QBER {:.4f} exceeds threshold {:.4f}'.format(
                estimate.qber, estimate.threshold))


class ReportIntegrityError(QkdError, ValueError):
    '''
    A loaded report's aggregates disagree with its rows.
    '''
