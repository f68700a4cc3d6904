#!/usr/bin/python

"""Amplitude time series and fixed-size spectrograms

Both types are thin wrappers around read-only float64 numpy arrays,
time-major: row t of an AmplitudeSeries and column t of a Spectrogram
are the amplitudes of packet t.
"""

import numpy

from csiaug.csi import amplitudes, DEFAULT_SELECTION
from csiaug.errors import BoundsError, ParameterError

DEFAULT_RATE_HZ = 100
DEFAULT_WIDTH = 400
DEFAULT_HEIGHT = 52


def _frozen(values):
    values = numpy.array(values, dtype=numpy.float64)
    values.setflags(write=False)
    return values


class AmplitudeSeries(object):
    """Time-ordered per-packet amplitude vectors

    :param rows: (n, h) array-like of finite, non-negative amplitudes
    :param rate_hz: nominal packet rate, metadata only
    """
    __slots__ = ('rows', 'rate_hz')

    def __init__(self, rows, rate_hz=DEFAULT_RATE_HZ):
        rows = numpy.asarray(rows, dtype=numpy.float64)
        if rows.ndim == 1 and rows.size == 0:
            rows = rows.reshape(0, DEFAULT_HEIGHT)
        if rows.ndim != 2:
            raise BoundsError("amplitude rows must be two-dimensional")
        if not numpy.all(numpy.isfinite(rows)) or numpy.any(rows < 0):
            raise BoundsError("amplitudes must be finite and non-negative")
        self.rows = _frozen(rows)
        self.rate_hz = rate_hz

    def __len__(self):
        return self.rows.shape[0]

    @property
    def height(self):
        return self.rows.shape[1]

    @property
    def duration_s(self):
        return len(self) / float(self.rate_hz)


class Spectrogram(object):
    """w x h amplitude matrix, values[t, k] is subcarrier k at time t"""
    __slots__ = ('values',)

    def __init__(self, values):
        values = numpy.asarray(values, dtype=numpy.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise BoundsError("spectrogram must be a non-empty 2-D matrix, got shape %r" % (
                values.shape,
            ))
        if not numpy.all(numpy.isfinite(values)) or numpy.any(values < 0):
            raise BoundsError("spectrogram values must be finite and non-negative")
        self.values = _frozen(values)

    @property
    def w(self):
        return self.values.shape[0]

    @property
    def h(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def column(self, t):
        return self.values[t]

    def __eq__(self, other):
        if not isinstance(other, Spectrogram):
            return NotImplemented
        return numpy.array_equal(self.values, other.values)

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __repr__(self):
        return 'Spectrogram(w=%d, h=%d)' % self.values.shape


def series_from_records(records, sel=None, rate_hz=DEFAULT_RATE_HZ):
    if sel is None:
        sel = DEFAULT_SELECTION
    records = list(records)
    if not records:
        return AmplitudeSeries(numpy.zeros((0, len(sel.indices))), rate_hz)
    return AmplitudeSeries(
        numpy.stack([amplitudes(r, sel) for r in records]), rate_hz
    )


def trim(series, start, end):
    """Keep rows [start, end) of the series"""
    n = len(series)
    if not (0 <= start < end <= n):
        raise BoundsError("trim(%d, %d) invalid for a series of %d rows" % (start, end, n))
    return AmplitudeSeries(series.rows[start:end], series.rate_hz)


def segment_count(n, window, hop):
    if n < window:
        return 0
    return (n - window) // hop + 1


def segment(series, window=DEFAULT_WIDTH, hop=DEFAULT_WIDTH):
    """Cut a series into window-row spectrograms every hop rows

    Trailing rows that do not fill a whole window are dropped.
    """
    if window < 1 or hop < 1:
        raise ParameterError("window and hop must be >= 1 (got %r, %r)" % (window, hop))
    count = segment_count(len(series), window, hop)
    return [
        Spectrogram(series.rows[i * hop:i * hop + window])
        for i in range(count)
    ]
