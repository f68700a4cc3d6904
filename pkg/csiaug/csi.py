#!/usr/bin/python

"""Parsing of raw CSI packet logs

A CSI log is a delimiter-separated text file with one received packet
per line. Which column holds what is described by a ColumnMapping; the
channel estimates themselves are a bracketed, space-separated list of
signed integers holding interleaved (imaginary, real) pairs, e.g.

    1000,1,-41,[3 4 0 0 -7 12 ...]

Everything in this module is a pure function of its inputs.
"""

import logging
import numpy

from csiaug.errors import ParseError, StructuralError, BoundsError

log = logging.getLogger(__name__)

IQ_IMAG_REAL = 'imag_real'
IQ_REAL_IMAG = 'real_imag'

SUBCARRIERS = 52


class ColumnMapping(object):
    """Describes where each CsiRecord field lives in a log line

    :param timestamp: column index of the millisecond timestamp
    :param seq: column index of the packet sequence number
    :param rssi: column index of the RSSI in dBm, or None if the log
      does not have one
    :param csi: column index of the bracketed I/Q array
    :param delimiter: column separator, comma by default
    :param iq_order: IQ_IMAG_REAL (default, as written by ESP32 firmware)
      or IQ_REAL_IMAG
    :param header: if True, a first line whose timestamp column is not
      numeric is skipped by read_csi_log
    """
    __slots__ = ('timestamp', 'seq', 'rssi', 'csi', 'delimiter', 'iq_order', 'header')

    def __init__(self, timestamp=0, seq=1, rssi=2, csi=3, delimiter=',',
                 iq_order=IQ_IMAG_REAL, header=False):
        if iq_order not in (IQ_IMAG_REAL, IQ_REAL_IMAG):
            raise ValueError("iq_order must be %r or %r" % (IQ_IMAG_REAL, IQ_REAL_IMAG))
        if not delimiter or delimiter in '[]-':
            raise ValueError("invalid delimiter %r" % (delimiter,))
        self.timestamp = timestamp
        self.seq = seq
        self.rssi = rssi
        self.csi = csi
        self.delimiter = delimiter
        self.iq_order = iq_order
        self.header = header

    @property
    def width(self):
        """Number of columns a line must have at least"""
        cols = [self.timestamp, self.seq, self.csi]
        if self.rssi is not None:
            cols.append(self.rssi)
        return max(cols) + 1

    def to_dict(self):
        return dict((k, getattr(self, k)) for k in self.__slots__)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def __repr__(self):
        return 'ColumnMapping(%s)' % (', '.join(
            '%s=%r' % (k, getattr(self, k)) for k in self.__slots__
        ),)


class CsiRecord(object):
    """One received CSI packet

    iq is a read-only (n, 2) integer array of (imaginary, real) pairs,
    one row per raw subcarrier slot, whatever order the log used.
    """
    __slots__ = ('timestamp_ms', 'seq', 'rssi_dbm', 'iq')

    def __init__(self, timestamp_ms, seq, rssi_dbm, iq):
        iq = numpy.array(iq, dtype=numpy.int64).reshape(-1, 2)
        iq.setflags(write=False)
        self.timestamp_ms = int(timestamp_ms)
        self.seq = int(seq)
        self.rssi_dbm = None if rssi_dbm is None else int(rssi_dbm)
        self.iq = iq

    @property
    def pairs(self):
        return [tuple(p) for p in self.iq.tolist()]

    def __len__(self):
        return self.iq.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CsiRecord):
            return NotImplemented
        return (
            self.timestamp_ms == other.timestamp_ms and
            self.seq == other.seq and
            self.rssi_dbm == other.rssi_dbm and
            numpy.array_equal(self.iq, other.iq)
        )

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __repr__(self):
        return 'CsiRecord(t=%d, seq=%d, rssi=%r, pairs=%d)' % (
            self.timestamp_ms, self.seq, self.rssi_dbm, len(self)
        )


class SubcarrierSelection(object):
    """Ordered choice of SUBCARRIERS raw slots that make up the spectrogram rows"""
    __slots__ = ('indices', 'name', 'slots')

    def __init__(self, indices, name='custom', slots=64):
        indices = tuple(int(i) for i in indices)
        if len(indices) != SUBCARRIERS:
            raise BoundsError("selection %r has %d indices, need %d" % (
                name, len(indices), SUBCARRIERS
            ))
        if len(set(indices)) != len(indices):
            raise BoundsError("selection %r repeats an index" % (name,))
        bad = [i for i in indices if i < 0 or i >= slots]
        if bad:
            raise BoundsError("selection %r: indices %r outside 0..%d" % (
                name, bad, slots - 1
            ))
        self.indices = indices
        self.name = name
        self.slots = slots

    def __repr__(self):
        return 'SubcarrierSelection(%r)' % (self.name,)


# A 64-point FFT with the L-LTF occupying subcarriers -26..-1 and 1..26.
# ESP32 firmware reports slots in natural FFT order (0..31, then -32..-1);
# some tools shift them so slot = subcarrier + 32.
PRESETS = {
    'lltf52': SubcarrierSelection(
        list(range(38, 64)) + list(range(1, 27)), name='lltf52'
    ),
    'lltf52_shifted': SubcarrierSelection(
        list(range(6, 32)) + list(range(33, 59)), name='lltf52_shifted'
    ),
}
DEFAULT_SELECTION = PRESETS['lltf52']


def selection(name_or_indices):
    """Resolve a preset name or an explicit index list"""
    if isinstance(name_or_indices, SubcarrierSelection):
        return name_or_indices
    if isinstance(name_or_indices, str):
        try:
            return PRESETS[name_or_indices]
        except KeyError:
            raise BoundsError("unknown subcarrier selection preset %r" % (name_or_indices,))
    return SubcarrierSelection(name_or_indices)


def _split_fields(line, delimiter):
    fields = []
    depth = 0
    cur = []
    for ch in line:
        if ch == '[':
            depth += 1
        elif ch == ']':
            depth -= 1
        if ch == delimiter and depth == 0:
            fields.append(''.join(cur))
            cur = []
        else:
            cur.append(ch)
    fields.append(''.join(cur))
    return fields


def _int_field(fields, col, what):
    text = fields[col].strip()
    try:
        return int(text)
    except ValueError:
        raise ParseError(None, None, "bad %s field %r" % (what, text))


def _parse_iq(text):
    text = text.strip()
    if not (text.startswith('[') and text.endswith(']')):
        raise StructuralError(None, None, "csi field is not a bracketed list")
    body = text[1:-1].replace(',', ' ').split()
    try:
        flat = [int(x) for x in body]
    except ValueError as e:
        raise ParseError(None, None, "bad I/Q value: %s" % (e,))
    if len(flat) % 2:
        raise StructuralError(None, None, "odd-length I/Q array (%d values)" % (len(flat),))
    return flat


def parse_csi_line(line, mapping=None, min_pairs=0):
    """Parse one log line into a CsiRecord

    Errors carry no location; read_csi_log attaches file and line.

    :param line: one record, with or without the trailing newline
    :param mapping: ColumnMapping, default layout if None
    :param min_pairs: fewer I/Q pairs than this is a StructuralError
    """
    if mapping is None:
        mapping = ColumnMapping()
    fields = _split_fields(line.rstrip('\r\n'), mapping.delimiter)
    if len(fields) < mapping.width:
        raise StructuralError(None, None, "expected at least %d columns, got %d" % (
            mapping.width, len(fields)
        ))
    timestamp = _int_field(fields, mapping.timestamp, 'timestamp')
    seq = _int_field(fields, mapping.seq, 'seq')
    rssi = None
    if mapping.rssi is not None and fields[mapping.rssi].strip():
        rssi = _int_field(fields, mapping.rssi, 'rssi')
    flat = _parse_iq(fields[mapping.csi])
    pairs = numpy.array(flat, dtype=numpy.int64).reshape(-1, 2)
    if pairs.shape[0] < min_pairs:
        raise StructuralError(None, None, "%d I/Q pairs, need at least %d" % (
            pairs.shape[0], min_pairs
        ))
    if mapping.iq_order == IQ_REAL_IMAG:
        pairs = pairs[:, ::-1]
    return CsiRecord(timestamp, seq, rssi, pairs)


def format_csi_line(record, mapping=None):
    """Serialize a record back into the mapping's canonical line layout"""
    if mapping is None:
        mapping = ColumnMapping()
    pairs = record.iq
    if mapping.iq_order == IQ_REAL_IMAG:
        pairs = pairs[:, ::-1]
    fields = [''] * mapping.width
    fields[mapping.timestamp] = str(record.timestamp_ms)
    fields[mapping.seq] = str(record.seq)
    if mapping.rssi is not None and record.rssi_dbm is not None:
        fields[mapping.rssi] = str(record.rssi_dbm)
    fields[mapping.csi] = '[' + ' '.join(str(v) for v in pairs.reshape(-1).tolist()) + ']'
    return mapping.delimiter.join(fields)


def amplitudes(record, sel=None):
    """Magnitudes of the selected subcarrier pairs

    Returns a float64 vector of length len(sel.indices), entry k being
    sqrt(imag**2 + real**2) of pair sel.indices[k].
    """
    if sel is None:
        sel = DEFAULT_SELECTION
    idx = numpy.asarray(sel.indices)
    if idx.size and idx.max() >= len(record):
        raise BoundsError("selection %r needs %d pairs, record has %d" % (
            sel.name, idx.max() + 1, len(record)
        ))
    chosen = record.iq[idx]
    # exact integer sum of squares, single rounding in sqrt
    return numpy.sqrt((chosen * chosen).sum(axis=1).astype(numpy.float64))


class LogStats(object):
    __slots__ = ('lines', 'records', 'skipped', 'non_monotonic')

    def __init__(self):
        self.lines = 0
        self.records = 0
        self.skipped = 0
        self.non_monotonic = 0

    def __repr__(self):
        return 'LogStats(lines=%d, records=%d, skipped=%d, non_monotonic=%d)' % (
            self.lines, self.records, self.skipped, self.non_monotonic
        )


def iter_csi_lines(lines, mapping=None, path=None, stats=None, sel=None):
    """Yield CsiRecords from an iterable of lines

    Blank lines are skipped. A first line that fails to parse is treated
    as a header when mapping.header is set. Parse errors are re-raised
    with path and 1-based line number. When sel is given, a record too
    short to hold every selected slot is a StructuralError.
    """
    if mapping is None:
        mapping = ColumnMapping()
    min_pairs = max(sel.indices) + 1 if sel is not None else 0
    if stats is None:
        stats = LogStats()
    last_ts = None
    for lineno, line in enumerate(lines, 1):
        stats.lines += 1
        if not line.strip():
            stats.skipped += 1
            continue
        try:
            record = parse_csi_line(line, mapping, min_pairs)
        except ParseError as e:
            if lineno == 1 and mapping.header:
                stats.skipped += 1
                continue
            raise e.located(path, lineno)
        if last_ts is not None and record.timestamp_ms < last_ts:
            stats.non_monotonic += 1
        last_ts = record.timestamp_ms
        stats.records += 1
        yield record


def read_csi_log(path, mapping=None, sel=None):
    """Read a whole capture file

    Returns (records, stats). Out-of-order timestamps are counted in
    stats.non_monotonic and logged, never fatal. sel, if given, is the
    SubcarrierSelection every record must be able to serve.
    """
    stats = LogStats()
    with open(path, 'r') as f:
        records = list(iter_csi_lines(f, mapping, path=path, stats=stats, sel=sel))
    if stats.non_monotonic:
        log.warning("%s: %d non-monotonic timestamps", path, stats.non_monotonic)
    log.debug("%s: %r", path, stats)
    return records, stats
