#!/usr/bin/python

"""Portable spectrogram files and PNG previews

File layout, all little-endian:

    offset  size  field
    0       4     magic b"CSIS"
    4       2     version, unsigned (1)
    6       4     w, unsigned
    10      4     h, unsigned
    14      1     label, signed (-1 = unlabeled)
    15      7     reserved, zero
    22      4*w*h float32 payload, time-major (w rows of h values)
"""

import struct
import numpy
from PIL import Image

from csiaug.errors import FormatError
from csiaug.spectro import Spectrogram

MAGIC = b'CSIS'
VERSION = 1
UNLABELED = -1

_HEADER = struct.Struct('<4sHIIb7x')
HEADER_SIZE = _HEADER.size
_PAYLOAD = numpy.dtype('<f4')


def encode(spectrogram, label=UNLABELED):
    """Serialize to bytes; values are stored as float32"""
    if not -128 <= label <= 127:
        raise FormatError('<memory>', "label %r does not fit in a signed byte" % (label,))
    header = _HEADER.pack(MAGIC, VERSION, spectrogram.w, spectrogram.h, label)
    return header + spectrogram.values.astype(_PAYLOAD).tobytes()


def decode(data, path='<memory>'):
    """Parse bytes produced by encode; returns (Spectrogram, label)"""
    if len(data) < HEADER_SIZE:
        raise FormatError(path, "truncated header (%d bytes)" % (len(data),))
    magic, version, w, h, label = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(path, "bad magic %r" % (magic,))
    if version != VERSION:
        raise FormatError(path, "unsupported version %d" % (version,))
    if data[15:HEADER_SIZE] != b'\0' * 7:
        raise FormatError(path, "reserved header bytes are not zero")
    expected = HEADER_SIZE + 4 * w * h
    if len(data) != expected:
        raise FormatError(path, "size %d, expected %d for %dx%d" % (len(data), expected, w, h))
    if w == 0 or h == 0:
        raise FormatError(path, "empty spectrogram %dx%d" % (w, h))
    values = numpy.frombuffer(data, dtype=_PAYLOAD, offset=HEADER_SIZE).reshape(w, h)
    if not numpy.all(numpy.isfinite(values)) or numpy.any(values < 0):
        raise FormatError(path, "payload contains negative or non-finite values")
    return Spectrogram(values.astype(numpy.float64)), label


def write_spectrogram(path, spectrogram, label=UNLABELED):
    data = encode(spectrogram, label)
    with open(path, 'wb') as f:
        f.write(data)
    return len(data)


def read_spectrogram(path):
    with open(path, 'rb') as f:
        data = f.read()
    return decode(data, path)


def payload(path):
    """Raw payload bytes of a spectrogram file (for byte comparisons)"""
    with open(path, 'rb') as f:
        data = f.read()
    decode(data, path)
    return data[HEADER_SIZE:]


def to_image(spectrogram):
    """8-bit grayscale image, w pixels wide and h pixels high

    Values are min-max normalized per spectrogram; a constant
    spectrogram renders as mid-gray (128).
    """
    v = spectrogram.values.T
    lo = v.min()
    hi = v.max()
    if hi == lo:
        pixels = numpy.full(v.shape, 128, dtype=numpy.uint8)
    else:
        pixels = numpy.rint((v - lo) * (255.0 / (hi - lo)))
        pixels = numpy.clip(pixels, 0, 255).astype(numpy.uint8)
    return Image.fromarray(pixels)


def write_preview(path, spectrogram):
    to_image(spectrogram).save(path, format='PNG')


def write_side_by_side(path, before, after):
    """Original above augmented, one PNG, shared layout for review"""
    top = to_image(before)
    bottom = to_image(after)
    img = Image.new('L', (max(top.width, bottom.width), top.height + bottom.height + 2), 0)
    img.paste(top, (0, 0))
    img.paste(bottom, (0, top.height + 2))
    img.save(path, format='PNG')
