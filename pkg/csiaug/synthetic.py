#!/usr/bin/python

"""Synthetic data for tests and dry runs

Nothing here is meant to look like real CSI; each generator builds the
smallest data set that makes one property observable.
"""

import numpy

from csiaug.csi import ColumnMapping, CsiRecord, format_csi_line
from csiaug.dataset import Sample, LABELS
from csiaug.spectro import Spectrogram

SHIFT_BACKGROUND = 1.0
SHIFT_HIGH = 2.0
SHIFT_LOW = 1.0


def synthetic_log_lines(n, seed=0, mapping=None, pairs=64, start_ms=0, period_ms=10):
    """n well-formed CSI log lines, 10 ms apart, with random I/Q values"""
    if mapping is None:
        mapping = ColumnMapping()
    rng = numpy.random.default_rng(seed)
    lines = []
    for i in range(n):
        iq = rng.integers(-30, 31, size=(pairs, 2))
        rssi = int(rng.integers(-70, -30))
        record = CsiRecord(start_ms + i * period_ms, i, rssi, iq)
        lines.append(format_csi_line(record, mapping))
    return lines


def separable_blobs(per_class=40, w=16, h=16, seed=0, noise=0.05):
    """Three texture classes with equal mean level

    Class 0 is flat, class 1 alternates along subcarriers and class 2
    alternates along time. Any network with local filters separates them.
    """
    rng = numpy.random.default_rng(seed)
    rows = (-1.0) ** numpy.arange(h)
    cols = (-1.0) ** numpy.arange(w)
    patterns = {
        0: numpy.zeros((w, h)),
        1: numpy.tile(rows, (w, 1)),
        2: numpy.tile(cols[:, None], (1, h)),
    }
    samples = []
    for label in LABELS:
        for i in range(per_class):
            values = 1.0 + 0.5 * patterns[label] + rng.uniform(-noise, noise, size=(w, h))
            samples.append(Sample(Spectrogram(values), label, source_id='blob-%d-%d' % (label, i)))
    return samples


def _bump(k):
    j = numpy.arange(k)
    return numpy.sin(numpy.pi * (j + 0.5) / k) ** 2


def shift_pattern(label, w, k, offset):
    """Time profile of one shift-oracle sample (length w)

    Classes 1 and 2 are a high and a low bump of k columns each, placed
    back to back, high first for class 1 and low first for class 2.
    Class 0 has the same two bumps half a period apart. The pattern
    starts at offset and wraps around.
    """
    bump = _bump(k)
    profile = numpy.full(w, SHIFT_BACKGROUND)
    if label == 1:
        placements = [(0, SHIFT_HIGH), (k, SHIFT_LOW)]
    elif label == 2:
        placements = [(0, SHIFT_LOW), (k, SHIFT_HIGH)]
    else:
        placements = [(0, SHIFT_HIGH), (w // 2, SHIFT_LOW)]
    for start, level in placements:
        idx = (offset + start + numpy.arange(k)) % w
        profile[idx] += level * bump
    return profile


def shift_oracle_dataset(train_per_class=60, test_per_class=60, w=64, h=8, k=8,
                         seed=0, noise=0.05, jitter=0.1):
    """(train, test) samples for the time-shift transfer oracle

    Training samples start their pattern at the fixed offset w - k, so
    the two bumps of classes 1 and 2 sit whole at opposite borders and
    only their position tells the classes apart. Test samples start at
    a uniformly random offset, where the bumps are adjacent and their
    order is the class evidence. A model can only pick up that order
    from training samples that were rotated.
    """
    if w < 4 * k:
        raise ValueError("need w >= 4k so class 0 bumps stay apart")
    rng = numpy.random.default_rng(seed)

    def make(label, offset, i, tag):
        profile = shift_pattern(label, w, k, offset)
        scale = rng.uniform(1.0 - jitter, 1.0 + jitter)
        values = SHIFT_BACKGROUND + scale * (profile - SHIFT_BACKGROUND)[:, None]
        values = values + rng.uniform(-noise, noise, size=(w, h))
        return Sample(Spectrogram(numpy.maximum(values, 0.0)), label,
                      source_id='%s-%d-%d' % (tag, label, i))

    train = [make(label, w - k, i, 'train')
             for label in LABELS for i in range(train_per_class)]
    test = [make(label, int(rng.integers(0, w)), i, 'test')
            for label in LABELS for i in range(test_per_class)]
    return train, test
