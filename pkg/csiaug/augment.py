#!/usr/bin/python

"""Spectrogram augmentations

Four operators, each a deterministic core (circular_rotate,
resized_crop, amplitude_scale, contrast_scale) plus a seeded random
wrapper, and apply_pipeline which composes them behind probability
gates.

Pipelines always run operators in CANONICAL_ORDER (geometric before
photometric) and give every operator its own stream, spawned from the
per-sample stream by the operator's kind. Each operator draws its gate
and all of its parameters whether or not the gate passes, so adding or
removing an operator never changes what the others draw.
"""

import json
import math
import numbers
import numpy
from scipy.interpolate import interp1d

from csiaug.errors import ParameterError
from csiaug.rng import sample_stream
from csiaug.spectro import Spectrogram

ROTATION = 'circular_rotation'
RESIZED_CROP = 'resized_crop'
AMPLITUDE = 'amplitude'
CONTRAST = 'contrast'

CANONICAL_ORDER = (ROTATION, RESIZED_CROP, AMPLITUDE, CONTRAST)

DISPLAY_NAMES = {
    ROTATION: 'randomCircularRotation',
    RESIZED_CROP: 'randomResizedCrop',
    AMPLITUDE: 'randomAmplitude',
    CONTRAST: 'randomContrast',
}

CROP_STRETCH = 'crop_stretch'
COMPRESS_TILE = 'compress_tile'
COMPRESS_STRETCH = 'compress_stretch'

RESIZE_TILE = 'tile'
RESIZE_STRETCH = 'stretch'

DEFAULT_GATE_P = 0.5
DEFAULT_FACTOR_RANGE = (0.75, 1.25)


class AugmentationSpec(object):
    """One operator of a pipeline

    :param kind: one of CANONICAL_ORDER
    :param gate_p: probability that the operator is applied
    :param lo: lower bound of the parameter distribution, or None for
      the kind's default (rotation: 1, resized_crop: w/2,
      amplitude and contrast: 0.75)
    :param hi: upper bound, or None for the default (rotation and
      resized_crop: w, amplitude and contrast: 1.25)
    :param per_channel: amplitude/contrast only; if False one factor
      is drawn and broadcast to every subcarrier row
    :param resize_mode: resized_crop only; what the compression branch
      does after compressing to c columns: RESIZE_TILE repeats the
      compressed block, RESIZE_STRETCH resamples it back to w
    """
    __slots__ = ('kind', 'gate_p', 'lo', 'hi', 'per_channel', 'resize_mode')

    def __init__(self, kind, gate_p=DEFAULT_GATE_P, lo=None, hi=None,
                 per_channel=True, resize_mode=RESIZE_TILE):
        if kind not in CANONICAL_ORDER:
            raise ParameterError("unknown augmentation kind %r" % (kind,))
        gate_p = float(gate_p)
        if not 0.0 <= gate_p <= 1.0:
            raise ParameterError("gate_p must lie in [0, 1], got %r" % (gate_p,))
        for b in (lo, hi):
            if b is not None and (isinstance(b, bool) or not isinstance(b, numbers.Real)
                                  or not math.isfinite(b)):
                raise ParameterError("%s: bound %r is not a finite number" % (kind, b))
        if lo is not None and hi is not None and lo > hi:
            raise ParameterError("%s: lo %r > hi %r" % (kind, lo, hi))
        if kind in (AMPLITUDE, CONTRAST):
            for b in (lo, hi):
                if b is not None and not b > 0:
                    raise ParameterError("%s factor bounds must be finite and > 0" % (kind,))
        if resize_mode not in (RESIZE_TILE, RESIZE_STRETCH):
            raise ParameterError("unknown resize_mode %r" % (resize_mode,))
        self.kind = kind
        self.gate_p = gate_p
        self.lo = lo
        self.hi = hi
        self.per_channel = bool(per_channel)
        self.resize_mode = resize_mode

    def bounds(self, w):
        """Parameter bounds for a spectrogram of width w

        Rotation and resized_crop bounds must lie within [0, w], and a
        rotation range must hold at least one integer.
        """
        if self.kind == ROTATION:
            default = (1, w)
        elif self.kind == RESIZED_CROP:
            default = (w / 2.0, w)
        else:
            default = DEFAULT_FACTOR_RANGE
        lo = default[0] if self.lo is None else self.lo
        hi = default[1] if self.hi is None else self.hi
        if lo > hi:
            raise ParameterError("%s: lo %r > hi %r" % (self.kind, lo, hi))
        if self.kind in (ROTATION, RESIZED_CROP):
            if lo < 0 or hi > w:
                raise ParameterError("%s bounds [%r, %r] outside [0, %d]" % (
                    self.kind, lo, hi, w
                ))
            if self.kind == ROTATION and math.ceil(lo) > math.floor(hi):
                raise ParameterError("%s bounds [%r, %r] hold no integer" % (
                    self.kind, lo, hi
                ))
        return lo, hi

    @property
    def display_name(self):
        return DISPLAY_NAMES[self.kind]

    def to_dict(self):
        return dict((k, getattr(self, k)) for k in self.__slots__)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def __eq__(self, other):
        if not isinstance(other, AugmentationSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return 'AugmentationSpec(%r, gate_p=%r)' % (self.kind, self.gate_p)


class PipelineSpec(object):
    """Gated composition of augmentation operators

    Operators are kept in CANONICAL_ORDER regardless of the order
    given. An empty pipeline is the identity (the "none" arm).
    """
    __slots__ = ('operators', 'global_seed')

    def __init__(self, operators=(), global_seed=0):
        operators = list(operators)
        kinds = [op.kind for op in operators]
        if len(set(kinds)) != len(kinds):
            raise ParameterError("duplicate operator kinds in pipeline: %r" % (kinds,))
        operators.sort(key=lambda op: CANONICAL_ORDER.index(op.kind))
        self.operators = tuple(operators)
        self.global_seed = int(global_seed)

    @property
    def kinds(self):
        return tuple(op.kind for op in self.operators)

    def with_seed(self, seed):
        return PipelineSpec(self.operators, seed)

    def without(self, kind):
        return PipelineSpec([op for op in self.operators if op.kind != kind], self.global_seed)

    def to_dict(self):
        return {
            'operators': [op.to_dict() for op in self.operators],
            'global_seed': self.global_seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            [AugmentationSpec.from_dict(op) for op in d.get('operators', [])],
            d.get('global_seed', 0)
        )

    def __len__(self):
        return len(self.operators)

    def __repr__(self):
        return 'PipelineSpec(%r, seed=%d)' % (self.kinds, self.global_seed)


class DrawEntry(object):
    __slots__ = ('kind', 'gate', 'applied', 'params')

    def __init__(self, kind, gate, applied, params):
        self.kind = kind
        self.gate = gate
        self.applied = applied
        self.params = params

    def to_dict(self):
        return {
            'kind': self.kind,
            'gate': self.gate,
            'applied': self.applied,
            'params': self.params,
        }

    def __eq__(self, other):
        if not isinstance(other, DrawEntry):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class DrawLog(object):
    """Every gate and parameter drawn for one pipeline application

    replay(x, drawlog) reproduces the augmented spectrogram exactly.
    source is the index of the augmented sample in its collection when
    that differs from the key's index (draws with replacement).
    """
    __slots__ = ('key', 'entries', 'source')

    def __init__(self, key=None, entries=(), source=None):
        self.key = key
        self.entries = list(entries)
        self.source = source

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, DrawLog):
            return NotImplemented
        return (
            self.key == other.key and
            self.source == other.source and
            self.entries == other.entries
        )

    def to_json(self):
        """One JSON object, suitable as a line of a JSON-lines audit file"""
        return json.dumps({
            'key': list(self.key) if self.key is not None else None,
            'entries': [e.to_dict() for e in self.entries],
            'source': self.source,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line):
        d = json.loads(line)
        key = tuple(d['key']) if d['key'] is not None else None
        return cls(key, [
            DrawEntry(e['kind'], e['gate'], e['applied'], e['params'])
            for e in d['entries']
        ], d.get('source'))


# Deterministic cores

def circular_rotate(x, n):
    """Shift columns n steps along positive time, wrapping around

    Output column (t + n) mod w is input column t.
    """
    w = x.w
    if isinstance(n, bool) or int(n) != n or not 0 <= n <= w:
        raise ParameterError("rotation %r outside [0, %d]" % (n, w))
    return Spectrogram(numpy.roll(x.values, int(n), axis=0))


def _resample(values, m):
    """Endpoint-aligned linear resampling of the time axis to m columns

    Output column j samples input position j * (n - 1) / (m - 1),
    or position 0 when m == 1.
    """
    n = values.shape[0]
    if m == n:
        return values.copy()
    if n == 1:
        return numpy.repeat(values, m, axis=0)
    if m == 1:
        pos = numpy.zeros(1)
    else:
        pos = (numpy.arange(m) * (n - 1)) / float(m - 1)
    out = interp1d(numpy.arange(n), values, axis=0, assume_sorted=True)(pos)
    # rounding must not leave the input's range
    return numpy.clip(out, values.min(axis=0), values.max(axis=0))


def resized_crop(x, mode, c, start=0):
    """Crop-and-stretch (slow down) or compress (speed up) along time

    :param mode: CROP_STRETCH takes columns [start, start + c) and
      stretches them to w; COMPRESS_TILE compresses all w columns to c
      and repeats that block circularly to fill w; COMPRESS_STRETCH
      compresses to c and resamples back to w
    :param c: number of columns, ceil(w/2) <= c <= w
    :param start: first cropped column, 0 <= start <= w - c (ignored
      when compressing)
    """
    w = x.w
    if int(c) != c or not int(math.ceil(w / 2.0)) <= c <= w:
        raise ParameterError("crop size %r outside [%d, %d]" % (c, int(math.ceil(w / 2.0)), w))
    c = int(c)
    if mode == CROP_STRETCH:
        if int(start) != start or not 0 <= start <= w - c:
            raise ParameterError("crop start %r outside [0, %d]" % (start, w - c))
        start = int(start)
        out = _resample(x.values[start:start + c], w)
    elif mode == COMPRESS_TILE:
        compressed = _resample(x.values, c)
        out = compressed[numpy.arange(w) % c]
    elif mode == COMPRESS_STRETCH:
        out = _resample(_resample(x.values, c), w)
    else:
        raise ParameterError("unknown resized_crop mode %r" % (mode,))
    return Spectrogram(out)


def _check_factors(factors, h):
    factors = numpy.asarray(factors, dtype=numpy.float64).reshape(-1)
    if factors.size == 1 and h != 1:
        factors = numpy.repeat(factors, h)
    if factors.size != h:
        raise ParameterError("need %d channel factors, got %d" % (h, factors.size))
    if not numpy.all(numpy.isfinite(factors)) or numpy.any(factors <= 0):
        raise ParameterError("channel factors must be finite and > 0")
    return factors


def amplitude_scale(x, factors):
    """Multiply subcarrier row k by factors[k]"""
    factors = _check_factors(factors, x.h)
    return Spectrogram(x.values * factors[None, :])


def contrast_scale(x, factors):
    """Scale each row's deviation from its time-mean by factors[k]

    Values pushed below zero are clamped to zero.
    """
    factors = _check_factors(factors, x.h)
    mu = x.values.mean(axis=0)
    out = mu[None, :] + factors[None, :] * (x.values - mu[None, :])
    return Spectrogram(numpy.maximum(out, 0.0))


# Seeded wrappers

def random_channel_factors(stream, h, lo=DEFAULT_FACTOR_RANGE[0], hi=DEFAULT_FACTOR_RANGE[1]):
    """h independent uniform draws on [lo, hi], in row order"""
    if not 0 < lo <= hi:
        raise ParameterError("channel factor range must satisfy 0 < lo <= hi")
    return numpy.array([stream.uniform(lo, hi) for _ in range(h)])


def _draw_rotation(spec, stream, w, h):
    lo, hi = spec.bounds(w)
    return {'n': stream.integer(int(math.ceil(lo)), int(math.floor(hi)))}


def _draw_crop_size(stream, lo, hi, w):
    c = int(math.floor(stream.uniform(lo, hi) + 0.5))
    return min(max(c, int(math.ceil(w / 2.0))), w)


def _draw_resized_crop(spec, stream, w, h):
    crop = stream.coin()
    lo, hi = spec.bounds(w)
    c = _draw_crop_size(stream, lo, hi, w)
    start = stream.integer(0, w - c)
    if crop:
        mode = CROP_STRETCH
    elif spec.resize_mode == RESIZE_TILE:
        mode = COMPRESS_TILE
    else:
        mode = COMPRESS_STRETCH
    return {'mode': mode, 'c': c, 'start': start}


def _draw_factors(spec, stream, w, h):
    lo, hi = spec.bounds(w)
    factors = random_channel_factors(stream, h if spec.per_channel else 1, lo, hi)
    return {'factors': factors.tolist()}


_DRAW = {
    ROTATION: _draw_rotation,
    RESIZED_CROP: _draw_resized_crop,
    AMPLITUDE: _draw_factors,
    CONTRAST: _draw_factors,
}


def _apply(kind, x, params):
    if kind == ROTATION:
        return circular_rotate(x, params['n'])
    if kind == RESIZED_CROP:
        return resized_crop(x, params['mode'], params['c'], params['start'])
    if kind == AMPLITUDE:
        return amplitude_scale(x, params['factors'])
    return contrast_scale(x, params['factors'])


def random_circular_rotation(x, stream, spec=None):
    """Rotate by n drawn uniformly from {1, ..., w}"""
    if spec is None:
        spec = AugmentationSpec(ROTATION)
    return _apply(ROTATION, x, _draw_rotation(spec, stream, x.w, x.h))


def random_resized_crop(x, stream, spec=None):
    """Fair coin between crop and compression, c ~ U(w/2, w) rounded"""
    if spec is None:
        spec = AugmentationSpec(RESIZED_CROP)
    return _apply(RESIZED_CROP, x, _draw_resized_crop(spec, stream, x.w, x.h))


def random_amplitude(x, stream, spec=None):
    if spec is None:
        spec = AugmentationSpec(AMPLITUDE)
    return _apply(AMPLITUDE, x, _draw_factors(spec, stream, x.w, x.h))


def random_contrast(x, stream, spec=None):
    if spec is None:
        spec = AugmentationSpec(CONTRAST)
    return _apply(CONTRAST, x, _draw_factors(spec, stream, x.w, x.h))


def apply_pipeline(x, spec, sample_key, source=None):
    """Augment one sample

    :param sample_key: (epoch, sample index); together with
      spec.global_seed it fully determines every draw
    :param source: recorded in the DrawLog, see DrawLog.source
    Returns (augmented spectrogram, DrawLog).
    """
    epoch, index = sample_key
    stream = sample_stream(spec.global_seed, epoch, index)
    drawlog = DrawLog((epoch, index), source=source)
    w, h = x.w, x.h
    for op in spec.operators:
        sub = stream.spawn(op.kind)
        gate = sub.uniform()
        params = _DRAW[op.kind](op, sub, w, h)
        applied = gate < op.gate_p
        if applied:
            x = _apply(op.kind, x, params)
        drawlog.entries.append(DrawEntry(op.kind, gate, applied, params))
    return x, drawlog


def replay(x, drawlog):
    """Re-apply the operators recorded in a DrawLog"""
    for entry in drawlog:
        if entry.applied:
            x = _apply(entry.kind, x, entry.params)
    return x
