#!/usr/bin/python

"""JSON run configuration

A RunConfig wraps the decoded JSON document. Each section exposes its
fields as properties registered with _add_field, decoding lazily from
the underlying dict. problems() walks every section and collects all
unknown keys and invalid values so one SchemaError can name them all.
"""

import json
import os

from csiaug.augment import AugmentationSpec, PipelineSpec
from csiaug.csi import ColumnMapping, selection, IQ_IMAG_REAL, IQ_REAL_IMAG
from csiaug.dataset import SplitSpec, LABELS, SUBSET_NAMES
from csiaug.errors import SchemaError
from csiaug.harness import ExperimentSpec, PRESETS, single_arms, combined_arm, preset
from csiaug.model import ClassifierConfig
from csiaug.rng import MASK64, derive_seed
from csiaug.spectro import DEFAULT_RATE_HZ, DEFAULT_WIDTH


def _integer(lo=None, hi=None):
    def decode(v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValueError("must be an integer")
        if lo is not None and v < lo:
            raise ValueError("must be >= %d" % (lo,))
        if hi is not None and v > hi:
            raise ValueError("must be <= %d" % (hi,))
        return v
    return decode


def _positive_real(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ValueError("must be a number > 0")
    return float(v)


def _fraction(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v < 1:
        raise ValueError("must lie strictly between 0 and 1")
    return float(v)


def _boolean(v):
    if not isinstance(v, bool):
        raise ValueError("must be true or false")
    return v


def _text(v):
    if not isinstance(v, str) or not v:
        raise ValueError("must be a non-empty string")
    return v


def _choice(*choices):
    def decode(v):
        if v not in choices:
            raise ValueError("must be one of %s" % (', '.join(repr(c) for c in choices),))
        return v
    return decode


def _optional(decoder):
    def decode(v):
        return None if v is None else decoder(v)
    return decode


def _list_of(decoder):
    def decode(v):
        if not isinstance(v, list):
            raise ValueError("must be a list")
        out = []
        for i, item in enumerate(v):
            try:
                out.append(decoder(item))
            except (ValueError, TypeError) as e:
                raise ValueError("item %d: %s" % (i, e))
        return out
    return decode


def _mapping_of(decoder):
    def decode(v):
        if not isinstance(v, dict):
            raise ValueError("must be an object")
        return dict((k, decoder(x)) for k, x in v.items())
    return decode


def _selection(v):
    if not isinstance(v, (str, list)):
        raise ValueError("must be a preset name or a list of slot indices")
    return selection(v)


def _operator(v):
    if not isinstance(v, dict):
        raise ValueError("operator must be an object")
    try:
        return AugmentationSpec.from_dict(v)
    except TypeError as e:
        raise ValueError(str(e))


def _operators(v):
    ops = _list_of(_operator)(v)
    try:
        return PipelineSpec(ops)
    except ValueError as e:
        raise ValueError(str(e))


def _arm(v):
    if not isinstance(v, dict) or 'name' not in v:
        raise ValueError("arm must be an object with a name")
    return _text(v['name']), _operators(v.get('operators', []))


def _classifier(v):
    if not isinstance(v, dict):
        raise ValueError("must be an object")
    try:
        return ClassifierConfig.from_dict(v)
    except TypeError as e:
        raise ValueError(str(e))


class ConfigSection(object):
    """One object of the configuration document

    :param body: the decoded JSON object (a dict)
    :param prefix: dotted path of the section, used in error reports
    :param base_dir: directory relative paths are resolved against
    """
    __slots__ = ('body', 'prefix', 'base_dir')
    _fields = {}

    def __init__(self, body=None, prefix='', base_dir='.'):
        self.body = {} if body is None else body
        self.prefix = prefix
        self.base_dir = base_dir

    def _get(self, name):
        decoder, default = self._fields[name]
        if name not in self.body:
            return default
        return decoder(self.body[name])

    def _name(self, name):
        return '%s.%s' % (self.prefix, name) if self.prefix else name

    def path(self, p):
        return p if os.path.isabs(p) else os.path.normpath(os.path.join(self.base_dir, p))

    def problems(self):
        if not isinstance(self.body, dict):
            return [(self.prefix, 'must be an object')]
        found = []
        for k in sorted(self.body):
            if k not in self._fields:
                found.append((self._name(k), 'unknown key'))
                continue
            try:
                self._get(k)
            except (ValueError, TypeError) as e:
                found.append((self._name(k), str(e)))
        return found

    @classmethod
    def _add_field(cls, name, decoder, default, doc):
        fields = dict(cls._fields)
        fields[name] = (decoder, default)
        cls._fields = fields
        setattr(cls, name, property(lambda self: self._get(name), doc=doc))


class IngestSection(ConfigSection):
    __slots__ = ()

    def mapping(self):
        return ColumnMapping(
            self.timestamp, self.seq, self.rssi, self.csi,
            self.delimiter, self.iq_order, self.header,
        )

    def log_paths(self):
        return [self.path(p) for p in self.paths]


for k, v in [('timestamp', 'Column of the millisecond timestamp'),
             ('seq', 'Column of the sequence number'),
             ('csi', 'Column of the bracketed I/Q array')]:
    IngestSection._add_field(k, _integer(0), getattr(ColumnMapping(), k), v)
IngestSection._add_field('rssi', _optional(_integer(0)), 2, 'Column of the RSSI, or null')
IngestSection._add_field('delimiter', _text, ',', 'Column separator')
IngestSection._add_field(
    'iq_order', _choice(IQ_IMAG_REAL, IQ_REAL_IMAG), IQ_IMAG_REAL, 'Order of each I/Q pair'
)
IngestSection._add_field('header', _boolean, False, 'Skip an unparseable first line')
IngestSection._add_field(
    'selection', _selection, selection('lltf52'),
    'Subcarrier selection: preset name or list of 52 slot indices'
)
IngestSection._add_field('paths', _list_of(_text), [], 'Raw CSI logs to ingest')
IngestSection._add_field('label', _optional(_choice(*LABELS)), None, 'Label of every ingested segment')
IngestSection._add_field('subset', _text, 'ingested', 'Subset name written to the manifest')
IngestSection._add_field('scenario', _optional(_text), None, 'Scenario recorded per sample')
IngestSection._add_field('system', _optional(_text), None, 'Antenna system recorded per sample')
IngestSection._add_field('zone', _optional(_integer(1, 5)), None, 'Activity zone recorded per sample')


class SegmentSection(ConfigSection):
    __slots__ = ()


SegmentSection._add_field('window', _integer(1), DEFAULT_WIDTH, 'Packets per spectrogram')
SegmentSection._add_field('hop', _integer(1), DEFAULT_WIDTH, 'Packets between window starts')
SegmentSection._add_field('rate_hz', _positive_real, float(DEFAULT_RATE_HZ), 'Nominal packet rate')


class PipelineSection(ConfigSection):
    __slots__ = ()


PipelineSection._add_field('operators', _operators, PipelineSpec(), 'Augmentation operators')


class DatasetSection(ConfigSection):
    __slots__ = ()

    def manifest_path(self, subset):
        return self.path(self.manifests[subset])

    def split_spec(self, seed):
        return SplitSpec(
            self.train_fraction, self.stratified,
            self.split_seed if self.split_seed is not None else derive_seed(seed, 'split'),
        )


DatasetSection._add_field('manifests', _mapping_of(_text), {}, 'Manifest path per subset name')
DatasetSection._add_field('train_fraction', _fraction, 0.8, 'Share of each class kept for training')
DatasetSection._add_field('stratified', _boolean, True, 'Split each class separately')
DatasetSection._add_field(
    'split_seed', _optional(_integer(0, MASK64)), None, 'Shuffle seed, derived from seed if null'
)
DatasetSection._add_field(
    'check_digests', _boolean, True, 'Compare file digests against the manifest'
)


class ExperimentSection(ConfigSection):
    __slots__ = ()

    def problems(self):
        found = ConfigSection.problems(self)
        if found or not self.body:
            return found
        if self.preset is None and self.train_subset is None:
            found.append((self._name('train_subset'), 'required unless preset is given'))
        if self.preset is None and not self.eval_subsets:
            found.append((self._name('eval_subsets'), 'required unless preset is given'))
        return found


ExperimentSection._add_field(
    'preset', _optional(_choice(*sorted(PRESETS))), None, 'Named transfer direction'
)
ExperimentSection._add_field('name', _optional(_text), None, 'Experiment name used in reports')
ExperimentSection._add_field(
    'train_subset', _optional(_choice(*SUBSET_NAMES)), None, 'Subset trained and validated on'
)
ExperimentSection._add_field(
    'eval_subsets', _list_of(_choice(*SUBSET_NAMES)), [], 'Subsets the best checkpoints are tested on'
)
ExperimentSection._add_field('arms', _optional(_list_of(_arm)), None, 'Named augmentation arms')
ExperimentSection._add_field('runs', _integer(1), 10, 'Independent runs per arm')
ExperimentSection._add_field('epochs', _integer(1), 50, 'Training epochs per run')
ExperimentSection._add_field('lr', _positive_real, 1e-4, 'Adam learning rate')
ExperimentSection._add_field('batch', _integer(1), 16, 'Batch size')
ExperimentSection._add_field('classifier', _classifier, ClassifierConfig(), 'Classifier settings')


class RunConfig(object):
    """The whole configuration document

    :param body: decoded JSON object
    :param base_dir: directory relative paths are resolved against
      (the config file's own directory when loaded from disk)
    Raises SchemaError listing every offending field.
    """
    __slots__ = ('body', 'base_dir', 'ingest', 'segment', 'pipeline', 'dataset',
                 'experiment', 'out', 'seed')

    SECTIONS = (
        ('ingest', IngestSection),
        ('segment', SegmentSection),
        ('pipeline', PipelineSection),
        ('dataset', DatasetSection),
        ('experiment', ExperimentSection),
    )

    def __init__(self, body, base_dir='.'):
        if not isinstance(body, dict):
            raise SchemaError([('', 'configuration must be a JSON object')])
        self.body = body
        self.base_dir = base_dir
        problems = []
        known = set(name for name, _ in self.SECTIONS) | set(['out', 'seed'])
        for k in sorted(body):
            if k not in known:
                problems.append((k, 'unknown key'))
        for name, cls in self.SECTIONS:
            section = cls(body.get(name, {}), name, base_dir)
            problems += section.problems()
            setattr(self, name, section)
        if 'seed' not in body:
            problems.append(('seed', 'missing'))
            self.seed = None
        else:
            try:
                self.seed = _integer(0, MASK64)(body['seed'])
            except ValueError as e:
                problems.append(('seed', str(e)))
        try:
            out = _text(body.get('out', 'out'))
            self.out = out if os.path.isabs(out) else os.path.join(base_dir, out)
        except ValueError as e:
            problems.append(('out', str(e)))
        if problems:
            raise SchemaError(problems)

    def override(self, seed=None, out=None):
        """Apply command-line overrides"""
        if seed is not None:
            if not 0 <= seed <= MASK64:
                raise SchemaError([('seed', 'must be a 64-bit unsigned integer')])
            self.seed = seed
        if out is not None:
            self.out = out
        return self

    def pipeline_spec(self):
        return self.pipeline.operators.with_seed(self.seed)

    def experiment_spec(self):
        e = self.experiment
        kwargs = dict(
            runs=e.runs, epochs=e.epochs, lr=e.lr, batch=e.batch,
            classifier=e.classifier, seed=self.seed,
            split=self.dataset.split_spec(self.seed),
        )
        if e.arms is not None:
            kwargs['arms'] = e.arms
        if e.name is not None:
            kwargs['name'] = e.name
        if e.preset is not None:
            return preset(e.preset, **kwargs)
        if e.train_subset is None or not e.eval_subsets:
            raise SchemaError([('experiment.train_subset', 'missing'),
                               ('experiment.eval_subsets', 'missing')])
        kwargs.setdefault('arms', single_arms() + [combined_arm()])
        return ExperimentSpec(e.train_subset, e.eval_subsets, **kwargs)

    def check_paths(self, ingest=False, subsets=()):
        """Raise SchemaError for every referenced path that does not exist"""
        problems = []
        if ingest:
            if not self.ingest.paths:
                problems.append(('ingest.paths', 'no logs to ingest'))
            for i, p in enumerate(self.ingest.log_paths()):
                if not os.path.exists(p):
                    problems.append(('ingest.paths[%d]' % (i,), 'no such file: %s' % (p,)))
        for subset in subsets:
            if subset not in self.dataset.manifests:
                problems.append(('dataset.manifests.%s' % (subset,), 'missing'))
            elif not os.path.exists(self.dataset.manifest_path(subset)):
                problems.append(('dataset.manifests.%s' % (subset,), 'no such file: %s' % (
                    self.dataset.manifest_path(subset),
                )))
        if problems:
            raise SchemaError(problems)


def load_config(path):
    try:
        with open(path, 'r') as f:
            body = json.load(f)
    except ValueError as e:
        raise SchemaError([('', 'not valid JSON: %s' % (e,))])
    return RunConfig(body, base_dir=os.path.dirname(os.path.abspath(path)))
