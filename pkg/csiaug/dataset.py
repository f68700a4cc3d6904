#!/usr/bin/python

"""Wallhack1.8k-style datasets: subsets, manifests, splits and sampling

The dataset is made of four subsets, one per (scenario, system) pair,
named W1.8k_XY where X is the scenario (L = line of sight, N = through
the wall) and Y the antenna system (B = biquad, P = PIFA with a plane
reflector). Every subset has a JSON manifest listing its spectrogram
files, their labels and content digests.
"""

import hashlib
import json
import logging
import math
import os
from torch.utils.data import BatchSampler, Sampler

from csiaug.errors import FormatError, SchemaError, SplitError, SamplerError
from csiaug.rng import RandomStream, derive_seed
from csiaug.specfile import read_spectrogram, write_spectrogram
from csiaug.spectro import Spectrogram

log = logging.getLogger(__name__)

NO_PRESENCE = 0
WALKING = 1
WALKING_ARM_WAVING = 2
LABELS = (NO_PRESENCE, WALKING, WALKING_ARM_WAVING)

LOS = 'LOS'
NLOS = 'NLOS'
PIFA = 'PIFA'
BQ = 'BQ'

# Activity zones, distance from the receiver in metres
ZONE_DISTANCES_M = {1: 1.8, 2: 5.4, 3: 9.4, 4: 13.0, 5: 16.6}


class SubsetInfo(object):
    __slots__ = ('name', 'scenario', 'system', 'rooms', 'activities', 'counts')

    def __init__(self, name, scenario, system, rooms, counts):
        self.name = name
        self.scenario = scenario
        self.system = system
        self.rooms = rooms
        self.activities = len(counts)
        self.counts = tuple(counts)

    @property
    def total(self):
        return sum(self.counts)

    def __repr__(self):
        return 'SubsetInfo(%r, %s/%s, %d samples)' % (
            self.name, self.scenario, self.system, self.total
        )


SUBSETS = dict((s.name, s) for s in [
    SubsetInfo('W1.8k_LB', LOS, BQ, 1, (149, 154, 155)),
    SubsetInfo('W1.8k_LP', LOS, PIFA, 1, (149, 160, 152)),
    SubsetInfo('W1.8k_NB', NLOS, BQ, 5, (148, 150, 152)),
    SubsetInfo('W1.8k_NP', NLOS, PIFA, 5, (143, 147, 147)),
])
SUBSET_NAMES = tuple(sorted(SUBSETS))


def subset_name(scenario, system):
    for info in SUBSETS.values():
        if info.scenario == scenario and info.system == system:
            return info.name
    raise KeyError((scenario, system))


class Sample(object):
    """A labeled spectrogram with its provenance"""
    __slots__ = ('spectrogram', 'label', 'scenario', 'system', 'zone', 'source_id')

    def __init__(self, spectrogram, label, scenario=None, system=None, zone=None, source_id=''):
        if label not in LABELS:
            raise ValueError("label must be one of %r, got %r" % (LABELS, label))
        if zone is not None and zone not in ZONE_DISTANCES_M:
            raise ValueError("zone must be 1..5 or None, got %r" % (zone,))
        self.spectrogram = spectrogram
        self.label = label
        self.scenario = scenario
        self.system = system
        self.zone = zone
        self.source_id = source_id

    def __repr__(self):
        return 'Sample(%r, label=%d)' % (self.source_id, self.label)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            h.update(chunk)
    return 'sha256:' + h.hexdigest()


class ManifestEntry(object):
    __slots__ = ('path', 'label', 'scenario', 'system', 'zone', 'digest')

    def __init__(self, path, label, scenario=None, system=None, zone=None, digest=None):
        self.path = path
        self.label = label
        self.scenario = scenario
        self.system = system
        self.zone = zone
        self.digest = digest

    def to_dict(self):
        return dict((k, getattr(self, k)) for k in self.__slots__)


class SubsetManifest(object):
    """Listing of one subset's files

    :param subset: subset name
    :param files: list of ManifestEntry, paths relative to root
    :param counts: expected per-class counts, indexed by label
    :param root: directory the paths are relative to (the manifest's
      own directory when loaded from disk)
    """
    __slots__ = ('subset', 'files', 'counts', 'root')

    def __init__(self, subset, files, counts, root='.'):
        self.subset = subset
        self.files = list(files)
        self.counts = tuple(counts)
        self.root = root

    @property
    def total(self):
        return sum(self.counts)

    def resolve(self, entry):
        return os.path.join(self.root, entry.path)

    def to_dict(self):
        return {
            'subset': self.subset,
            'files': [e.to_dict() for e in self.files],
            'counts': dict((str(label), n) for label, n in enumerate(self.counts)),
        }

    @classmethod
    def from_dict(cls, d, root='.'):
        problems = []
        for k in ('subset', 'files', 'counts'):
            if k not in d:
                problems.append((k, 'missing'))
        if problems:
            raise SchemaError(problems)
        try:
            counts = [int(d['counts'][str(label)]) for label in LABELS]
        except (KeyError, TypeError, ValueError):
            raise SchemaError([('counts', 'need integer counts for labels 0, 1, 2')])
        files = []
        for i, f in enumerate(d['files']):
            try:
                files.append(ManifestEntry(
                    f['path'], int(f['label']), f.get('scenario'), f.get('system'),
                    f.get('zone'), f.get('digest'),
                ))
            except (KeyError, TypeError, ValueError):
                problems.append(('files[%d]' % (i,), 'need path and integer label'))
        if problems:
            raise SchemaError(problems)
        return cls(d['subset'], files, counts, root)


def load_manifest(path):
    with open(path, 'r') as f:
        d = json.load(f)
    return SubsetManifest.from_dict(d, root=os.path.dirname(os.path.abspath(path)))


def save_manifest(path, manifest):
    with open(path, 'w') as f:
        json.dump(manifest.to_dict(), f, indent=1, sort_keys=True)
        f.write('\n')


def build_manifest(subset, entries, root):
    """Manifest for files already written under root

    Digests are computed now; counts are taken from the entries'
    labels.
    """
    counts = [0] * len(LABELS)
    for e in entries:
        e.digest = file_digest(os.path.join(root, e.path))
        counts[e.label] += 1
    return SubsetManifest(subset, entries, counts, root)


class VerificationReport(object):
    __slots__ = ('subset', 'expected', 'found', 'missing', 'digest_mismatches')

    def __init__(self, subset, expected):
        self.subset = subset
        self.expected = tuple(expected)
        self.found = [0] * len(LABELS)
        self.missing = []
        self.digest_mismatches = []

    @property
    def total(self):
        return sum(self.found)

    @property
    def counts_match(self):
        return tuple(self.found) == self.expected

    @property
    def passed(self):
        return self.counts_match and not self.missing and not self.digest_mismatches

    @property
    def matches_published(self):
        """True if the found counts are the published ones for this subset"""
        info = SUBSETS.get(self.subset)
        return info is not None and tuple(self.found) == info.counts

    def __str__(self):
        lines = ['%s: %s, total %d, classes %s' % (
            self.subset, 'ok' if self.passed else 'FAILED',
            self.total, '/'.join(str(n) for n in self.found)
        )]
        if not self.counts_match:
            lines.append('  expected classes %s' % ('/'.join(str(n) for n in self.expected),))
        for p in self.missing:
            lines.append('  missing: %s' % (p,))
        for p in self.digest_mismatches:
            lines.append('  digest mismatch: %s' % (p,))
        return '\n'.join(lines)


def verify_manifest(manifest, check_digests=True):
    """Count what is actually on disk against the manifest"""
    report = VerificationReport(manifest.subset, manifest.counts)
    for entry in manifest.files:
        path = manifest.resolve(entry)
        if not os.path.exists(path):
            report.missing.append(entry.path)
            continue
        if check_digests and entry.digest is not None and file_digest(path) != entry.digest:
            report.digest_mismatches.append(entry.path)
            continue
        report.found[entry.label] += 1
    if not report.passed:
        log.warning("verification of %s failed", manifest.subset)
    return report


def load_samples(manifest, check_digests=True):
    """Read every spectrogram a manifest lists"""
    samples = []
    for entry in manifest.files:
        path = manifest.resolve(entry)
        if check_digests and entry.digest is not None and file_digest(path) != entry.digest:
            raise FormatError(path, "content digest does not match manifest")
        spectrogram, label = read_spectrogram(path)
        if label < 0:
            label = entry.label
        elif label != entry.label:
            raise FormatError(path, "file label %d disagrees with manifest label %d" % (
                label, entry.label
            ))
        samples.append(Sample(
            spectrogram, label, entry.scenario, entry.system, entry.zone, entry.path
        ))
    log.info("loaded %d samples of %s", len(samples), manifest.subset)
    return samples


def synthetic_catalogue(root, w=8, h=52):
    """Write a stand-in of the four subsets with the published counts

    Spectrograms are tiny constant matrices; only the bookkeeping is
    meaningful. Returns {subset name: manifest path}.
    """
    paths = {}
    for name in SUBSET_NAMES:
        info = SUBSETS[name]
        subdir = os.path.join(root, name)
        if not os.path.isdir(subdir):
            os.makedirs(subdir)
        entries = []
        for label, n in enumerate(info.counts):
            for i in range(n):
                rel = os.path.join(name, '%d_%04d.csis' % (label, i))
                values = [[float(label + 1)] * h] * w
                write_spectrogram(os.path.join(root, rel), Spectrogram(values), label)
                zone = None if label == NO_PRESENCE else 1 + i % len(ZONE_DISTANCES_M)
                entries.append(ManifestEntry(rel, label, info.scenario, info.system, zone))
        manifest = build_manifest(name, entries, root)
        path = os.path.join(root, name + '.json')
        save_manifest(path, manifest)
        paths[name] = path
    return paths


class SplitSpec(object):
    """How to carve a validation set out of the training subset

    :param train_fraction: share of each class kept for training;
      per-class counts are rounded toward train
    :param stratified: split each class separately
    :param split_seed: 64-bit seed of the shuffle
    """
    __slots__ = ('train_fraction', 'stratified', 'split_seed')

    def __init__(self, train_fraction=0.8, stratified=True, split_seed=0):
        if not 0.0 < train_fraction < 1.0:
            raise SplitError("train fraction must lie strictly between 0 and 1")
        self.train_fraction = train_fraction
        self.stratified = stratified
        self.split_seed = split_seed

    def to_dict(self):
        return dict((k, getattr(self, k)) for k in self.__slots__)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def shuffled(items, stream):
    """Fisher-Yates shuffle driven by a RandomStream"""
    items = list(items)
    for i in range(len(items) - 1, 0, -1):
        j = stream.integer(0, i)
        items[i], items[j] = items[j], items[i]
    return items


def _train_count(n, fraction):
    # tolerance keeps exact products like 0.7 * 10 from rounding up
    return min(n, int(math.ceil(n * fraction - 1e-9)))


def split(samples, spec=None):
    """Partition samples into (train, validation)

    Both lists keep the input order.
    """
    if spec is None:
        spec = SplitSpec()
    samples = list(samples)
    if spec.stratified:
        groups = []
        for label in LABELS:
            members = [i for i, s in enumerate(samples) if s.label == label]
            if not members:
                raise SplitError("class %d has no samples" % (label,))
            groups.append((label, members))
    else:
        groups = [('all', list(range(len(samples))))]
    train = set()
    for key, members in groups:
        stream = RandomStream(derive_seed(spec.split_seed, 'split', str(key)))
        order = shuffled(members, stream)
        train.update(order[:_train_count(len(order), spec.train_fraction)])
    return (
        [s for i, s in enumerate(samples) if i in train],
        [s for i, s in enumerate(samples) if i not in train],
    )


class BalancedSampler(Sampler):
    """Class-uniform draws with replacement

    Each draw picks a class uniformly, then a uniform member of it. One
    pass yields len(labels) indices; every pass continues the stream, so
    successive epochs see fresh draws.
    """

    def __init__(self, labels, stream):
        self.by_class = []
        for label in LABELS:
            members = [i for i, l in enumerate(labels) if l == label]
            if not members:
                raise SamplerError("class %d has no samples" % (label,))
            self.by_class.append(members)
        self.total = len(labels)
        self.stream = stream

    def __iter__(self):
        stream = self.stream
        for _ in range(self.total):
            members = self.by_class[stream.integer(0, len(self.by_class) - 1)]
            yield members[stream.integer(0, len(members) - 1)]

    def __len__(self):
        return self.total


def balanced_index_batches(labels, batch, stream):
    """Batches of indices from a BalancedSampler

    One epoch is ceil(N / batch) batches covering N draws.
    """
    if batch < 1:
        raise SamplerError("batch size must be >= 1")
    return iter(BatchSampler(BalancedSampler(labels, stream), batch, drop_last=False))


def balanced_batches(samples, batch, stream):
    samples = list(samples)
    batches = balanced_index_batches([s.label for s in samples], batch, stream)
    return ([samples[i] for i in idx] for idx in batches)
