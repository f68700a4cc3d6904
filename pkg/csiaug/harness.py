#!/usr/bin/python

"""Training and ablation harness

run_ablation trains `runs` independent models per augmentation arm,
keeps each run's best-validation checkpoint, tests it on every eval
subset and aggregates mean and sample standard deviation per
(arm, eval subset), together with the change against the "none" arm.
"""

import concurrent.futures
import copy
import logging
import math
import os
import numpy
import torch
from torch.nn import functional
from torch.utils.data import BatchSampler, DataLoader, Dataset

from csiaug.augment import (
    PipelineSpec, AugmentationSpec, CANONICAL_ORDER, DISPLAY_NAMES, apply_pipeline
)
from csiaug.dataset import SplitSpec, split, BalancedSampler, subset_name
from csiaug.dataset import LOS, NLOS, PIFA, BQ
from csiaug.errors import RunFailed, SchemaError, ParameterError
from csiaug.model import ClassifierConfig, build_classifier, build_optimizer, to_batch
from csiaug.rng import RandomStream, derive_seed
from csiaug.spectro import Spectrogram

log = logging.getLogger(__name__)

BASELINE = 'none'
COMBINED = 'combined'
EVAL_BATCH = 64


class ExperimentSpec(object):
    """One ablation experiment

    :param train_subset: subset the models are trained (and validated) on
    :param eval_subsets: subsets the best checkpoints are tested on
    :param arms: list of (arm name, PipelineSpec); must contain BASELINE
      with an empty pipeline
    :param runs: independent training runs per arm
    :param epochs: training epochs per run (400 for a full-scale
      reproduction, 50 by default)
    :param lr: Adam learning rate
    :param batch: batch size
    :param classifier: ClassifierConfig
    :param seed: 64-bit experiment seed; run seeds are derived from it
    :param split: SplitSpec for the train/validation split of train_subset
    :param name: free-form experiment name used in reports
    """
    __slots__ = ('train_subset', 'eval_subsets', 'arms', 'runs', 'epochs', 'lr',
                 'batch', 'classifier', 'seed', 'split', 'name')

    def __init__(self, train_subset, eval_subsets, arms=None, runs=10, epochs=50,
                 lr=1e-4, batch=16, classifier=None, seed=0, split=None, name=None):
        self.train_subset = train_subset
        self.eval_subsets = list(eval_subsets)
        self.arms = list(arms) if arms is not None else single_arms()
        self.runs = runs
        self.epochs = epochs
        self.lr = lr
        self.batch = batch
        self.classifier = classifier if classifier is not None else ClassifierConfig()
        self.seed = seed
        self.split = split if split is not None else SplitSpec(split_seed=derive_seed(seed, 'split'))
        self.name = name if name is not None else '%s->%s' % (train_subset, ','.join(self.eval_subsets))
        self.validate()

    def validate(self):
        problems = []
        if not isinstance(self.runs, int) or self.runs < 1:
            problems.append(('experiment.runs', 'must be an integer >= 1'))
        if not isinstance(self.epochs, int) or self.epochs < 1:
            problems.append(('experiment.epochs', 'must be an integer >= 1'))
        if not isinstance(self.batch, int) or self.batch < 1:
            problems.append(('experiment.batch', 'must be an integer >= 1'))
        if not (isinstance(self.lr, (int, float)) and self.lr > 0):
            problems.append(('experiment.lr', 'must be > 0'))
        if not self.eval_subsets:
            problems.append(('experiment.eval_subsets', 'must not be empty'))
        names = [name for name, _ in self.arms]
        if len(set(names)) != len(names):
            problems.append(('experiment.arms', 'arm names must be unique'))
        baseline = dict(self.arms).get(BASELINE)
        if baseline is None:
            problems.append(('experiment.arms', 'need an arm named %r' % (BASELINE,)))
        elif len(baseline):
            problems.append(('experiment.arms', 'the %r arm must have an empty pipeline' % (BASELINE,)))
        if problems:
            raise SchemaError(problems)

    @classmethod
    def full_scale(cls, train_subset, eval_subsets, **kwargs):
        """Full reproduction settings: 10 runs of 400 epochs"""
        kwargs.setdefault('runs', 10)
        kwargs.setdefault('epochs', 400)
        return cls(train_subset, eval_subsets, **kwargs)

    def to_dict(self):
        return {
            'name': self.name,
            'train_subset': self.train_subset,
            'eval_subsets': list(self.eval_subsets),
            'arms': [{'name': n, 'operators': [op.to_dict() for op in p.operators]}
                     for n, p in self.arms],
            'runs': self.runs,
            'epochs': self.epochs,
            'lr': self.lr,
            'batch': self.batch,
            'classifier': self.classifier.to_dict(),
            'seed': self.seed,
            'split': self.split.to_dict(),
        }


def single_arms(kinds=CANONICAL_ORDER, gate_p=0.5):
    """The baseline plus one arm per operator"""
    arms = [(BASELINE, PipelineSpec())]
    for kind in kinds:
        arms.append((DISPLAY_NAMES[kind], PipelineSpec([AugmentationSpec(kind, gate_p)])))
    return arms


def combined_arm(kinds=CANONICAL_ORDER, gate_p=0.5, name=COMBINED):
    return name, PipelineSpec([AugmentationSpec(k, gate_p) for k in kinds])


def _experiment(train_scenario, train_system, eval_scenario, eval_system):
    return subset_name(train_scenario, train_system), subset_name(eval_scenario, eval_system)


# Transfer directions: cross-scenario per system, cross-system per scenario
PRESETS = {
    'PIFA_LOS_to_NLOS': _experiment(LOS, PIFA, NLOS, PIFA),
    'PIFA_NLOS_to_LOS': _experiment(NLOS, PIFA, LOS, PIFA),
    'BQ_LOS_to_NLOS': _experiment(LOS, BQ, NLOS, BQ),
    'BQ_NLOS_to_LOS': _experiment(NLOS, BQ, LOS, BQ),
    'LOS_PIFA_to_BQ': _experiment(LOS, PIFA, LOS, BQ),
    'LOS_BQ_to_PIFA': _experiment(LOS, BQ, LOS, PIFA),
    'NLOS_PIFA_to_BQ': _experiment(NLOS, PIFA, NLOS, BQ),
    'NLOS_BQ_to_PIFA': _experiment(NLOS, BQ, NLOS, PIFA),
}


def preset(name, **kwargs):
    """ExperimentSpec for a named transfer direction

    Arms default to the baseline, every single operator and all
    operators combined.
    """
    train, test = PRESETS[name]
    kwargs.setdefault('arms', single_arms() + [combined_arm()])
    kwargs.setdefault('name', name)
    return ExperimentSpec(train, [test], **kwargs)


def select_best_epoch(accuracies):
    """1-based epoch of the highest accuracy, earliest on ties"""
    if not accuracies:
        raise ParameterError("no validation accuracies")
    best = 0
    for i, acc in enumerate(accuracies):
        if acc > accuracies[best]:
            best = i
    return best + 1


class TrainResult(object):
    """Outcome of train_one; model holds the best checkpoint's weights"""
    __slots__ = ('model', 'best_epoch', 'best_val', 'history', 'losses')

    def __init__(self, model, best_epoch, best_val, history, losses):
        self.model = model
        self.best_epoch = best_epoch
        self.best_val = best_val
        self.history = history
        self.losses = losses


def _stack(samples):
    return numpy.stack([s.spectrogram.values for s in samples])


def evaluate(model, samples):
    """Fraction of samples whose highest class score is the label"""
    samples = list(samples)
    if not samples:
        raise ParameterError("evaluate needs at least one sample")
    if hasattr(model, 'eval'):
        model.eval()
    dtype = torch.float32
    try:
        dtype = next(model.parameters()).dtype
    except (AttributeError, StopIteration):
        pass
    correct = 0
    with torch.no_grad():
        for i in range(0, len(samples), EVAL_BATCH):
            chunk = samples[i:i + EVAL_BATCH]
            scores = model(to_batch(_stack(chunk), dtype))
            pred = scores.argmax(dim=1)
            labels = torch.tensor([s.label for s in chunk])
            correct += int((pred == labels).sum().item())
    return correct / float(len(samples))


class AugmentedSamples(Dataset):
    """Training spectrograms seen through an augmentation pipeline

    Items are addressed by (draw position, sample index) keys, as
    produced by PositionedBatches. The pipeline sample key is
    (epoch, draw position), so a sample drawn twice in one epoch gets
    two independent augmentations.
    """

    def __init__(self, values, labels, pipeline):
        self.values = values
        self.labels = labels
        self.pipeline = pipeline
        self.epoch = 0

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, key):
        position, index = key
        values = self.values[index]
        if len(self.pipeline):
            x, _ = apply_pipeline(Spectrogram(values), self.pipeline,
                                  (self.epoch, position), source=index)
            values = x.values
        return to_batch(values[None])[0], self.labels[index]


class PositionedBatches(BatchSampler):
    """BatchSampler yielding (position in epoch, index) pairs"""

    def __iter__(self):
        position = 0
        for batch in BatchSampler.__iter__(self):
            yield [(position + k, i) for k, i in enumerate(batch)]
            position += len(batch)


def train_one(arm, data, cfg, run_index, arm_name=None):
    """Train one model under one augmentation arm

    :param arm: PipelineSpec applied to training samples only
    :param data: (train samples, validation samples)
    :param cfg: ExperimentSpec supplying epochs, lr, batch, classifier
      and seed
    :param run_index: selects the run seed; runs with the same index
      share initial weights and batch order across arms
    Raises RunFailed on a non-finite loss.
    """
    train, val = data
    if not train or not val:
        raise ParameterError("train and validation sets must not be empty")
    if arm_name is None:
        arm_name = repr(arm.kinds)
    run_seed = derive_seed(cfg.seed, 'run', run_index)
    pipeline = arm.with_seed(derive_seed(run_seed, 'augment'))
    base = _stack(train)
    w, h = base.shape[1], base.shape[2]
    for op in pipeline.operators:
        op.bounds(w)
    labels = [s.label for s in train]
    model = build_classifier(cfg.classifier, h, w, derive_seed(run_seed, 'init'))
    optimizer = build_optimizer(model, cfg.classifier, cfg.lr)
    sampler = BalancedSampler(labels, RandomStream(derive_seed(run_seed, 'batches')))
    samples = AugmentedSamples(base, labels, pipeline)
    loader = DataLoader(samples, batch_sampler=PositionedBatches(sampler, cfg.batch, False))

    history = []
    losses = []
    best_state = None
    best_val = -1.0
    best_epoch = 0
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        samples.epoch = epoch
        total = 0.0
        for x, y in loader:
            optimizer.zero_grad()
            loss = functional.cross_entropy(model(x), y)
            if not torch.isfinite(loss):
                raise RunFailed(arm_name, run_index, 'non-finite loss at epoch %d' % (epoch,))
            loss.backward()
            optimizer.step()
            total += loss.item() * len(y)
        losses.append(total / len(train))
        acc = evaluate(model, val)
        history.append(acc)
        if acc > best_val:
            best_val = acc
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
        log.debug("arm %s run %d epoch %d: loss %.4f val %.3f",
                  arm_name, run_index, epoch, losses[-1], acc)
    model.load_state_dict(best_state)
    return TrainResult(model, best_epoch, best_val, history, losses)


class RunRecord(object):
    __slots__ = ('arm', 'run_index', 'best_epoch', 'best_val', 'test', 'error')

    def __init__(self, arm, run_index, best_epoch=None, best_val=None, test=None, error=None):
        self.arm = arm
        self.run_index = run_index
        self.best_epoch = best_epoch
        self.best_val = best_val
        self.test = dict(test or {})
        self.error = error

    @property
    def failed(self):
        return self.error is not None

    def to_dict(self):
        return dict((k, getattr(self, k)) for k in self.__slots__)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _mean_std(values):
    if not values:
        return float('nan'), float('nan')
    a = numpy.asarray(values, dtype=numpy.float64)
    mean = float(a.mean())
    std = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    return mean, std


class RunSummary(object):
    """Per-run accuracies of every arm and their aggregates

    Standard deviations are sample standard deviations (n - 1).
    Failed runs are kept with their error and left out of aggregates.
    """
    __slots__ = ('name', 'train_subset', 'eval_subsets', 'arm_names', 'runs')

    def __init__(self, name, train_subset, eval_subsets, arm_names, runs=()):
        self.name = name
        self.train_subset = train_subset
        self.eval_subsets = list(eval_subsets)
        self.arm_names = list(arm_names)
        self.runs = list(runs)

    def records(self, arm):
        return sorted((r for r in self.runs if r.arm == arm), key=lambda r: r.run_index)

    def accuracies(self, arm, subset):
        return [r.test[subset] for r in self.records(arm) if not r.failed]

    def stats(self, arm, subset):
        return _mean_std(self.accuracies(arm, subset))

    def delta(self, arm, subset):
        """Mean accuracy change against the baseline arm"""
        return self.stats(arm, subset)[0] - self.stats(BASELINE, subset)[0]

    @property
    def failures(self):
        return [r for r in self.runs if r.failed]

    def to_dict(self):
        aggregates = {}
        for arm in self.arm_names:
            aggregates[arm] = {}
            for subset in self.eval_subsets:
                mean, std = self.stats(arm, subset)
                aggregates[arm][subset] = {
                    'mean': mean, 'std': std, 'delta': self.delta(arm, subset),
                }
        return {
            'name': self.name,
            'train_subset': self.train_subset,
            'eval_subsets': self.eval_subsets,
            'arms': self.arm_names,
            'runs': [r.to_dict() for r in sorted(self.runs, key=lambda r: (
                self.arm_names.index(r.arm), r.run_index))],
            'aggregates': aggregates,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d['name'], d['train_subset'], d['eval_subsets'], d['arms'],
                   [RunRecord.from_dict(r) for r in d['runs']])


def _run(arm_name, pipeline, data, tests, cfg, run_index, checkpoint_dir):
    try:
        result = train_one(pipeline, data, cfg, run_index, arm_name)
    except RunFailed as e:
        log.warning("%s", e)
        return RunRecord(arm_name, run_index, error=e.cause)
    if checkpoint_dir is not None:
        d = os.path.join(checkpoint_dir, arm_name)
        if not os.path.isdir(d):
            os.makedirs(d)
        torch.save(result.model.state_dict(), os.path.join(d, 'run-%d.pt' % (run_index,)))
    test = dict((name, evaluate(result.model, samples)) for name, samples in tests.items())
    log.info("arm %s run %d: best epoch %d, val %.3f, test %s", arm_name, run_index,
             result.best_epoch, result.best_val,
             ', '.join('%s %.3f' % kv for kv in sorted(test.items())))
    return RunRecord(arm_name, run_index, result.best_epoch, result.best_val, test)


def run_ablation(cfg, subsets, jobs=1, checkpoint_dir=None):
    """Train and test every arm of an experiment

    :param subsets: mapping of subset name to list of Sample; must hold
      cfg.train_subset and every eval subset
    :param jobs: runs trained concurrently; results do not depend on it
    :param checkpoint_dir: if given, best checkpoints are saved as
      <checkpoint_dir>/<arm>/run-<k>.pt
    """
    missing = [s for s in [cfg.train_subset] + cfg.eval_subsets if s not in subsets]
    if missing:
        raise SchemaError([('dataset.manifests', 'no data for subset %s' % (s,)) for s in missing])
    data = split(subsets[cfg.train_subset], cfg.split)
    tests = dict((name, subsets[name]) for name in cfg.eval_subsets)
    summary = RunSummary(cfg.name, cfg.train_subset, cfg.eval_subsets, [n for n, _ in cfg.arms])
    tasks = [(arm_name, pipeline, k) for arm_name, pipeline in cfg.arms for k in range(cfg.runs)]
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run, a, p, data, tests, cfg, k, checkpoint_dir)
                       for a, p, k in tasks]
            summary.runs = [f.result() for f in futures]
    else:
        summary.runs = [_run(a, p, data, tests, cfg, k, checkpoint_dir) for a, p, k in tasks]
    return summary


def beneficial_arm(summary, subset, arms, name=COMBINED):
    """Combine the operators of every single-operator arm that beat the baseline

    :param arms: the (name, PipelineSpec) list the summary was run with
    Returns (name, PipelineSpec), or None if no arm improved.
    """
    operators = []
    for arm_name, pipeline in arms:
        if arm_name == BASELINE or len(pipeline) != 1:
            continue
        delta = summary.delta(arm_name, subset)
        if not math.isnan(delta) and delta > 0:
            operators.append(pipeline.operators[0])
    if not operators:
        return None
    return name, PipelineSpec(operators)
