#!/usr/bin/python

import math
import os
import unittest
import numpy
import torch

from csiaug import harness, synthetic
from csiaug.augment import AugmentationSpec, PipelineSpec, ROTATION, CONTRAST, AMPLITUDE
from csiaug.dataset import SplitSpec, split, BalancedSampler, balanced_index_batches
from csiaug.errors import SchemaError, ParameterError, RunFailed
from csiaug.harness import ExperimentSpec, RunRecord, RunSummary, BASELINE
from csiaug.model import ClassifierConfig, to_batch
from csiaug.rng import RandomStream
from tests import fixtures

ROTATION_ARM = ('randomCircularRotation', PipelineSpec([AugmentationSpec(ROTATION)]))


def _tiny(arms=None, **kwargs):
    kwargs.setdefault('runs', 2)
    kwargs.setdefault('epochs', 2)
    kwargs.setdefault('lr', 1e-3)
    kwargs.setdefault('batch', 8)
    kwargs.setdefault('seed', 11)
    if arms is None:
        arms = [(BASELINE, PipelineSpec()), ROTATION_ARM]
    return ExperimentSpec('train', ['test'], arms=arms, **kwargs)


def _blob_subsets(per_class=12):
    return {
        'train': synthetic.separable_blobs(per_class, seed=1),
        'test': synthetic.separable_blobs(per_class, seed=2),
    }


class SelectBestEpochTestCase(unittest.TestCase):
    def test_ties_go_earliest(self):
        self.assertEqual(harness.select_best_epoch([0.5, 0.8, 0.8]), 2)
        self.assertEqual(harness.select_best_epoch([0.9, 0.1]), 1)
        self.assertEqual(harness.select_best_epoch([0.3]), 1)

    def test_empty(self):
        with self.assertRaises(ParameterError):
            harness.select_best_epoch([])


class EvaluateTestCase(unittest.TestCase):
    def test_constant_predictor(self):
        samples = fixtures.labeled((5, 5, 5))
        acc = harness.evaluate(fixtures.ConstantClassifier(), samples)
        self.assertAlmostEqual(acc, 1.0 / 3)

    def test_empty(self):
        with self.assertRaises(ParameterError):
            harness.evaluate(fixtures.ConstantClassifier(), [])


class ExperimentSpecTestCase(unittest.TestCase):
    def test_defaults(self):
        cfg = ExperimentSpec('W1.8k_LP', ['W1.8k_NP'])
        self.assertEqual([n for n, _ in cfg.arms], [
            'none', 'randomCircularRotation', 'randomResizedCrop',
            'randomAmplitude', 'randomContrast',
        ])
        self.assertEqual((cfg.runs, cfg.epochs, cfg.batch, cfg.lr), (10, 50, 16, 1e-4))
        self.assertEqual(cfg.name, 'W1.8k_LP->W1.8k_NP')
        self.assertEqual(cfg.split.train_fraction, 0.8)

    def test_full_scale(self):
        cfg = ExperimentSpec.full_scale('W1.8k_LP', ['W1.8k_NP'])
        self.assertEqual((cfg.runs, cfg.epochs), (10, 400))

    def test_all_problems_reported(self):
        with self.assertRaises(SchemaError) as cm:
            ExperimentSpec('a', [], arms=[ROTATION_ARM], runs=0, lr=-1.0)
        names = cm.exception.field_names
        for f in ('experiment.runs', 'experiment.lr', 'experiment.eval_subsets', 'experiment.arms'):
            self.assertIn(f, names)

    def test_baseline_must_be_empty(self):
        with self.assertRaises(SchemaError):
            ExperimentSpec('a', ['b'], arms=[(BASELINE, ROTATION_ARM[1])])

    def test_preset(self):
        cfg = harness.preset('BQ_LOS_to_NLOS', runs=1)
        self.assertEqual(cfg.train_subset, 'W1.8k_LB')
        self.assertEqual(cfg.eval_subsets, ['W1.8k_NB'])
        self.assertEqual(len(cfg.arms), 6)
        self.assertEqual(cfg.arms[-1][0], harness.COMBINED)
        self.assertEqual(len(cfg.arms[-1][1]), 4)
        self.assertEqual(len(harness.PRESETS), 8)


def _summary(values):
    """RunSummary over subset 't' from {arm: [accuracy or None]}"""
    runs = []
    for arm, accs in values.items():
        for k, acc in enumerate(accs):
            if acc is None:
                runs.append(RunRecord(arm, k, error='non-finite loss'))
            else:
                runs.append(RunRecord(arm, k, 1, 1.0, {'t': acc}))
    return RunSummary('x', 's', ['t'], list(values), runs)


class RunSummaryTestCase(unittest.TestCase):
    def test_stats(self):
        s = _summary({BASELINE: [0.4, 0.6]})
        mean, std = s.stats(BASELINE, 't')
        self.assertAlmostEqual(mean, 0.5)
        self.assertAlmostEqual(std, math.sqrt(0.02))
        self.assertEqual(s.delta(BASELINE, 't'), 0.0)

    def test_single_run_std(self):
        self.assertEqual(_summary({BASELINE: [0.7]}).stats(BASELINE, 't'), (0.7, 0.0))

    def test_delta(self):
        s = _summary({BASELINE: [0.5, 0.5], 'a': [0.6, 0.7]})
        self.assertAlmostEqual(s.delta('a', 't'), 0.15)

    def test_failed_runs_excluded(self):
        s = _summary({BASELINE: [0.5, None, 0.7]})
        self.assertEqual(len(s.failures), 1)
        self.assertEqual(s.accuracies(BASELINE, 't'), [0.5, 0.7])
        self.assertTrue(all(math.isnan(v) for v in _summary({BASELINE: [None]}).stats(BASELINE, 't')))

    def test_dict(self):
        s = _summary({BASELINE: [0.5, 0.6], 'a': [0.6, None]})
        d = s.to_dict()
        self.assertAlmostEqual(d['aggregates']['a']['t']['delta'], 0.05)
        t = RunSummary.from_dict(d)
        self.assertEqual(t.to_dict(), d)


class BeneficialArmTestCase(unittest.TestCase):
    def test_picks_improving_operators(self):
        arms = harness.single_arms()
        s = _summary({
            BASELINE: [0.5], 'randomCircularRotation': [0.6], 'randomResizedCrop': [0.4],
            'randomAmplitude': [0.55], 'randomContrast': [0.5],
        })
        name, pipeline = harness.beneficial_arm(s, 't', arms)
        self.assertEqual(name, harness.COMBINED)
        self.assertEqual(pipeline.kinds, (ROTATION, AMPLITUDE))

    def test_nothing_improves(self):
        s = _summary({BASELINE: [0.5], 'randomContrast': [0.4]})
        arms = [(BASELINE, PipelineSpec()), ('randomContrast', PipelineSpec([AugmentationSpec(CONTRAST)]))]
        self.assertIsNone(harness.beneficial_arm(s, 't', arms))


class AugmentedSamplesTestCase(unittest.TestCase):
    def setUp(self):
        self.base = numpy.stack([fixtures.random_spectrogram(w=16, h=4, seed=s).values
                                 for s in range(2)])

    def test_repeated_draws_augmented_independently(self):
        pipeline = PipelineSpec([AugmentationSpec(CONTRAST, 1.0)], global_seed=3)
        samples = harness.AugmentedSamples(self.base, [0, 1], pipeline)
        samples.epoch = 1
        first, label = samples[(0, 1)]
        again, _ = samples[(0, 1)]
        later, _ = samples[(5, 1)]
        self.assertEqual(label, 1)
        self.assertEqual(tuple(first.shape), (1, 4, 16))
        self.assertTrue(torch.equal(first, again))
        self.assertFalse(torch.equal(first, later))

    def test_empty_pipeline(self):
        samples = harness.AugmentedSamples(self.base, [0, 1], PipelineSpec())
        x, _ = samples[(3, 0)]
        self.assertTrue(torch.equal(x, to_batch(self.base[:1])[0]))

    def test_positioned_batches(self):
        labels = [0, 1, 2] * 3
        batches = list(harness.PositionedBatches(BalancedSampler(labels, RandomStream(1)), 4, False))
        self.assertEqual([len(b) for b in batches], [4, 4, 1])
        self.assertEqual([p for b in batches for p, _ in b], list(range(9)))
        expected = [i for b in balanced_index_batches(labels, 4, RandomStream(1)) for i in b]
        self.assertEqual([i for b in batches for _, i in b], expected)


class TrainTestCase(fixtures.TempDirTestCase):
    def test_separable_blobs(self):
        samples = synthetic.separable_blobs(60, seed=3)
        cfg = ExperimentSpec('x', ['x'], arms=[(BASELINE, PipelineSpec())], runs=1,
                             epochs=20, lr=3e-3, seed=2)
        data = split(samples, SplitSpec(0.8, True, 4))
        result = harness.train_one(PipelineSpec(), data, cfg, 0)
        self.assertEqual(len(result.history), 20)
        self.assertEqual(result.best_val, max(result.history))
        self.assertEqual(result.best_epoch, harness.select_best_epoch(result.history))
        self.assertGreaterEqual(result.best_val, 0.95)
        self.assertAlmostEqual(harness.evaluate(result.model, data[1]), result.best_val)

    def test_bounds_checked_before_training(self):
        arm = PipelineSpec([AugmentationSpec(ROTATION, lo=500)])
        with self.assertRaises(ParameterError):
            harness.train_one(arm, split(_blob_subsets()['train']), _tiny(), 0)

    def test_diverging_run(self):
        cfg = _tiny(classifier=ClassifierConfig(factory='tests.fixtures.NanClassifier'))
        subsets = _blob_subsets()
        with self.assertRaises(RunFailed) as cm:
            harness.train_one(PipelineSpec(), split(subsets['train']), cfg, 0, 'none')
        self.assertEqual(cm.exception.arm, 'none')
        summary = harness.run_ablation(cfg, subsets)
        self.assertEqual(len(summary.failures), 4)
        self.assertTrue(math.isnan(summary.stats(BASELINE, 'test')[0]))

    def test_ablation_deterministic_across_jobs(self):
        cfg = _tiny()
        subsets = _blob_subsets()
        a = harness.run_ablation(cfg, subsets, jobs=1).to_dict()
        b = harness.run_ablation(cfg, subsets, jobs=2).to_dict()
        self.assertEqual(a, b)
        self.assertEqual(len(a['runs']), 4)

    def test_closed_gate_matches_baseline(self):
        closed = ('closed', PipelineSpec([AugmentationSpec(ROTATION, 0.0)]))
        cfg = _tiny(arms=[(BASELINE, PipelineSpec()), closed])
        summary = harness.run_ablation(cfg, _blob_subsets())
        for k in range(cfg.runs):
            base = summary.records(BASELINE)[k]
            other = summary.records('closed')[k]
            self.assertEqual(base.test, other.test)
            self.assertEqual(base.best_epoch, other.best_epoch)
        self.assertEqual(summary.delta('closed', 'test'), 0.0)

    def test_checkpoints(self):
        cfg = _tiny(runs=1, epochs=1)
        harness.run_ablation(cfg, _blob_subsets(), checkpoint_dir=self.tmp)
        self.assertTrue(os.path.exists(self.path('none', 'run-0.pt')))
        self.assertTrue(os.path.exists(self.path('randomCircularRotation', 'run-0.pt')))

    def test_missing_subset(self):
        with self.assertRaises(SchemaError):
            harness.run_ablation(_tiny(), {'train': []})


class ShiftOracleTestCase(unittest.TestCase):
    """Rotation must help when train and test differ by a time shift"""

    @fixtures.slow
    def test_rotation_transfers(self):
        train, test = synthetic.shift_oracle_dataset(seed=5)
        cfg = ExperimentSpec('train', ['test'], arms=[(BASELINE, PipelineSpec()), ROTATION_ARM],
                             runs=3, epochs=50, lr=1e-3, seed=5)
        summary = harness.run_ablation(cfg, {'train': train, 'test': test}, jobs=2)
        none = summary.stats(BASELINE, 'test')[0]
        rotated = summary.stats('randomCircularRotation', 'test')[0]
        self.assertLess(none, 0.6)
        self.assertGreaterEqual(rotated - none, 0.2)

    def test_dataset_shape(self):
        train, test = synthetic.shift_oracle_dataset(6, 6, seed=1)
        self.assertEqual(len(train), 18)
        self.assertEqual(train[0].spectrogram.shape, (64, 8))
        with self.assertRaises(ValueError):
            synthetic.shift_oracle_dataset(w=16, k=8)

    def test_training_patterns_fixed(self):
        a = synthetic.shift_pattern(1, 64, 8, 56)
        b = synthetic.shift_pattern(2, 64, 8, 56)
        # high bump ends the sequence for class 1 and starts it for class 2
        self.assertGreater(a[56:].max(), 2.5)
        self.assertGreater(b[:8].max(), 2.5)
        self.assertLess(a[:8].max(), 2.1)
        numpy.testing.assert_allclose(a[8:56], 1.0)

    def test_rotation_reveals_order(self):
        rotated = numpy.roll(synthetic.shift_pattern(1, 64, 8, 56), 20)
        numpy.testing.assert_allclose(rotated, synthetic.shift_pattern(1, 64, 8, 12))


if __name__ == '__main__':
    unittest.main()
