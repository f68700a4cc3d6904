#!/usr/bin/python

import io
import json
import unittest

from csiaug import report
from csiaug.harness import RunRecord, RunSummary, BASELINE
from tests import fixtures


def _summary():
    runs = []
    accs = {
        BASELINE: [0.60, 0.62],
        'randomCircularRotation': [0.66, 0.684],
        'randomContrast': [0.58, 0.592],
    }
    for arm, values in accs.items():
        for k, acc in enumerate(values):
            runs.append(RunRecord(arm, k, 3, 0.9, {'W1.8k_NP': acc}))
    runs.append(RunRecord('randomContrast', 2, error='non-finite loss at epoch 4'))
    return RunSummary('PIFA_LOS_to_NLOS', 'W1.8k_LP', ['W1.8k_NP'], list(accs), runs)


class DeltaTestCase(unittest.TestCase):
    def test_markers(self):
        self.assertEqual(report.format_delta(0.061), '↑ 6.1')
        self.assertEqual(report.format_delta(-0.024), '↓ 2.4')
        self.assertEqual(report.format_delta(0.0), '∼ 0.0')
        self.assertEqual(report.format_delta(-0.0004), '∼ 0.0')
        self.assertEqual(report.format_delta(float('nan')), 'n/a')

    def test_cell(self):
        self.assertEqual(report.format_cell(0.6123, 0.0141), '61.2±1.4')


class MarkdownTestCase(unittest.TestCase):
    def test_table(self):
        text = report.format_markdown(_summary())
        lines = text.splitlines()
        self.assertEqual(lines[0], '| Augmentation | W1.8k_LP -> W1.8k_NP | Change |')
        self.assertEqual(lines[2], '| none | 61.0±1.4 |  |')
        self.assertEqual(lines[3], '| randomCircularRotation | 67.2±1.7 | ↑ 6.2 |')
        self.assertEqual(lines[4], '| randomContrast | 58.6±0.8 | ↓ 2.4 |')
        self.assertIn('Run 2 of randomContrast failed: non-finite loss at epoch 4', text)

    def test_stable(self):
        self.assertEqual(report.format_markdown(_summary()), report.format_markdown(_summary()))


class CsvTestCase(unittest.TestCase):
    def test_roundtrip_values(self):
        s = _summary()
        rows = report.parse_csv_report(report.format_csv(s))
        self.assertEqual(sorted(rows), sorted(s.arm_names))
        for arm in s.arm_names:
            mean, std = s.stats(arm, 'W1.8k_NP')
            cell = rows[arm]['W1.8k_NP']
            self.assertEqual(cell['mean'], mean)
            self.assertEqual(cell['std'], std)
            self.assertEqual(cell['delta'], s.delta(arm, 'W1.8k_NP'))

    def test_header(self):
        first = report.format_csv(_summary()).splitlines()[0]
        self.assertEqual(first, 'arm,W1.8k_NP:mean,W1.8k_NP:std,W1.8k_NP:delta')


class FormatTestCase(fixtures.TempDirTestCase):
    def test_unknown(self):
        with self.assertRaises(ValueError):
            report.format_report(_summary(), 'html')

    def test_write_and_load(self):
        s = _summary()
        paths = report.write_reports(s, self.path('out'))
        self.assertEqual([p.rsplit('/', 1)[-1] for p in paths],
                         ['report.md', 'report.csv', 'results.json'])
        loaded = report.load_summary(self.path('out', 'results.json'))
        self.assertEqual(loaded.to_dict(), s.to_dict())
        with io.open(self.path('out', 'report.md'), encoding='utf-8') as f:
            self.assertEqual(f.read(), report.format_markdown(s))

    def test_json_aggregates(self):
        d = json.loads(report.format_json(_summary()))
        self.assertEqual(len(d['runs']), 7)
        self.assertAlmostEqual(d['aggregates']['randomCircularRotation']['W1.8k_NP']['delta'], 0.062)


if __name__ == '__main__':
    unittest.main()
