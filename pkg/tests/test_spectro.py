#!/usr/bin/python

import unittest
import numpy

from csiaug import spectro
from csiaug.csi import CsiRecord
from csiaug.errors import BoundsError, ParameterError


def _series(n, h=52, seed=0):
    rows = numpy.random.default_rng(seed).uniform(0, 50, size=(n, h))
    return spectro.AmplitudeSeries(rows)


class TrimTestCase(unittest.TestCase):
    def test_identity(self):
        s = _series(1000)
        t = spectro.trim(s, 0, 1000)
        numpy.testing.assert_array_equal(t.rows, s.rows)
        self.assertEqual(t.rate_hz, s.rate_hz)

    def test_window(self):
        s = _series(1000)
        t = spectro.trim(s, 100, 500)
        self.assertEqual(len(t), 400)
        numpy.testing.assert_array_equal(t.rows[0], s.rows[100])

    def test_invalid(self):
        s = _series(1000)
        for start, end in [(500, 100), (0, 1001), (-1, 10), (5, 5)]:
            with self.assertRaises(BoundsError):
                spectro.trim(s, start, end)


class SegmentTestCase(unittest.TestCase):
    def test_850(self):
        out = spectro.segment(_series(850), 400, 400)
        self.assertEqual(len(out), 2)
        self.assertEqual(out[0].shape, (400, 52))

    def test_exact_fit(self):
        s = _series(400)
        out = spectro.segment(s)
        self.assertEqual(len(out), 1)
        numpy.testing.assert_array_equal(out[0].values, s.rows)

    def test_too_short(self):
        self.assertEqual(spectro.segment(_series(399)), [])

    def test_invalid_params(self):
        with self.assertRaises(ParameterError):
            spectro.segment(_series(10), 0, 1)
        with self.assertRaises(ParameterError):
            spectro.segment(_series(10), 1, 0)

    def test_concatenation(self):
        s = _series(1234, h=3)
        out = spectro.segment(s, 100, 100)
        joined = numpy.concatenate([x.values for x in out])
        numpy.testing.assert_array_equal(joined, s.rows[:1200])

    def test_count_formula(self):
        rng = numpy.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(0, 300))
            window = int(rng.integers(1, 60))
            hop = int(rng.integers(1, 60))
            out = spectro.segment(_series(n, h=2), window, hop)
            expected = (n - window) // hop + 1 if n >= window else 0
            self.assertEqual(len(out), expected)
            for i, x in enumerate(out):
                self.assertEqual(x.w, window)
                numpy.testing.assert_array_equal(x.column(0), _series(n, h=2).rows[i * hop])


class TypesTestCase(unittest.TestCase):
    def test_rejects_negative(self):
        with self.assertRaises(BoundsError):
            spectro.Spectrogram([[1.0, -0.5]])
        with self.assertRaises(BoundsError):
            spectro.AmplitudeSeries([[float('nan')]])

    def test_frozen(self):
        x = spectro.Spectrogram(numpy.ones((4, 2)))
        with self.assertRaises(ValueError):
            x.values[0, 0] = 3.0

    def test_series_from_records(self):
        iq = [(0, 3)] * 64
        s = spectro.series_from_records([CsiRecord(i * 10, i, None, iq) for i in range(5)])
        self.assertEqual(len(s), 5)
        self.assertEqual(s.height, 52)
        self.assertTrue(numpy.all(s.rows == 3.0))
        self.assertAlmostEqual(s.duration_s, 0.05)

    def test_empty_series(self):
        s = spectro.series_from_records([])
        self.assertEqual(len(s), 0)
        self.assertEqual(spectro.segment(s), [])


if __name__ == '__main__':
    unittest.main()
