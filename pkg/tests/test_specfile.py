#!/usr/bin/python

import struct
import unittest
import numpy
from PIL import Image

from csiaug import specfile
from csiaug.errors import FormatError
from tests import fixtures


class EncodeTestCase(unittest.TestCase):
    def test_layout(self):
        x = fixtures.random_spectrogram(w=5, h=3, seed=1)
        data = specfile.encode(x, 2)
        self.assertEqual(len(data), 22 + 4 * 5 * 3)
        self.assertEqual(data[:4], b'CSIS')
        self.assertEqual(struct.unpack_from('<HIIb', data, 4), (1, 5, 3, 2))
        self.assertEqual(data[15:22], b'\0' * 7)
        first = struct.unpack_from('<f', data, 22)[0]
        self.assertAlmostEqual(first, x.values[0, 0], places=5)
        second = struct.unpack_from('<f', data, 26)[0]
        self.assertAlmostEqual(second, x.values[0, 1], places=5)

    def test_roundtrip_bit_exact(self):
        values = numpy.random.default_rng(3).uniform(0, 100, size=(40, 52)).astype(numpy.float32)
        x = fixtures.spectrogram(values)
        y, label = specfile.decode(specfile.encode(x))
        self.assertEqual(label, specfile.UNLABELED)
        self.assertEqual(y.values.astype(numpy.float32).tobytes(), values.tobytes())
        self.assertEqual(specfile.encode(y), specfile.encode(x))

    def test_label_range(self):
        with self.assertRaises(FormatError):
            specfile.encode(fixtures.random_spectrogram(), 200)


class DecodeErrorTestCase(unittest.TestCase):
    def setUp(self):
        self.data = specfile.encode(fixtures.random_spectrogram(w=4, h=2), 1)

    def assertRejected(self, data):
        with self.assertRaises(FormatError) as cm:
            specfile.decode(data, 'f.csis')
        self.assertEqual(cm.exception.path, 'f.csis')
        return cm.exception

    def test_bad_magic(self):
        self.assertRejected(b'XSIS' + self.data[4:])

    def test_bad_version(self):
        self.assertRejected(self.data[:4] + struct.pack('<H', 2) + self.data[6:])

    def test_reserved(self):
        self.assertRejected(self.data[:20] + b'\1' + self.data[21:])

    def test_truncated(self):
        self.assertRejected(self.data[:10])
        self.assertRejected(self.data[:-1])
        self.assertRejected(self.data + b'\0')

    def test_negative_payload(self):
        data = self.data[:22] + struct.pack('<f', -1.0) + self.data[26:]
        self.assertRejected(data)

    def test_nan_payload(self):
        data = self.data[:22] + struct.pack('<f', float('nan')) + self.data[26:]
        self.assertRejected(data)


class FileTestCase(fixtures.TempDirTestCase):
    def test_write_read(self):
        x = fixtures.random_spectrogram(w=7, h=52, seed=4)
        n = specfile.write_spectrogram(self.path('a.csis'), x, 0)
        self.assertEqual(n, 22 + 4 * 7 * 52)
        y, label = specfile.read_spectrogram(self.path('a.csis'))
        self.assertEqual(label, 0)
        numpy.testing.assert_allclose(y.values, x.values, rtol=1e-6)
        self.assertEqual(len(specfile.payload(self.path('a.csis'))), 4 * 7 * 52)


class PreviewTestCase(fixtures.TempDirTestCase):
    def test_dimensions(self):
        x = fixtures.random_spectrogram(w=400, h=52)
        img = specfile.to_image(x)
        self.assertEqual(img.size, (400, 52))
        self.assertEqual(img.mode, 'L')
        specfile.write_preview(self.path('p.png'), x)
        with Image.open(self.path('p.png')) as f:
            self.assertEqual(f.format, 'PNG')
            self.assertEqual(f.size, (400, 52))

    def test_constant_is_mid_gray(self):
        img = specfile.to_image(fixtures.spectrogram(numpy.full((10, 4), 3.5)))
        self.assertEqual(set(numpy.asarray(img).ravel()), set([128]))

    def test_extremes(self):
        values = numpy.ones((6, 3))
        values[2, 1] = 0.0
        values[4, 0] = 9.0
        pixels = numpy.asarray(specfile.to_image(fixtures.spectrogram(values)))
        # rows are subcarriers, columns are time
        self.assertEqual(pixels[1, 2], 0)
        self.assertEqual(pixels[0, 4], 255)

    def test_side_by_side(self):
        a = fixtures.random_spectrogram(w=20, h=5)
        b = fixtures.random_spectrogram(w=20, h=5, seed=1)
        specfile.write_side_by_side(self.path('s.png'), a, b)
        with Image.open(self.path('s.png')) as f:
            self.assertEqual(f.size, (20, 12))


if __name__ == '__main__':
    unittest.main()
