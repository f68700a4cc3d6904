#!/usr/bin/python

import os
import unittest

from csiaug import dataset, fetch, specfile
from csiaug.errors import FetchError, FormatError
from tests import fixtures


class StatusLineTestCase(unittest.TestCase):
    def test_skips_continue(self):
        header = [b'HTTP/1.1 100 Continue\r\n', b'\r\n', b'HTTP/1.1 404 Not Found\r\n',
                  b'Content-Length: 0\r\n']
        self.assertEqual(fetch._status_line(header), 'Not Found')

    def test_no_reason(self):
        self.assertEqual(fetch._status_line([b'HTTP/2 204\r\n']), '')
        self.assertIsNone(fetch._status_line([]))


class FetchTestCase(fixtures.TempDirTestCase):
    def setUp(self):
        fixtures.TempDirTestCase.setUp(self)
        self.bodies = {}
        for i in range(3):
            p = self.path('src_%d.csis' % (i,))
            specfile.write_spectrogram(p, fixtures.random_spectrogram(seed=i), i)
            with open(p, 'rb') as f:
                self.bodies['/set/W1.8k_LB/%d.csis' % (i,)] = f.read()
        self.server = fixtures.FileServer(self.bodies)
        self.session = fetch.FetchSession(self.server.url + 'set')

    def tearDown(self):
        self.session.close()
        self.server.shutdown()
        fixtures.TempDirTestCase.tearDown(self)

    def manifest(self):
        entries = []
        for i in range(3):
            rel = os.path.join('W1.8k_LB', '%d.csis' % (i,))
            entries.append(dataset.ManifestEntry(rel, i, digest=dataset.file_digest(
                self.path('src_%d.csis' % (i,))
            )))
        return dataset.SubsetManifest('W1.8k_LB', entries, (1, 1, 1), self.path('data'))

    def test_get(self):
        self.assertEqual(self.session.get('W1.8k_LB/0.csis'), self.bodies['/set/W1.8k_LB/0.csis'])

    def test_not_found(self):
        with self.assertRaises(FetchError) as cm:
            self.session.get('W1.8k_LB/9.csis')
        self.assertEqual(cm.exception.code, 404)
        self.assertEqual(cm.exception.message, 'Not Found')
        self.assertTrue(cm.exception.url.endswith('/set/W1.8k_LB/9.csis'))

    def test_download(self):
        dest = self.path('deep', 'dir', 'x.csis')
        n = self.session.download('W1.8k_LB/1.csis', dest)
        self.assertEqual(n, len(self.bodies['/set/W1.8k_LB/1.csis']))
        self.assertFalse(os.path.exists(dest + '.part'))
        x, label = specfile.read_spectrogram(dest)
        self.assertEqual(label, 1)

    def test_fetch_manifest_files(self):
        manifest = self.manifest()
        self.assertEqual(fetch.fetch_manifest_files(manifest, self.session), 3)
        self.assertTrue(dataset.verify_manifest(manifest).passed)
        # present files are not fetched again
        self.assertEqual(fetch.fetch_manifest_files(manifest, self.session), 0)

    def test_digest_mismatch(self):
        manifest = self.manifest()
        manifest.files[2].digest = 'sha256:' + '0' * 64
        with self.assertRaises(FormatError):
            fetch.fetch_manifest_files(manifest, self.session)
        self.assertFalse(os.path.exists(self.path('data', 'W1.8k_LB', '2.csis')))
        self.assertTrue(os.path.exists(self.path('data', 'W1.8k_LB', '0.csis')))

    def test_connection_refused(self):
        self.server.shutdown()
        session = fetch.FetchSession(self.server.url)
        try:
            with self.assertRaises(FetchError) as cm:
                session.get('anything')
            self.assertEqual(cm.exception.code, 0)
        finally:
            session.close()
        self.server = fixtures.FileServer({})


if __name__ == '__main__':
    unittest.main()
