#!/usr/bin/python

"""Helpers shared by the csiaug tests"""

import http.server
import os
import shutil
import tempfile
import threading
import unittest
import numpy
import torch
from torch import nn

import csiaug
from csiaug.dataset import Sample

SLOW = os.environ.get('CSIAUG_SLOW_TESTS') == '1'


def slow(f):
    return unittest.skipUnless(SLOW, "set CSIAUG_SLOW_TESTS=1 to run")(f)


def spectrogram(values):
    return csiaug.Spectrogram(numpy.asarray(values, dtype=numpy.float64))


def time_row(values):
    """Spectrogram with one subcarrier whose time series is values"""
    return spectrogram(numpy.asarray(values, dtype=numpy.float64)[:, None])


def random_spectrogram(w=16, h=4, seed=0, lo=0.0, hi=10.0):
    return spectrogram(numpy.random.default_rng(seed).uniform(lo, hi, size=(w, h)))


def labeled(counts, w=8, h=4):
    """Samples with the given per-class counts, value = label + 1"""
    samples = []
    for label, n in enumerate(counts):
        for i in range(n):
            samples.append(Sample(
                spectrogram(numpy.full((w, h), float(label + 1))), label,
                source_id='%d-%d' % (label, i),
            ))
    return samples


class NanClassifier(nn.Module):
    """Classifier factory whose scores are always NaN"""

    def __init__(self, height, width, config):
        nn.Module.__init__(self)
        self.head = nn.Linear(1, 3)

    def forward(self, x):
        return self.head(x.mean(dim=(1, 2, 3)).unsqueeze(1)) * float('nan')


class ConstantClassifier(nn.Module):
    """Always predicts class 0"""

    def forward(self, x):
        scores = torch.zeros(x.shape[0], 3, dtype=x.dtype)
        scores[:, 0] = 1.0
        return scores


class ScriptedStream(object):
    """Stands in for a RandomStream, replaying fixed uniforms and integers"""

    def __init__(self, uniforms=(), integers=()):
        self.uniforms = list(uniforms)
        self.integers = list(integers)

    def uniform(self, lo=0.0, hi=1.0):
        return lo + (hi - lo) * self.uniforms.pop(0)

    def integer(self, lo, hi):
        v = self.integers.pop(0)
        assert lo <= v <= hi
        return v

    def coin(self):
        return self.uniform() < 0.5


class TempDirTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp(prefix='csiaug-test-')

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def path(self, *parts):
        return os.path.join(self.tmp, *parts)


class FileHandler(http.server.BaseHTTPRequestHandler):
    """Serves server.documents, a dict of path -> bytes"""

    def log_request(self, *args, **kwargs):
        pass

    def send_body(self, content_type, body):
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        body = self.server.documents.get(self.path)
        if body is None:
            self.send_response(404, "Not Found")
            return self.send_body("text/plain", b"not found")
        self.send_response(200)
        return self.send_body("application/octet-stream", body)


class FileServer(object):
    def __init__(self, documents):
        httpd = http.server.HTTPServer(('localhost', 0), FileHandler)
        httpd.documents = dict(documents)
        self.httpd = httpd
        self.url = 'http://localhost:%d/' % (httpd.server_port,)
        thread = threading.Thread(target=httpd.serve_forever)
        thread.daemon = True
        thread.start()

    def shutdown(self):
        self.httpd.shutdown()
        self.httpd.server_close()
