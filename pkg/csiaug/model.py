#!/usr/bin/python

"""Reference activity classifier

A compact convolutional network standing in for the much larger
backbone a full reproduction would plug in through
ClassifierConfig.factory.
"""

import importlib
import math
import numpy
import torch
from torch import nn

NUM_CLASSES = 3


class ClassifierConfig(object):
    """What network to build and how to optimize it

    :param factory: dotted path of a callable (height, width, config)
      returning an nn.Module that maps (N, 1, h, w) to (N, 3) scores
    :param channels: feature counts of the convolution blocks
    :param kernel: convolution kernel size
    :param betas: Adam moment decay rates
    :param eps: Adam epsilon
    """
    __slots__ = ('factory', 'channels', 'kernel', 'betas', 'eps')

    def __init__(self, factory='csiaug.model.CompactCNN', channels=(16, 32, 64),
                 kernel=3, betas=(0.9, 0.999), eps=1e-8):
        self.factory = factory
        self.channels = tuple(int(c) for c in channels)
        self.kernel = int(kernel)
        self.betas = tuple(float(b) for b in betas)
        self.eps = float(eps)

    def to_dict(self):
        return {
            'factory': self.factory,
            'channels': list(self.channels),
            'kernel': self.kernel,
            'betas': list(self.betas),
            'eps': self.eps,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


class CompactCNN(nn.Module):
    """conv-relu-maxpool blocks, global average pooling, linear head"""

    def __init__(self, height, width, config=None):
        nn.Module.__init__(self)
        if config is None:
            config = ClassifierConfig()
        layers = []
        in_ch = 1
        for out_ch in config.channels:
            layers += [
                nn.Conv2d(in_ch, out_ch, config.kernel, padding=config.kernel // 2),
                nn.ReLU(),
                nn.MaxPool2d(2),
            ]
            in_ch = out_ch
        down = 2 ** len(config.channels)
        if height < down or width < down:
            raise ValueError("input %dx%d too small for %d downsampling blocks" % (
                height, width, len(config.channels)
            ))
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.head = nn.Linear(in_ch, NUM_CLASSES)

    def forward(self, x):
        x = self.pool(self.features(x))
        return self.head(torch.flatten(x, 1))


def _resolve(dotted):
    module, _, name = dotted.rpartition('.')
    return getattr(importlib.import_module(module), name)


def reset_parameters(model, generator):
    """Re-initialize conv and linear layers from an explicit generator

    Same distributions as torch's defaults, but independent of the
    global RNG so concurrent runs do not interfere.
    """
    for m in model.modules():
        if isinstance(m, (nn.Conv2d, nn.Linear)):
            nn.init.kaiming_uniform_(m.weight, a=math.sqrt(5), generator=generator)
            if m.bias is not None:
                fan_in = m.weight[0].numel()
                bound = 1.0 / math.sqrt(fan_in) if fan_in > 0 else 0.0
                nn.init.uniform_(m.bias, -bound, bound, generator=generator)


def build_classifier(config, height, width, seed):
    model = _resolve(config.factory)(height, width, config)
    generator = torch.Generator().manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
    reset_parameters(model, generator)
    return model


def build_optimizer(model, config, lr):
    return torch.optim.Adam(model.parameters(), lr=lr, betas=config.betas, eps=config.eps)


def to_batch(values, dtype=torch.float32):
    """(N, w, h) time-major stack to an (N, 1, h, w) tensor"""
    values = numpy.asarray(values)
    return torch.from_numpy(numpy.ascontiguousarray(values.transpose(0, 2, 1))).to(dtype).unsqueeze(1)


def gradient_check(model, x, y, coordinates=64, step=1e-6, seed=0):
    """Compare autograd against central differences in float64

    Checks `coordinates` parameter entries picked at random. Returns the
    largest relative error |a - n| / max(|a|, |n|, 1e-5); the floor
    keeps near-zero gradients from amplifying rounding noise.
    """
    model = model.double()
    x = x.double()
    loss_fn = nn.CrossEntropyLoss()
    model.zero_grad()
    loss_fn(model(x), y).backward()
    params = [p for p in model.parameters() if p.requires_grad]
    sizes = [p.numel() for p in params]
    rng = numpy.random.default_rng(seed)
    picks = rng.choice(sum(sizes), size=min(coordinates, sum(sizes)), replace=False)
    offsets = numpy.cumsum([0] + sizes)
    worst = 0.0
    with torch.no_grad():
        for flat in picks:
            i = int(numpy.searchsorted(offsets, flat, side='right') - 1)
            p = params[i].view(-1)
            j = int(flat - offsets[i])
            analytic = params[i].grad.view(-1)[j].item()
            orig = p[j].item()
            p[j] = orig + step
            plus = loss_fn(model(x), y).item()
            p[j] = orig - step
            minus = loss_fn(model(x), y).item()
            p[j] = orig
            numeric = (plus - minus) / (2 * step)
            err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-5)
            worst = max(worst, err)
    return worst
