#!/usr/bin/python

"""Portable, seedable random streams

Everything random in csiaug (augmentation draws, batch sampling,
dataset splits) comes from a RandomStream so that results can be
reproduced bit for bit by any implementation of the following:

- mix64(z) is the SplitMix64 finalizer:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)
  with all arithmetic modulo 2**64.
- derive_seed(seed, p1, p2, ...) folds each part into the seed:
    h = mix64(seed)
    h = mix64(h ^ mix64(p_i + GOLDEN))   for each part p_i
  Parts are 64-bit integers; strings are first folded with fold_text.
- A stream with seed s yields mix64(s + i * GOLDEN) for i = 1, 2, ...
- uniform() is the top 53 bits of the next word times 2**-53.
- integer(lo, hi) draws words until one falls below the largest
  multiple of (hi - lo + 1) that fits in 2**64 and returns
  lo + word % (hi - lo + 1).
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_TWO_POW_M53 = 1.0 / (1 << 53)


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fold_text(text):
    """64-bit key for a string (operator kinds, arm names)"""
    h = 0
    for b in text.encode('utf-8'):
        h = mix64(h ^ (b + GOLDEN))
    return h


def derive_seed(seed, *parts):
    h = mix64(seed)
    for p in parts:
        if isinstance(p, str):
            p = fold_text(p)
        h = mix64(h ^ mix64((p + GOLDEN) & MASK64))
    return h


class RandomStream(object):
    """SplitMix64 generator with counted draws

    :param seed: any integer, reduced modulo 2**64
    """
    __slots__ = ('seed', 'state', 'words')

    def __init__(self, seed):
        self.seed = seed & MASK64
        self.state = self.seed
        self.words = 0

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        self.words += 1
        return mix64(self.state)

    def uniform(self, lo=0.0, hi=1.0):
        u = (self.next_u64() >> 11) * _TWO_POW_M53
        if lo == 0.0 and hi == 1.0:
            return u
        return lo + (hi - lo) * u

    def integer(self, lo, hi):
        """Uniform integer on {lo, ..., hi}, both ends included"""
        if hi < lo:
            raise ValueError("empty integer range [%d, %d]" % (lo, hi))
        span = hi - lo + 1
        limit = ((1 << 64) // span) * span
        while True:
            u = self.next_u64()
            if u < limit:
                return lo + u % span

    def coin(self):
        return self.uniform() < 0.5

    def spawn(self, *parts):
        """Independent child stream keyed by parts"""
        return RandomStream(derive_seed(self.seed, *parts))

    def __repr__(self):
        return 'RandomStream(seed=%#018x, words=%d)' % (self.seed, self.words)


def sample_stream(global_seed, epoch, index):
    """The per-sample augmentation stream for (epoch, sample index)"""
    return RandomStream(derive_seed(global_seed, epoch, index))
