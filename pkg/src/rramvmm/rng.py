"""Named random substreams derived from a single root seed."""

import zlib

import numpy as np


def _key(name):
    return zlib.crc32(str(name).encode("utf-8"))


def substream(seed, *names):
    """Return a Generator for the stream ``names`` under root ``seed``.

    The same (seed, names) pair always yields the same stream, and streams with
    different names are statistically independent, so e.g. device sampling can
    be varied without perturbing the data shuffle.

    >>> a = substream(0, "trial", 3, "device").random()
    >>> b = substream(0, "trial", 3, "device").random()
    >>> a == b
    True
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(n) for n in names))
    return np.random.default_rng(ss)


def as_generator(rng):
    """Accept a Generator, an int seed, or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
