"""Index-keyed random streams.

A stream is identified by ``(seed, key...)``; two different keys give
statistically independent Philox streams, and the same key always gives the
same stream regardless of how many other streams were created before it.
"""

import hashlib

import numpy as np


def stable_hash(obj):
    """32-bit hash of ``repr(obj)`` that does not depend on PYTHONHASHSEED."""
    return int.from_bytes(hashlib.sha256(repr(obj).encode()).digest()[:4], "little")


def stream(seed, *key):
    """Generator for the stream ``(seed, *key)``; key entries are non-negative ints."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in key))
    return np.random.Generator(np.random.Philox(ss))
