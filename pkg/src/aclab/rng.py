"""Named random substreams.

Every generator is numpy's PCG64 (bit generator version shipped with
numpy >= 1.17) seeded through a :class:`numpy.random.SeedSequence` whose
spawn key is derived from a dotted label, e.g. ``"verify.decouple.case"``.
Streams are therefore reproducible across platforms for a fixed numpy.
"""
from __future__ import annotations

import hashlib

import numpy as np

PRNG_NAME = "numpy.PCG64/SeedSequence-v1"


def _label_key(label: str) -> tuple[int, ...]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def substream(seed: int, label: str = "", *index: int) -> np.random.Generator:
    """Generator for ``(seed, label, *index)``; distinct labels never collide in practice."""
    key = _label_key(label) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
