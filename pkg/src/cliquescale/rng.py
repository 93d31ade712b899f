"""Reproducible random streams.

Every stochastic routine in the package draws from a counter-based Philox
generator whose 128-bit key is derived from ``(seed, role, index)``.  Distinct
keys give statistically independent streams, so weights, per-row edge draws
and per-block Monte Carlo chunks can be generated in any order (or in
parallel) and still reproduce bit-identically for a fixed seed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_KEY_MASK = (1 << 128) - 1


def derive_key(seed: int, *path) -> int:
    """128-bit stream key for (seed, *path), stable across platforms/runs."""
    text = "\x1f".join(str(p) for p in (int(seed), *path))
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


def stream(seed: int, *path) -> np.random.Generator:
    """Independent generator addressed by (seed, *path)."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *path)))


def substream(key: int, index: int) -> np.random.Generator:
    """Cheap split of a derived key into per-index streams.

    XOR-ing the low bits keeps key derivation off the hot path; counter-based
    generators treat any two distinct keys as independent streams.
    """
    return np.random.Generator(np.random.Philox(key=(key ^ int(index)) & _KEY_MASK))
