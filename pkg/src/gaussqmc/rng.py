"""Seeding and stream splitting.

All randomness in the package flows from a 64-bit master seed through named
substreams, so that repetitions can run in any order (or in parallel) and
still reproduce bit-identically:

* ``derive_seed(master, *path)`` hashes the master seed together with a
  path of labels (method name, sample-size exponent, repetition index, ...)
  into an independent 64-bit substream seed.  BLAKE2b keyed hashing makes
  the derivation platform-stable.
* ``generator(master, *path)`` builds a counter-based ``numpy`` Philox
  generator on that substream; Philox streams with distinct keys never
  overlap.
* ``mix_u64`` is a SplitMix64 finalizer on whole uint64 arrays.  The
  scrambling code uses it as a keyed counter hash: random bits are a pure
  function of (seed, coordinate, level, prefix), which is what makes
  scrambled point sets reproducible without storing permutation trees.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def derive_seed(master: int, *path) -> int:
    """Derive a 64-bit substream seed from a master seed and a label path."""
    h = hashlib.blake2b(digest_size=8, key=int(master & MASK64).to_bytes(8, "little"))
    for part in path:
        if isinstance(part, (int, np.integer)):
            h.update(b"i" + int(part).to_bytes(16, "little", signed=True))
        elif isinstance(part, str):
            h.update(b"s" + part.encode("utf-8") + b"\x00")
        else:
            raise TypeError(f"seed path parts must be int or str, got {type(part)!r}")
    return int.from_bytes(h.digest(), "little")


def generator(master: int, *path) -> np.random.Generator:
    """Counter-based Philox generator on the (master, *path) substream."""
    return np.random.Generator(np.random.Philox(key=derive_seed(master, *path)))


def mix_int(z: int) -> int:
    """SplitMix64 finalizer for a single Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def mix_u64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64 arrays (wrapping mults)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))
