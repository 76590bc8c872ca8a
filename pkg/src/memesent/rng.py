"""Deterministic random-number streams.

All randomness in the toolkit flows from a single integer seed fanned
out into named substreams ("split", "init", "shuffle", "upsample", ...).
Each substream is an independent Philox counter-based generator keyed by
SHA-256(seed ":" name), so results are reproducible across runs and do
not depend on the order in which streams are consumed.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "subseed"]


def _digest(seed: int, name: str) -> bytes:
    return hashlib.sha256(f"{int(seed)}:{name}".encode("utf-8")).digest()


def substream(seed: int, name: str) -> np.random.Generator:
    """Return the named Philox substream for ``seed``.

    Calling this twice with the same (seed, name) yields generators that
    produce identical output.
    """
    key = int.from_bytes(_digest(seed, name)[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def subseed(seed: int, name: str) -> int:
    """Derive a 63-bit integer seed for the named substream.

    Used when an operation takes a plain integer seed rather than a
    generator (e.g. ``corpus.stratified_split``).
    """
    return int.from_bytes(_digest(seed, name)[16:24], "little") >> 1
