"""Canonical color ids: a deterministic, shareable RELABEL.

Color ids are 64-bit content hashes of structured keys (nested tuples of
ints/strings whose multiset parts are pre-sorted by the caller). Because an
id is a pure function of its key, the "one shared table" contract holds
across graphs, runs, and thread schedules with no coordination; a table
instance only adds collision detection and a place to hang statistics.
"""
from __future__ import annotations

import hashlib
from collections import Counter
from typing import Iterable, Sequence

from .errors import ColorCollisionError

Histogram = tuple[tuple[int, int], ...]


def _serialize(key) -> bytes:
    # repr of nested tuples of ints/strs/bools is canonical and fast.
    return repr(key).encode("utf-8")


def hash_key(key) -> int:
    """64-bit content hash of a structured key."""
    digest = hashlib.blake2b(_serialize(key), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class ColorTable:
    """Injective key -> color-id map with collision detection.

    relabel() is safe to call from worker threads: ids never depend on call
    order. The collision check tolerates benign races (two threads recording
    the same key) because the stored value is identical either way.
    """

    def __init__(self) -> None:
        self._seen: dict[int, bytes] = {}

    def relabel(self, key) -> int:
        data = _serialize(key)
        cid = int.from_bytes(
            hashlib.blake2b(data, digest_size=8).digest(), "big"
        )
        prev = self._seen.get(cid)
        if prev is None:
            self._seen[cid] = data
        elif prev != data:
            raise ColorCollisionError(
                f"color id {cid} assigned to two distinct keys"
            )
        return cid

    def __len__(self) -> int:
        return len(self._seen)


def histogram(colors: Iterable[int]) -> Histogram:
    """Sorted (color, count) pairs; the comparable fingerprint of a coloring."""
    return tuple(sorted(Counter(colors).items()))


def class_count(colors: Iterable[int]) -> int:
    return len(set(colors))


def partition_of(colors: Sequence[int]) -> frozenset[frozenset[int]]:
    """Index partition induced by a coloring (for partition-equality checks)."""
    blocks: dict[int, list[int]] = {}
    for i, c in enumerate(colors):
        blocks.setdefault(c, []).append(i)
    return frozenset(frozenset(b) for b in blocks.values())


def refines(finer: Sequence[int], coarser: Sequence[int]) -> bool:
    """True when equal colors in `finer` imply equal colors in `coarser`."""
    seen: dict[int, int] = {}
    for f, c in zip(finer, coarser):
        if f in seen:
            if seen[f] != c:
                return False
        else:
            seen[f] = c
    return True
