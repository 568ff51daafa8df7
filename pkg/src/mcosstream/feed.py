"""Core feed types: interned ids, object-id sets, relations and windows.

Object-id sets are stored as Python ``int`` bitmasks over interned ids, so
intersection is ``a & b``, containment is ``a & b == a`` and the value is its
own canonical, hashable form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Sequence, Tuple

from .errors import ArgumentError, RangeError

IdSet = int
"""Bitmask over interned object ids (bit ``k`` set means id ``k`` present)."""

EMPTY: IdSet = 0


def make_idset(ids: Iterable[int]) -> IdSet:
    mask = 0
    for k in ids:
        mask |= 1 << k
    return mask


def members(ids: IdSet) -> Tuple[int, ...]:
    """Interned ids of ``ids`` in ascending order."""
    out = []
    k = 0
    while ids:
        low = ids & -ids
        k = low.bit_length() - 1
        out.append(k)
        ids ^= low
    return tuple(out)


def size(ids: IdSet) -> int:
    return ids.bit_count()


def is_subset(a: IdSet, b: IdSet) -> bool:
    return a & b == a


class Interner:
    """Bijective map between external tokens and dense integers."""

    def __init__(self, tokens: Iterable[Hashable] = ()) -> None:
        self._index: Dict[Hashable, int] = {}
        self._tokens: List[Hashable] = []
        for t in tokens:
            self.intern(t)

    def intern(self, token: Hashable) -> int:
        k = self._index.get(token)
        if k is None:
            k = len(self._tokens)
            self._index[token] = k
            self._tokens.append(token)
        return k

    def lookup(self, token: Hashable) -> int:
        return self._index[token]

    def extern(self, k: int) -> Hashable:
        return self._tokens[k]

    def __contains__(self, token: Hashable) -> bool:
        return token in self._index

    def __len__(self) -> int:
        return len(self._tokens)

    def __iter__(self) -> Iterator[Hashable]:
        return iter(self._tokens)

    def copy(self) -> "Interner":
        return Interner(self._tokens)


@dataclass(frozen=True)
class ObjectRecord:
    fid: int
    id: str
    cls: str


@dataclass(frozen=True)
class VideoRelation:
    """The (fid, id, class) relation arranged as one id set per frame.

    ``frames[f]`` is the id set of frame ``f``; ``class_of`` maps interned ids
    to class labels and ``ids`` holds the token interning.
    """

    frames: Tuple[IdSet, ...]
    class_of: Mapping[int, str]
    ids: Interner = field(compare=False)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    def tokens(self, ids: IdSet) -> Tuple[Hashable, ...]:
        return tuple(self.ids.extern(k) for k in members(ids))

    def idset(self, tokens: Iterable[Hashable]) -> IdSet:
        return make_idset(self.ids.lookup(t) for t in tokens)

    def records(self) -> Iterator[ObjectRecord]:
        for fid, mask in enumerate(self.frames):
            for k in members(mask):
                yield ObjectRecord(fid, str(self.ids.extern(k)), self.class_of[k])

    @classmethod
    def from_frames(
        cls,
        frames: Sequence[Iterable[Hashable]],
        class_of: Mapping[Hashable, str] | str = "car",
    ) -> "VideoRelation":
        """Build a relation from per-frame token collections.

        ``class_of`` is either a token->label mapping or one label for all.
        """
        interner = Interner()
        masks = []
        labels: Dict[int, str] = {}
        for tokens in frames:
            mask = 0
            for t in tokens:
                k = interner.intern(t)
                mask |= 1 << k
                labels[k] = class_of if isinstance(class_of, str) else class_of[t]
            masks.append(mask)
        return cls(tuple(masks), labels, interner)


def object_set_of(relation: VideoRelation, fid: int) -> IdSet:
    if not 0 <= fid < len(relation.frames):
        raise RangeError(f"frame {fid} outside 0..{len(relation.frames) - 1}")
    return relation.frames[fid]


def cooc(ids: IdSet, relation: VideoRelation, fid: int) -> bool:
    """True iff every object of ``ids`` is present in frame ``fid``."""
    if not ids:
        raise ArgumentError("co-occurrence needs a non-empty id set")
    return is_subset(ids, object_set_of(relation, fid))


@dataclass(frozen=True)
class WindowView:
    anchor: int
    size: int

    @property
    def lo(self) -> int:
        return max(0, self.anchor - self.size + 1)

    @property
    def frames(self) -> range:
        return range(self.lo, self.anchor + 1)

    def __contains__(self, fid: int) -> bool:
        return self.lo <= fid <= self.anchor


def window_of(i: int, w: int) -> WindowView:
    # A window of size w at frame i holds the last w frames, [i - w + 1, i].
    if w < 1:
        raise ArgumentError(f"window size must be >= 1, got {w}")
    if i < 0:
        raise ArgumentError(f"frame index must be >= 0, got {i}")
    return WindowView(i, w)
