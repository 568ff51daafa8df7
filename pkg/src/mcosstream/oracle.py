"""Brute-force MCOS enumeration used as the reference for every engine.

Deliberately written against plain ``frozenset`` objects rather than the
bitmask representation the engines use, so that it shares no code path with
them.
"""

from __future__ import annotations

from typing import AbstractSet, Dict, FrozenSet, Hashable, Iterable, Sequence, Set, Tuple

from .errors import ArgumentError

MAX_ORACLE_FRAMES = 24

Frames = Sequence[Tuple[int, AbstractSet[Hashable]]]


def is_mcos(ids: AbstractSet[Hashable], frame_sets: Iterable[AbstractSet[Hashable]]) -> bool:
    """Whether ``ids`` is the maximum co-occurrence object set of the frames.

    An empty frame collection has no MCOS: every superset is vacuously a COS.
    """
    frame_sets = list(frame_sets)
    if not ids or not frame_sets:
        return False
    common = frozenset(frame_sets[0])
    for objs in frame_sets[1:]:
        common &= objs
    return common == frozenset(ids)


def oracle_mcos(window: Frames, d: int = 0) -> Set[Tuple[FrozenSet[Hashable], FrozenSet[int]]]:
    """All (MCOS, frame set) pairs of a window with at least ``d`` frames.

    ``window`` is a sequence of ``(fid, object set)`` pairs. Candidates are the
    closure of the frames' object sets under intersection; each candidate X is
    kept with F_X = {f : X <= O_f} when X is exactly the intersection over F_X.
    """
    if len(window) > MAX_ORACLE_FRAMES:
        raise ArgumentError(
            f"oracle refuses windows over {MAX_ORACLE_FRAMES} frames (got {len(window)})"
        )
    frames = [(fid, frozenset(objs)) for fid, objs in window]
    base = {objs for _, objs in frames if objs}
    closure: Set[FrozenSet[Hashable]] = set(base)
    frontier = set(base)
    while frontier:
        fresh = set()
        for x in frontier:
            for y in base:
                z = x & y
                if z and z not in closure:
                    fresh.add(z)
        closure |= fresh
        frontier = fresh

    out = set()
    for x in closure:
        support = [(fid, objs) for fid, objs in frames if x <= objs]
        if len(support) < d:
            continue
        if is_mcos(x, [objs for _, objs in support]):
            out.add((x, frozenset(fid for fid, _ in support)))
    return out


def window_frames(frames: Sequence[AbstractSet[Hashable]], i: int, w: int) -> Frames:
    """The ``(fid, set)`` pairs of the size-``w`` window ending at frame ``i``."""
    lo = max(0, i - w + 1)
    return [(f, frames[f]) for f in range(lo, i + 1)]


def key_frame_violations(
    ids: AbstractSet[Hashable],
    frame_ids: Iterable[int],
    marked: Iterable[int],
    objects_at: Dict[int, AbstractSet[Hashable]],
) -> list:
    """Check that ``marked`` is a key frame set of the state (ids, frame_ids).

    Returns a list of human readable violations (empty when the set is a key
    frame set): removing every marked frame must break MCOS-hood, and putting
    any single one back must restore it.
    """
    frame_ids = sorted(frame_ids)
    marked = set(marked)
    rest = [objects_at[f] for f in frame_ids if f not in marked]
    problems = []
    if is_mcos(ids, rest):
        problems.append("still an MCOS with all marked frames removed")
    for kf in sorted(marked):
        if not is_mcos(ids, rest + [objects_at[kf]]):
            problems.append(f"re-adding marked frame {kf} does not restore MCOS")
    return problems
