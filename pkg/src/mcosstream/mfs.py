"""Flat state-set maintenance: the NAIVE baseline and the Marked Frame Set.

Both modes keep one :class:`State` per distinct object-id set and intersect
every state with each arriving frame. NAIVE keeps a state until its frame set
is empty and removes non-maximal sets only when results are collected. MFS
keeps a marked subset of each frame set and drops a state as soon as its last
marked frame leaves the window.

Mark propagation: when frame ``i`` turns a state ``s2`` into ``s2 & O_i == s``
(``s2 != s``), the newest marked frame of ``s2`` becomes marked in ``s``. The
newest mark of a state is the oldest frame whose expiry makes it invalid, so
carrying the maximum is both necessary and sufficient for "valid iff some
marked frame is still in the window".
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple

from .errors import ArgumentError, SequencingError
from .feed import IdSet, is_subset, members

NAIVE = "naive"
MFS = "mfs"


@dataclass
class State:
    ids: IdSet
    frames: List[int]
    marks: List[int] = field(default_factory=list)
    terminated: bool = False

    @property
    def valid(self) -> bool:
        return bool(self.marks)

    def newest_mark(self) -> int:
        return self.marks[-1] if self.marks else -1

    def add_mark(self, fid: int) -> None:
        k = bisect.bisect_left(self.marks, fid)
        if k == len(self.marks) or self.marks[k] != fid:
            self.marks.insert(k, fid)

    def drop_frame(self, fid: int) -> None:
        _remove_sorted(self.frames, fid)
        _remove_sorted(self.marks, fid)

    def pair(self) -> Tuple[IdSet, Tuple[int, ...]]:
        return self.ids, tuple(self.frames)

    def describe(self, name: Callable[[int], object] = str, marked: bool = True) -> str:
        """Render as ``({A,B}, {*1,2,*3,4})``, the notation of the worked tables."""
        tokens = sorted(str(name(k)) for k in members(self.ids))
        ids = ("" if all(len(t) == 1 for t in tokens) else ",").join(tokens)
        marks = set(self.marks) if marked else set()
        frames = ",".join(("*" if f in marks else "") + str(f) for f in self.frames)
        return f"({{{ids}}}, {{{frames}}})"


def _remove_sorted(xs: List[int], x: int) -> None:
    if xs and xs[0] == x:
        del xs[0]
        return
    k = bisect.bisect_left(xs, x)
    if k < len(xs) and xs[k] == x:
        del xs[k]


ResultStateSet = List[State]


def result_pairs(results: Iterable[State]) -> Set[Tuple[IdSet, Tuple[int, ...]]]:
    return {s.pair() for s in results}


class StateSet:
    """The map from canonical id set to :class:`State` for one engine.

    ``prune`` is an optional predicate on id sets; states for which it returns
    True are terminated at creation and never materialised.
    """

    def __init__(self, mode: str = MFS, prune: Optional[Callable[[IdSet], bool]] = None):
        if mode not in (NAIVE, MFS):
            raise ArgumentError(f"unknown flat mode {mode!r}")
        self.mode = mode
        self.states: Dict[IdSet, State] = {}
        self.last_fid = -1
        self.prune = prune
        self.intersections = 0

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states.values())

    def __contains__(self, ids: IdSet) -> bool:
        return ids in self.states

    def __getitem__(self, ids: IdSet) -> State:
        return self.states[ids]

    def _terminated(self, ids: IdSet) -> bool:
        return self.prune is not None and self.prune(ids)


def _advance(states: StateSet, i: int) -> None:
    if i != states.last_fid + 1:
        raise SequencingError(f"expected frame {states.last_fid + 1}, got {i}")
    states.last_fid = i


def fold_frame(
    states: Dict[IdSet, State],
    touched: Iterable[Tuple[State, IdSet]],
    i: int,
    frame_ids: IdSet,
    marking: bool,
    terminated: Callable[[IdSet], bool],
    make: Callable[..., State] = State,
) -> List[State]:
    """Apply frame ``i`` given each touched state and its intersection with it.

    ``touched`` must cover every state whose id set meets ``frame_ids``. States
    that are contained in the frame get ``i`` appended; every other non-empty
    intersection becomes a state of its own, with the union of its generators'
    frames plus ``i``. Returns the states created, the frame's own state last
    when it is new.
    """
    contained: List[State] = []
    # intersection -> (union of generator frames, newest generator mark)
    generated: Dict[IdSet, list] = {}
    for s, inter in touched:
        if not inter:
            continue
        if inter == s.ids:
            contained.append(s)
            continue
        acc = generated.get(inter)
        if acc is None:
            generated[inter] = [set(s.frames), s.newest_mark()]
        else:
            acc[0].update(s.frames)
            if s.newest_mark() > acc[1]:
                acc[1] = s.newest_mark()

    for s in contained:
        s.frames.append(i)
        acc = generated.pop(s.ids, None)
        if marking and acc is not None and acc[1] >= 0:
            s.add_mark(acc[1])

    created: List[State] = []
    own = generated.pop(frame_ids, None)
    for inter, (frames, newest) in generated.items():
        if terminated(inter):
            continue
        s = make(inter, sorted(frames) + [i])
        if marking and newest >= 0:
            s.marks.append(newest)
        states[inter] = s
        created.append(s)

    if frame_ids in states:
        if marking:
            states[frame_ids].add_mark(i)
    elif not terminated(frame_ids):
        frames, newest = own if own is not None else (set(), -1)
        s = make(frame_ids, sorted(frames) + [i])
        if marking:
            if newest >= 0:
                s.marks.append(newest)
            s.marks.append(i)
        states[frame_ids] = s
        created.append(s)
    return created


def _step(states: StateSet, i: int, frame_ids: IdSet, marking: bool) -> StateSet:
    _advance(states, i)
    if not frame_ids:
        return states
    touched = []
    for s in states.states.values():
        states.intersections += 1
        touched.append((s, s.ids & frame_ids))
    fold_frame(states.states, touched, i, frame_ids, marking, states._terminated)
    return states


def naive_step(states: StateSet, i: int, frame_ids: IdSet) -> StateSet:
    """Fold frame ``i`` into the state set without maintaining marks."""
    return _step(states, i, frame_ids, marking=False)


def mfs_step(states: StateSet, i: int, frame_ids: IdSet) -> StateSet:
    """Fold frame ``i`` into the state set following the frame marking rules.

    The state equal to the frame's object set gets ``i`` marked; a state
    reached as ``s2 & O_i`` inherits the newest mark of ``s2``; ``i`` itself
    is appended unmarked everywhere else.
    """
    return _step(states, i, frame_ids, marking=True)


def expire(states: StateSet, expired_fid: int) -> StateSet:
    dead = []
    for key, s in states.states.items():
        s.drop_frame(expired_fid)
        if states.mode == NAIVE:
            if not s.frames:
                dead.append(key)
        elif not s.marks:
            dead.append(key)
    for key in dead:
        del states.states[key]
    return states


def collect_results(states: StateSet, d: int) -> ResultStateSet:
    """Valid states whose frame set spans at least ``d`` frames."""
    if states.mode == MFS:
        return [s for s in states.states.values() if s.marks and len(s.frames) >= d]

    satisfied = [s for s in states.states.values() if s.frames and len(s.frames) >= d]
    by_frames: Dict[Tuple[int, ...], List[State]] = {}
    for s in satisfied:
        by_frames.setdefault(tuple(s.frames), []).append(s)
    out = []
    for group in by_frames.values():
        for s in group:
            if not any(t is not s and t.ids != s.ids and is_subset(s.ids, t.ids) for t in group):
                out.append(s)
    return out


class FlatEngine:
    """Per-frame driver: expire, step, collect, for one window size."""

    def __init__(self, mode: str, w: int, d: int, prune: Optional[Callable[[IdSet], bool]] = None):
        if w < 1:
            raise ArgumentError(f"window size must be >= 1, got {w}")
        self.mode = mode
        self.w = w
        self.d = d
        self.states = StateSet(mode, prune)
        self.states_live_max = 0

    @property
    def intersections(self) -> int:
        return self.states.intersections

    @property
    def edges_live_max(self) -> int:
        return 0

    @property
    def maintenance_tests(self) -> int:
        return 0

    def process(self, i: int, frame_ids: IdSet) -> ResultStateSet:
        if i - self.w >= 0:
            expire(self.states, i - self.w)
        if self.mode == NAIVE:
            naive_step(self.states, i, frame_ids)
        else:
            mfs_step(self.states, i, frame_ids)
        self.states_live_max = max(self.states_live_max, len(self.states))
        return collect_results(self.states, self.d)
