"""The Strict State Graph engine.

States are the nodes of a DAG whose edges point from a state to the states it
generates, i.e. to strictly smaller id sets, and no node has two children
where one contains the other (the strictness condition). The graph kept here is
the covering relation of the live states under id-set containment, which is
the unique graph with both properties that still reaches every state from
the principals.

Per frame the engine expires the frame leaving the window, traverses the
graph from the principal states in arrival order (descending only where the
intersection with the new frame is non-empty), folds the frame into the
visited states with the same marking rules as the flat engine, splices new
states into the graph and finally connects the new principal state through
the candidate selection procedure.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

from .errors import ArgumentError, SequencingError
from .feed import IdSet, members
from .mfs import ResultStateSet, State, fold_frame


@dataclass(eq=False)
class GraphState(State):
    visit_flag: int = -1
    creation_fids: List[int] = field(default_factory=list)
    # Insertion-ordered sets (dict keys), so runs are reproducible.
    children: Dict["GraphState", None] = field(default_factory=dict)
    parents: Dict["GraphState", None] = field(default_factory=dict)
    alive: bool = True

    __hash__ = object.__hash__

    @property
    def principal(self) -> bool:
        return bool(self.creation_fids)

    def trim(self, lo: int) -> None:
        """Drop frames (and marks) older than ``lo``."""
        if self.frames and self.frames[0] < lo:
            del self.frames[: bisect.bisect_left(self.frames, lo)]
        if self.marks and self.marks[0] < lo:
            del self.marks[: bisect.bisect_left(self.marks, lo)]
        if self.creation_fids and self.creation_fids[0] < lo:
            del self.creation_fids[: bisect.bisect_left(self.creation_fids, lo)]


@dataclass
class Candidate:
    s: GraphState
    order: int
    # Reach set, filled in only for selected candidates.
    CS: Optional[Set[GraphState]] = None


def reachable(s: GraphState) -> Set[GraphState]:
    """All states reachable from ``s`` (``s`` included) by depth-first search."""
    seen = {s}
    stack = [s]
    while stack:
        for c in stack.pop().children:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def _minimal(xs: List[GraphState]) -> List[GraphState]:
    """States of ``xs`` with no strict subset in ``xs``.

    Scanning by ascending size, a state is minimal unless it contains one
    already kept: any smaller subset in ``xs`` lies above some kept state.
    """
    kept: List[GraphState] = []
    for a in sorted(xs, key=lambda s: s.ids.bit_count()):
        if not any(b.ids & a.ids == b.ids for b in kept):
            kept.append(a)
    return kept


def _maximal(xs: List[GraphState]) -> List[GraphState]:
    kept: List[GraphState] = []
    for a in sorted(xs, key=lambda s: -s.ids.bit_count()):
        if not any(b.ids & a.ids == a.ids for b in kept):
            kept.append(a)
    return kept


class StrictStateGraph:
    """SSG for one window size ``w`` and duration ``d``.

    ``prune`` is an optional id-set predicate; states it accepts are
    terminated: never materialised, and their subtree is never generated.
    The predicate must be monotone (true for X implies true for every
    subset of X), which holds for the ≥-only query check.
    """

    def __init__(self, w: int, d: int = 0, prune: Optional[Callable[[IdSet], bool]] = None):
        if w < 1:
            raise ArgumentError(f"window size must be >= 1, got {w}")
        self.w = w
        self.d = d
        self.prune = prune
        self.states: Dict[IdSet, GraphState] = {}
        self.principals: Dict[IdSet, GraphState] = {}
        self.prev_results: List[GraphState] = []
        self.last_fid = -1
        self.intersections = 0
        self.maintenance_tests = 0
        self.states_live_max = 0
        self.edges_live_max = 0
        self._n_edges = 0
        self._mark_index: Dict[int, List[GraphState]] = {}
        # States touched during the current frame, with their intersection.
        self._visited: List[Tuple[GraphState, IdSet]] = []
        self.candidates: List[Candidate] = []

    # ---- bookkeeping -------------------------------------------------

    @property
    def n_edges(self) -> int:
        return self._n_edges

    @property
    def edges(self) -> Set[Tuple[IdSet, IdSet]]:
        return {(p.ids, c.ids) for p in self.states.values() for c in p.children}

    def _terminated(self, ids: IdSet) -> bool:
        return self.prune is not None and self.prune(ids)

    def _add_edge(self, p: GraphState, c: GraphState) -> None:
        if c not in p.children:
            p.children[c] = None
            c.parents[p] = None
            self._n_edges += 1

    def _remove_edge(self, p: GraphState, c: GraphState) -> None:
        if c in p.children:
            del p.children[c]
            del c.parents[p]
            self._n_edges -= 1

    def _lo(self, i: int) -> int:
        return max(0, i - self.w + 1)

    # ---- expiration --------------------------------------------------

    def expire(self, fid: int) -> None:
        """Remove ``fid`` from the window: unmark it and delete dead states."""
        lo = fid + 1
        for s in self._mark_index.pop(fid, ()):
            if s.alive and s.marks[-1] < lo:
                self._delete(s)
        for ids, ps in list(self.principals.items()):
            ps.trim(lo)
            if not ps.creation_fids:
                del self.principals[ids]

    def _delete(self, s: GraphState) -> None:
        """Delete ``s`` and splice its parents onto its children.

        A child ``c`` is re-attached to parent ``p`` only when no other child
        of ``p`` still sits above ``c``, which keeps the graph a covering
        relation and so keeps the graph strict.
        """
        s.alive = False
        del self.states[s.ids]
        self.principals.pop(s.ids, None)
        parents, children = list(s.parents), list(s.children)
        for p in parents:
            self._remove_edge(p, s)
        for c in children:
            self._remove_edge(s, c)
        for p in parents:
            for c in children:
                self.maintenance_tests += len(p.children)
                if not any(k.ids & c.ids == c.ids for k in p.children):
                    self._add_edge(p, c)

    # ---- traversal ---------------------------------------------------

    def st_visit(self, i: int, root: GraphState, ns_ids: IdSet) -> None:
        """State traversal from one principal.

        Every state is visited at most once per frame (``visit_flag``); each
        visit prunes expired frames and intersects with the new frame. The
        children of a state are explored only when that intersection is
        non-empty, since an empty intersection is inherited by the whole
        subtree.
        """
        lo = self._lo(i)
        stack = [root]
        while stack:
            s = stack.pop()
            if s.visit_flag == i:
                continue
            s.visit_flag = i
            s.trim(lo)
            self.intersections += 1
            inter = s.ids & ns_ids
            if not inter:
                continue
            self._visited.append((s, inter))
            stack.extend(c for c in s.children if c.visit_flag != i)

    def _make(self, ids: IdSet, frames: List[int]) -> GraphState:
        return GraphState(ids, frames)

    def create_state(self, y: GraphState, lattice: List[GraphState], generators: List[GraphState]) -> None:
        """Splice a newly created state ``y`` into the graph.

        Parents are the minimal states strictly above ``y``: among the states
        it was generated from and the states already placed inside the new
        frame (``lattice``). Children are the maximal placed states strictly
        below it. Edges from a new parent to a new child are replaced by the
        two-step path through ``y``.
        """
        above, below = [], []
        for z in lattice:
            if z is y:
                continue
            self.maintenance_tests += 1
            common = z.ids & y.ids
            if common == y.ids:
                above.append(z)
            elif common == z.ids:
                below.append(z)
        parents = _minimal(generators) + _minimal(above)
        children = _maximal(below)
        for p in parents:
            for c in children:
                self._remove_edge(p, c)
            self._add_edge(p, y)
        for c in children:
            self._add_edge(y, c)

    def cnps(self, ns: GraphState) -> None:
        """Connect the new principal state to the graph.

        Candidates (one per principal meeting the frame) are taken in
        descending id-set size, ties by principal arrival order. A candidate
        already reachable from an earlier selection is skipped; otherwise ns
        gets an edge to it.
        """
        order = sorted(
            (c for c in self.candidates if c.s is not ns),
            key=lambda c: (-c.s.ids.bit_count(), c.order),
        )
        RS: Set[GraphState] = set()
        selected = []
        for c in order:
            if c.s in RS:
                continue
            c.CS = reachable(c.s)
            RS |= c.CS
            selected.append(c.s)
        for p in list(ns.parents):
            for c in selected:
                self._remove_edge(p, c)
        for c in selected:
            self._add_edge(ns, c)

    # ---- per-frame driver --------------------------------------------

    def process_frame(self, i: int, frame_ids: IdSet) -> ResultStateSet:
        if i != self.last_fid + 1:
            raise SequencingError(f"expected frame {self.last_fid + 1}, got {i}")
        self.last_fid = i
        if i - self.w >= 0:
            self.expire(i - self.w)
        lo = self._lo(i)

        touched: List[GraphState] = []
        if frame_ids and not self._terminated(frame_ids):
            touched = self._fold(i, frame_ids)

        results: Dict[IdSet, GraphState] = {}
        for s in self.prev_results:
            if s.alive:
                s.trim(lo)
                if s.marks and len(s.frames) >= self.d:
                    results[s.ids] = s
        for s in touched:
            if s.alive and s.marks and len(s.frames) >= self.d:
                results[s.ids] = s
        self.prev_results = list(results.values())
        self.states_live_max = max(self.states_live_max, len(self.states))
        self.edges_live_max = max(self.edges_live_max, self._n_edges)
        return self.prev_results

    process = process_frame

    def _fold(self, i: int, frame_ids: IdSet) -> List[GraphState]:
        self._visited = []
        principals = list(self.principals.values())
        for ps in principals:
            self.st_visit(i, ps, frame_ids)
        visited = self._visited

        existed_ns = frame_ids in self.states
        created = fold_frame(self.states, visited, i, frame_ids, True, self._terminated, self._make)
        for s, inter in visited:
            if inter == s.ids:
                self._watch(s)
        for s in created:
            s.visit_flag = i
            self._watch(s)
        ns = self.states.get(frame_ids)

        # Place new states inside the frame, largest first, so every larger
        # state a new one must hang below is already in place.
        generators: Dict[IdSet, List[GraphState]] = {}
        lattice: List[GraphState] = []
        for s, inter in visited:
            if inter == s.ids:
                lattice.append(s)
            else:
                generators.setdefault(inter, []).append(s)
        if ns is not None and not existed_ns:
            lattice.append(ns)
            for p in _minimal(generators.get(frame_ids, [])):
                self._add_edge(p, ns)
        for y in sorted((s for s in created if s is not ns), key=lambda s: -s.ids.bit_count()):
            self.create_state(y, lattice, generators.get(y.ids, []))
            lattice.append(y)

        if ns is not None:
            self.candidates = []
            for k, ps in enumerate(principals):
                c = self.states.get(ps.ids & frame_ids)
                if c is not None:
                    self.candidates.append(Candidate(c, k))
            self.cnps(ns)
            ns.creation_fids.append(i)
            self.principals.setdefault(frame_ids, ns)
        return [s for s, _ in visited] + created

    def _watch(self, s: GraphState) -> None:
        # A state dies when its newest mark expires; file it under that fid.
        bucket = self._mark_index.setdefault(s.marks[-1], [])
        if not bucket or bucket[-1] is not s:
            bucket.append(s)

    # ---- inspection --------------------------------------------------

    def size_counters(self) -> Tuple[int, int, int]:
        return len(self.states), self._n_edges, len(self.principals)

    def dump(self, name: Callable[[int], object] = str) -> str:
        """Text dump: one ``node`` line per state, then one ``edge`` line per edge."""

        def label(ids: IdSet) -> str:
            tokens = sorted(str(name(k)) for k in members(ids))
            return ("" if all(len(t) == 1 for t in tokens) else ",").join(tokens)

        lines = []
        for s in sorted(self.states.values(), key=lambda s: (-s.ids.bit_count(), label(s.ids))):
            created = ",".join(map(str, s.creation_fids))
            lines.append(f"node {s.describe(name)} principal [{created}]")
        edges = sorted((label(p.ids), label(c.ids)) for p in self.states.values() for c in p.children)
        lines.extend(f"edge {a} -> {b}" for a, b in edges)
        return "\n".join(lines)
