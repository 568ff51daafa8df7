"""End-to-end evaluation: relation in, per-frame query matches out."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .cnf import IndexSet, Query, aggregate, build_indexes, evaluate, is_prunable, prune_check
from .errors import ConfigurationError
from .feed import IdSet, VideoRelation
from .ingest import filter_classes
from .mfs import MFS, NAIVE, FlatEngine
from .ssg import StrictStateGraph

SSG = "ssg"
ENGINES = (NAIVE, MFS, SSG)


def make_engine(kind: str, w: int, d: int, prune: Optional[Callable[[IdSet], bool]] = None):
    """A per-window engine exposing ``process(i, frame_ids) -> results``."""
    if kind == SSG:
        return StrictStateGraph(w, d, prune)
    if kind in (NAIVE, MFS):
        return FlatEngine(kind, w, d, prune)
    raise ConfigurationError(f"unknown engine {kind!r}; expected one of {', '.join(ENGINES)}")


@dataclass
class QueryGroup:
    w: int
    queries: List[Query]

    @property
    def d_min(self) -> int:
        return min(q.d for q in self.queries)


def group_queries(queries: Sequence[Query]) -> List[QueryGroup]:
    """Group by window size, in ascending window order."""
    groups: Dict[int, List[Query]] = {}
    for q in queries:
        groups.setdefault(q.w, []).append(q)
    return [QueryGroup(w, qs) for w, qs in sorted(groups.items())]


@dataclass(frozen=True)
class QueryMatch:
    at_frame: int
    qid: str
    mcos: Tuple[str, ...]
    frames: Tuple[int, ...]

    def to_json(self) -> str:
        return json.dumps(
            {"frame": self.at_frame, "qid": self.qid, "mcos": list(self.mcos), "frames": list(self.frames)}
        )


@dataclass
class RunMetrics:
    engine: str
    intersections_computed: int = 0
    maintenance_tests: int = 0
    states_live_max: int = 0
    edges_live_max: int = 0
    frames_processed: int = 0
    matches: int = 0
    wall_time: float = 0.0

    def as_row(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class RunResult:
    matches: List[QueryMatch]
    metrics: RunMetrics
    per_group: List[RunMetrics] = field(default_factory=list)


def referenced_labels(queries: Iterable[Query]) -> set:
    return {c.label for q in queries for c in q.conditions()}


def _run_group(
    relation: VideoRelation,
    group: QueryGroup,
    engine: str,
    prune: bool,
    order: Dict[str, int],
) -> Tuple[List[Tuple[int, int, int, QueryMatch]], RunMetrics]:
    indexes: IndexSet = build_indexes(group.queries)
    prune_fn = None
    if prune:
        prune_fn = lambda ids: prune_check(indexes, ids, relation.class_of)  # noqa: E731
    eng = make_engine(engine, group.w, group.d_min, prune_fn)
    duration = {q.qid: q.d for q in group.queries}
    verdicts: Dict[IdSet, List[str]] = {}
    out = []
    started = time.perf_counter()
    for i, frame_ids in enumerate(relation.frames):
        for s in eng.process(i, frame_ids):
            qids = verdicts.get(s.ids)
            if qids is None:
                qids = sorted(evaluate(indexes, aggregate(s.ids, relation.class_of)), key=order.get)
                verdicts[s.ids] = qids
            if not qids:
                continue
            n = len(s.frames)
            tokens: Optional[Tuple[str, ...]] = None
            for qid in qids:
                if n >= duration[qid]:
                    if tokens is None:
                        tokens = tuple(sorted(str(t) for t in relation.tokens(s.ids)))
                    out.append((i, group.w, order[qid], QueryMatch(i, qid, tokens, tuple(s.frames))))
    metrics = RunMetrics(
        engine=engine,
        intersections_computed=eng.intersections,
        maintenance_tests=eng.maintenance_tests,
        states_live_max=eng.states_live_max,
        edges_live_max=eng.edges_live_max,
        frames_processed=len(relation.frames),
        matches=len(out),
        wall_time=time.perf_counter() - started,
    )
    return out, metrics


def run_pipeline(
    relation: VideoRelation,
    queries: Sequence[Query],
    engine: str = SSG,
    prune: bool = False,
    class_filter: bool = True,
) -> RunResult:
    """Evaluate ``queries`` over ``relation`` with the chosen engine.

    Queries are grouped by window size and each group drives one engine with
    the group's smallest duration; each query then keeps only the states
    spanning at least its own duration. Matches are emitted per frame, sorted
    by frame, window, query order and then MCOS. With ``class_filter`` the
    relation is first restricted to the labels the queries mention.
    """
    if engine not in ENGINES:
        raise ConfigurationError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    if prune and not is_prunable(queries):
        raise ConfigurationError("pruning needs a query set with >= conditions only")
    if class_filter and queries:
        relation = filter_classes(relation, referenced_labels(queries))
    order = {q.qid: k for k, q in enumerate(queries)}
    if len(order) != len(queries):
        raise ConfigurationError("query ids must be unique")

    keyed: List[Tuple[int, int, int, QueryMatch]] = []
    per_group: List[RunMetrics] = []
    for group in group_queries(queries):
        rows, m = _run_group(relation, group, engine, prune, order)
        keyed.extend(rows)
        per_group.append(m)
    # Stable order: frame, then group, then query, then the MCOS itself.
    keyed.sort(key=lambda r: (r[0], r[1], r[2], r[3].mcos, r[3].frames))
    matches = [r[3] for r in keyed]

    total = RunMetrics(engine=engine, frames_processed=len(relation.frames), matches=len(matches))
    for m in per_group:
        total.intersections_computed += m.intersections_computed
        total.maintenance_tests += m.maintenance_tests
        total.states_live_max += m.states_live_max
        total.edges_live_max += m.edges_live_max
        total.wall_time += m.wall_time
    return RunResult(matches, total, per_group)


def window_results(relation: VideoRelation, engine: str, w: int, d: int) -> List[List[Tuple[IdSet, Tuple[int, ...]]]]:
    """Per-frame result state sets of one engine, as sorted (ids, frames) pairs."""
    eng = make_engine(engine, w, d)
    return [sorted(s.pair() for s in eng.process(i, f)) for i, f in enumerate(relation.frames)]
