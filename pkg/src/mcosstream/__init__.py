"""Maximum co-occurrence object sets over sliding windows of video metadata."""

from .cnf import Condition, Query, build_indexes, evaluate, is_prunable, parse_query, parse_queries, prune_check
from .feed import VideoRelation, WindowView, cooc, object_set_of, window_of
from .ingest import PRESETS, FeedConfig, filter_classes, generate_feed, parse_vr, read_vr
from .mfs import FlatEngine, State, StateSet
from .oracle import oracle_mcos
from .pipeline import QueryMatch, RunMetrics, make_engine, run_pipeline
from .ssg import StrictStateGraph

__all__ = [
    "Condition",
    "FeedConfig",
    "FlatEngine",
    "PRESETS",
    "Query",
    "QueryMatch",
    "RunMetrics",
    "State",
    "StateSet",
    "StrictStateGraph",
    "VideoRelation",
    "WindowView",
    "build_indexes",
    "cooc",
    "evaluate",
    "filter_classes",
    "generate_feed",
    "is_prunable",
    "make_engine",
    "object_set_of",
    "oracle_mcos",
    "parse_queries",
    "parse_query",
    "parse_vr",
    "prune_check",
    "read_vr",
    "run_pipeline",
    "window_of",
]
