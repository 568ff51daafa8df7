from __future__ import annotations

import random

import pytest
from hypothesis import given, settings

from mcosstream.bench import BenchConfig, bench, parse_bench_config
from mcosstream.cnf import parse_queries, parse_query
from mcosstream.errors import ArgumentError, ConfigurationError, ParseError
from mcosstream.feed import VideoRelation
from mcosstream.ingest import FeedConfig, generate_feed
from mcosstream.oracle import MAX_ORACLE_FRAMES, oracle_mcos, window_frames
from mcosstream.pipeline import ENGINES, group_queries, run_pipeline, window_results

from conftest import feeds, random_feed, random_query_set, relation_of


def matches(result):
    return [(m.at_frame, m.qid, "".join(m.mcos), m.frames) for m in result.matches]


@pytest.mark.parametrize("engine", ENGINES)
def test_example_any_car(example, engine):
    q = parse_query("(car >= 1) WINDOW 4 DURATION 3", qid="a")
    assert matches(run_pipeline(example, [q], engine)) == [
        (2, "a", "B", (0, 1, 2)),
        (3, "a", "AB", (1, 2, 3)),
        (3, "a", "B", (0, 1, 2, 3)),
        (4, "a", "AB", (1, 2, 3, 4)),
    ]


@pytest.mark.parametrize("engine", ENGINES)
def test_example_two_cars(example, engine):
    q = parse_query("(car >= 2) WINDOW 4 DURATION 3", qid="b")
    got = matches(run_pipeline(example, [q], engine))
    assert got[0] == (3, "b", "AB", (1, 2, 3))
    assert got == [(3, "b", "AB", (1, 2, 3)), (4, "b", "AB", (1, 2, 3, 4))]


def test_per_query_duration_inside_one_group(example):
    qs = parse_queries("x: (car >= 1) WINDOW 4 DURATION 4\ny: (car >= 1) WINDOW 4 DURATION 3\n")
    assert len(group_queries(qs)) == 1 and group_queries(qs)[0].d_min == 3
    got = matches(run_pipeline(example, qs))
    assert [m for m in got if m[1] == "x"] == [(3, "x", "B", (0, 1, 2, 3)), (4, "x", "AB", (1, 2, 3, 4))]
    assert len([m for m in got if m[1] == "y"]) == 4


def test_groups_by_window_and_orders_output(example):
    qs = parse_queries("big: (car >= 1) WINDOW 5 DURATION 5\nsmall: (car >= 1) WINDOW 2 DURATION 2\n")
    result = run_pipeline(example, qs)
    assert [g.w for g in group_queries(qs)] == [2, 5]
    assert len(result.per_group) == 2
    keys = [(m.at_frame, m.qid) for m in result.matches]
    frames = [k[0] for k in keys]
    assert frames == sorted(frames)
    assert (4, "big") in keys and (1, "small") in keys


def test_empty_relation():
    result = run_pipeline(VideoRelation.from_frames([]), [parse_query("(car >= 1) WINDOW 3 DURATION 1")])
    assert result.matches == []
    m = result.metrics
    assert (m.intersections_computed, m.states_live_max, m.edges_live_max, m.frames_processed) == (0, 0, 0, 0)


def test_prune_needs_ge_only_queries(example):
    with pytest.raises(ConfigurationError):
        run_pipeline(example, [parse_query("(car <= 3) WINDOW 4 DURATION 1")], prune=True)
    with pytest.raises(ConfigurationError):
        run_pipeline(example, [], engine="fast")


def test_class_filter_drops_unreferenced_labels():
    rel = VideoRelation.from_frames([["c", "d"], ["c", "d"]], {"c": "car", "d": "dog"})
    q = parse_query("(car >= 1) WINDOW 2 DURATION 2", qid="c")
    assert matches(run_pipeline(rel, [q])) == [(1, "c", "c", (0, 1))]
    # without the filter the dog is part of the MCOS {c, d}
    assert matches(run_pipeline(rel, [q], class_filter=False)) == [(1, "c", "cd", (0, 1))]


@settings(max_examples=150, deadline=None)
@given(feeds(max_ids=8, max_w=12))
def test_cross_engine_result_sets(feed):
    frames, w, d = feed
    rel = relation_of(frames)
    per_engine = [window_results(rel, e, w, d) for e in ENGINES]
    assert per_engine[0] == per_engine[1] == per_engine[2]
    for i, got in enumerate(per_engine[0]):
        want = sorted(
            (rel.idset(x), tuple(sorted(f))) for x, f in oracle_mcos(window_frames(frames, i, w), d)
        )
        assert got == want


def test_cross_engine_match_streams():
    rng = random.Random(21)
    for _ in range(300):
        frames, w, _ = random_feed(rng)
        rel = relation_of(frames)
        qs = random_query_set(rng, w)
        streams = [matches(run_pipeline(rel, qs, e)) for e in ENGINES]
        assert streams[0] == streams[1] == streams[2]


def test_pruning_preserves_matches():
    rng = random.Random(8)
    for _ in range(200):
        frames, w, _ = random_feed(rng)
        rel = relation_of(frames)
        qs = random_query_set(rng, w, ge_only=True)
        plain = run_pipeline(rel, qs, "ssg")
        pruned = run_pipeline(rel, qs, "ssg", prune=True)
        assert matches(plain) == matches(pruned)
        assert pruned.metrics.intersections_computed <= plain.metrics.intersections_computed


def test_run_is_deterministic():
    rel = generate_feed(FeedConfig(n_frames=300, mean_objects_per_frame=6, n_classes=2, class_weights=(0.5, 0.5), occlusion=2, seed=3))
    qs = parse_queries("(car >= 2 OR person >= 3) WINDOW 40 DURATION 20\n(car <= 1) AND (person >= 1) WINDOW 25 DURATION 10\n")
    a, b = run_pipeline(rel, qs), run_pipeline(rel, qs)
    assert [m.to_json() for m in a.matches] == [m.to_json() for m in b.matches]
    strip = lambda r: {k: v for k, v in r.as_row().items() if k != "wall_time"}  # noqa: E731
    assert strip(a.metrics) == strip(b.metrics)


def test_match_json_shape(example):
    m = run_pipeline(example, [parse_query("(car >= 2) WINDOW 4 DURATION 3", qid="b")]).matches[0]
    assert m.to_json() == '{"frame": 3, "qid": "b", "mcos": ["A", "B"], "frames": [1, 2, 3]}'


def test_oracle_examples(example):
    frames = [set(example.tokens(m)) for m in example.frames]
    window = window_frames(frames, 4, 4)
    got = {("".join(sorted(x)), tuple(sorted(f))) for x, f in oracle_mcos(window, 0)}
    assert got == {
        ("AB", (1, 2, 3, 4)),
        ("ABC", (1, 3)),
        ("ABD", (2, 4)),
        ("ABF", (2, 3)),
        ("ABDF", (2,)),
        ("ABCF", (3,)),
    }
    assert {("".join(sorted(x)), tuple(sorted(f))) for x, f in oracle_mcos(window, 3)} == {("AB", (1, 2, 3, 4))}
    assert oracle_mcos([(0, {"X"})], 1) == {(frozenset({"X"}), frozenset({0}))}
    with pytest.raises(ArgumentError):
        oracle_mcos([(k, {"X"}) for k in range(MAX_ORACLE_FRAMES + 1)], 0)


SMALL = dict(preset="M2", n_frames=300, seed=0)


def test_bench_engines_agree_on_match_counts():
    rows = bench(BenchConfig(windows=(60,), durations=(40,), **SMALL))
    assert [r["engine"] for r in rows] == list(ENGINES)
    assert len({r["matches"] for r in rows}) == 1 and rows[0]["matches"] > 0


def test_bench_intersections_do_not_depend_on_duration():
    rows = bench(BenchConfig(windows=(60,), durations=(30, 40, 50), **SMALL))
    for engine in ENGINES:
        counts = {r["intersections_computed"] for r in rows if r["engine"] == engine}
        assert len(counts) == 1


def test_bench_occlusion_trend_over_seeds():
    totals = {0: 0, 3: 0}
    for seed in range(4):
        rows = bench(BenchConfig(engines=("mfs",), preset="D1", n_frames=300, seed=seed, windows=(100,), durations=(80,), occlusions=(0, 3)))
        for r in rows:
            totals[r["occlusion"]] += r["states_live_max"]
    assert totals[3] > totals[0]


def test_parse_bench_config():
    cfg = parse_bench_config("engines = naive, ssg\npreset = D1\nwindows = 100,200\ndurations=50\nocclusions = 0,1\nprune = yes # comment\n")
    assert cfg == BenchConfig(engines=("naive", "ssg"), preset="D1", windows=(100, 200), durations=(50,), occlusions=(0, 1), prune=True)
    with pytest.raises(ConfigurationError):
        parse_bench_config("engines = fast")
    with pytest.raises(ConfigurationError):
        parse_bench_config("colour = red")
    with pytest.raises(ParseError):
        parse_bench_config("windows = lots")
    with pytest.raises(ParseError):
        parse_bench_config("windows")
