from __future__ import annotations

import random
from typing import List, Tuple

import pytest
from hypothesis import strategies as st

from mcosstream.feed import VideoRelation, make_idset

EXAMPLE_FRAMES = ["B", "ABC", "ABDF", "ABCF", "ABD"]


@pytest.fixture
def example() -> VideoRelation:
    return VideoRelation.from_frames([list(objs) for objs in EXAMPLE_FRAMES])


def masks(frames) -> List[int]:
    return [make_idset(f) for f in frames]


def random_feed(rng: random.Random, max_frames: int = 20, max_ids: int = 8) -> Tuple[list, int, int]:
    """Frames as frozensets of small ints, with a window and a duration."""
    n = rng.randint(1, max_frames)
    n_ids = rng.randint(1, max_ids)
    p = rng.choice([0.3, 0.5, 0.8])
    frames = [frozenset(k for k in range(n_ids) if rng.random() < p) for _ in range(n)]
    if rng.random() < 0.3:
        # repeated object sets, so principals gain several creation frames
        frames = [frames[rng.randrange(min(3, n))] if rng.random() < 0.5 else f for f in frames]
    w = rng.randint(1, 12)
    d = rng.randint(0, w)
    return frames, w, d


@st.composite
def feeds(draw, max_frames: int = 16, max_ids: int = 6, max_w: int = 8):
    n_ids = draw(st.integers(1, max_ids))
    frames = draw(
        st.lists(st.frozensets(st.integers(0, n_ids - 1)), min_size=1, max_size=max_frames)
    )
    w = draw(st.integers(1, max_w))
    d = draw(st.integers(0, w))
    return frames, w, d


LABELS = ["car", "person", "truck", "bus", "dog", "bike"]


def random_queries(rng: random.Random, max_queries: int = 50, n_labels: int = 6, max_n: int = 10, ops=(">=", "<=", "=")):
    """A list of random CNF queries with distinct ids."""
    from mcosstream.cnf import Condition, Query

    labels = LABELS[:n_labels]
    out = []
    for k in range(rng.randint(1, max_queries)):
        clauses = tuple(
            tuple(
                Condition(rng.choice(labels), rng.choice(ops), rng.randint(0, max_n))
                for _ in range(rng.randint(1, 3))
            )
            for _ in range(rng.randint(1, 4))
        )
        out.append(Query(f"q{k}", clauses, 10, rng.randint(0, 10)))
    return out


def random_aggs(rng: random.Random, n_labels: int = 6, max_n: int = 10):
    labels = rng.sample(LABELS[:n_labels], rng.randint(0, n_labels))
    return sorted((lab, rng.randint(1, max_n)) for lab in labels)


def relation_of(frames):
    return VideoRelation.from_frames([sorted(f) for f in frames], {k: ("car" if k % 2 else "person") for k in range(8)})


def random_query_set(rng, w, ge_only=False):
    from mcosstream.cnf import Condition, Query

    ops = (">=",) if ge_only else (">=", "<=", "=")
    out = []
    for k in range(rng.randint(1, 3)):
        clauses = tuple(
            tuple(Condition(rng.choice(["car", "person"]), rng.choice(ops), rng.randint(0, 3)) for _ in range(rng.randint(1, 2)))
            for _ in range(rng.randint(1, 2))
        )
        qw = rng.choice([w, max(1, w - 1)])
        out.append(Query(f"q{k}", clauses, qw, rng.randint(0, qw)))
    return out
