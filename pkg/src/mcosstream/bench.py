"""Parameter sweeps over engines, window sizes, durations and occlusion."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .cnf import parse_query
from .errors import ConfigurationError, ParseError
from .ingest import PRESETS, FeedConfig, generate_feed
from .pipeline import ENGINES, run_pipeline


@dataclass(frozen=True)
class BenchConfig:
    engines: Tuple[str, ...] = ENGINES
    preset: str = "M2"
    n_frames: Optional[int] = None
    seed: int = 0
    windows: Tuple[int, ...] = (300,)
    durations: Tuple[int, ...] = (240,)
    occlusions: Optional[Tuple[int, ...]] = None
    # Clause part of the query; WINDOW and DURATION come from the cell.
    query: Optional[str] = None
    prune: bool = False

    def feed(self, occlusion: Optional[int]) -> FeedConfig:
        if self.preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {self.preset!r}")
        cfg = PRESETS[self.preset].replace(seed=self.seed)
        if self.n_frames is not None:
            cfg = cfg.replace(n_frames=self.n_frames)
        if occlusion is not None:
            cfg = cfg.replace(occlusion=occlusion)
        return cfg

    def clause_text(self, labels: Tuple[str, ...]) -> str:
        # By default every non-empty state matches, so match counts equal
        # the number of result states.
        return self.query or "(" + " OR ".join(f"{label} >= 1" for label in labels) + ")"


_KEYS = ("engines", "windows", "durations", "occlusions", "n_frames", "seed", "preset", "query", "prune")


def _ints(value: str) -> Tuple[int, ...]:
    return tuple(int(v) for v in value.split(",") if v.strip())


def parse_bench_config(text: str) -> BenchConfig:
    """``key=value`` lines; list values are comma separated."""
    values: Dict[str, object] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (p.strip() for p in line.partition("="))
        if not sep:
            raise ParseError(f"expected key=value, got {raw.strip()!r}", n)
        if key not in _KEYS:
            raise ConfigurationError(f"line {n}: unknown key {key!r}")
        try:
            if key == "engines":
                values[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key in ("windows", "durations", "occlusions"):
                values[key] = _ints(value)
            elif key in ("n_frames", "seed"):
                values[key] = int(value)
            elif key in ("preset", "query"):
                values[key] = value
            elif key == "prune":
                values[key] = value.lower() in ("1", "true", "yes", "on")
        except ValueError:
            raise ParseError(f"bad value {value!r} for {key}", n) from None
    cfg = BenchConfig(**values)  # type: ignore[arg-type]
    for e in cfg.engines:
        if e not in ENGINES:
            raise ConfigurationError(f"unknown engine {e!r}")
    return cfg


def bench(cfg: BenchConfig) -> List[Dict[str, object]]:
    """One row per (occlusion, w, d, engine) cell with its run metrics."""
    rows = []
    for occ in cfg.occlusions or (None,):
        feed_cfg = cfg.feed(occ)
        relation = generate_feed(feed_cfg)
        clause = cfg.clause_text(feed_cfg.labels)
        for w, d, engine in itertools.product(cfg.windows, cfg.durations, cfg.engines):
            query = parse_query(f"{clause} WINDOW {w} DURATION {d}", qid="bench")
            result = run_pipeline(relation, [query], engine=engine, prune=cfg.prune)
            row: Dict[str, object] = {
                "preset": cfg.preset,
                "seed": cfg.seed,
                "n_frames": feed_cfg.n_frames,
                "w": w,
                "d": d,
                "occlusion": feed_cfg.occlusion,
            }
            row.update(result.metrics.as_row())
            rows.append(row)
    return rows
